//! Self-contained SVG charts: trajectory plots and the cumulative
//! distribution curve. No external assets, inline styles only.

use crate::stability::{StabilityReport, Trajectory};

const COLORS: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const PANEL_W: f64 = 460.0;
const PANEL_H: f64 = 420.0;
const MARGIN: f64 = 54.0;

struct Panel {
    x0: f64,
    first_step: usize,
    last_step: usize,
    y_min: f64,
    y_max: f64,
}

impl Panel {
    fn of(steps: &[Vec<f64>], first_step: usize, last_step: usize, x0: f64) -> Panel {
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for step in &steps[first_step..=last_step] {
            for &v in step {
                y_min = y_min.min(v);
                y_max = y_max.max(v);
            }
        }
        let pad = 0.05 * (y_max - y_min).max(1e-12);
        Panel { x0, first_step, last_step, y_min: y_min - pad, y_max: y_max + pad }
    }

    fn x(&self, step: usize) -> f64 {
        let span = (self.last_step - self.first_step).max(1) as f64;
        self.x0 + MARGIN + (step - self.first_step) as f64 / span * (PANEL_W - 2.0 * MARGIN)
    }

    fn y(&self, value: f64) -> f64 {
        let t = (value - self.y_min) / (self.y_max - self.y_min);
        MARGIN + (1.0 - t) * (PANEL_H - 2.0 * MARGIN)
    }

    fn render(&self, out: &mut String, steps: &[Vec<f64>], title: &str) {
        let dim = steps[0].len();
        out.push_str(&format!(
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444" stroke-width="1"/>"##,
            self.x0 + MARGIN,
            MARGIN,
            PANEL_W - 2.0 * MARGIN,
            PANEL_H - 2.0 * MARGIN
        ));
        out.push_str(&format!(
            r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"##,
            self.x0 + PANEL_W / 2.0,
            MARGIN - 10.0,
            title
        ));
        // zero line when visible
        if self.y_min < 0.0 && self.y_max > 0.0 {
            let y = self.y(0.0);
            out.push_str(&format!(
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#999" stroke-dasharray="4 3" stroke-width="1"/>"##,
                self.x0 + MARGIN,
                self.x0 + PANEL_W - MARGIN,
            ));
        }
        // y-axis extremes
        for (v, anchor_y) in [(self.y_max, MARGIN + 4.0), (self.y_min, PANEL_H - MARGIN)] {
            out.push_str(&format!(
                r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"##,
                self.x0 + MARGIN - 6.0,
                anchor_y,
                format_tick(v)
            ));
        }
        // x ticks: first and last step of the panel
        for s in [self.first_step, self.last_step] {
            out.push_str(&format!(
                r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{s}</text>"##,
                self.x(s),
                PANEL_H - MARGIN + 16.0,
            ));
        }
        for k in 0..dim {
            let mut path = String::new();
            for (idx, step) in steps[self.first_step..=self.last_step].iter().enumerate() {
                let cmd = if idx == 0 { 'M' } else { 'L' };
                path.push_str(&format!(
                    "{cmd}{:.2} {:.2} ",
                    self.x(self.first_step + idx),
                    self.y(step[k])
                ));
            }
            out.push_str(&format!(
                r##"<path d="{}" fill="none" stroke="{}" stroke-width="1.8"/>"##,
                path.trim_end(),
                COLORS[k % COLORS.len()]
            ));
        }
    }
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e5 || v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Line chart of a trajectory, one polyline per product. When the
/// trajectory collapses, the plot splits into a stable-range panel and a
/// compressed final panel (the two ranges differ by orders of magnitude),
/// and the collapse step is marked.
pub fn trajectory_svg(t: &Trajectory, report: &StabilityReport) -> String {
    let steps = t.steps_f64();
    let labels = t.labels();
    let split = match report.collapse_time {
        Some(time) if time >= 3 && steps.len() > time => Some(time),
        _ => None,
    };
    let panels: Vec<Panel> = match split {
        Some(time) => vec![
            Panel::of(&steps, 0, time - 2, 0.0),
            Panel::of(&steps, time - 2, time.min(steps.len() - 1), PANEL_W),
        ],
        None => vec![Panel::of(&steps, 0, steps.len() - 1, 0.0)],
    };
    let width = PANEL_W * panels.len() as f64;
    let height = PANEL_H + 22.0 * labels.len() as f64;
    let mut out = format!(
        r##"<svg version="1.1" width="{width:.0}" height="{height:.0}" xmlns="http://www.w3.org/2000/svg"><rect width="100%" height="100%" fill="white"/>"##
    );
    let titles: Vec<String> = match split {
        Some(time) => vec![
            format!("steps 0..{}", time - 2),
            format!("collapse (T = {time})"),
        ],
        None => vec!["trajectory".to_string()],
    };
    for (panel, title) in panels.iter().zip(&titles) {
        panel.render(&mut out, &steps, title);
    }
    // collapse marker on the final panel
    if let (Some(time), Some(product)) = (report.collapse_time, report.collapse_product) {
        if let Some(panel) = panels.last() {
            if time <= panel.last_step {
                let cx = panel.x(time);
                let cy = panel.y(steps[time][product]);
                out.push_str(&format!(
                    r##"<circle cx="{cx:.1}" cy="{cy:.1}" r="5" fill="none" stroke="#d62728" stroke-width="2"/>"##
                ));
                out.push_str(&format!(
                    r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" fill="#d62728">T = {time}</text>"##,
                    cx - 36.0,
                    cy - 10.0,
                ));
            }
        }
    }
    // legend
    for (k, label) in labels.iter().enumerate() {
        let y = PANEL_H + 16.0 + 22.0 * k as f64;
        out.push_str(&format!(
            r##"<rect x="{:.1}" y="{:.1}" width="14" height="14" fill="{}"/>"##,
            MARGIN,
            y - 11.0,
            COLORS[k % COLORS.len()]
        ));
        out.push_str(&format!(
            r##"<text x="{:.1}" y="{y:.1}" font-family="sans-serif" font-size="12">{}</text>"##,
            MARGIN + 20.0,
            escape(label)
        ));
    }
    out.push_str("</svg>");
    out
}

/// Cumulative-distribution curve with the weak and pillar thresholds drawn
/// as horizontal lines and the resulting class boundaries as vertical
/// lines.
pub fn cumulative_svg(curve: &[(usize, f64)], theta_weak: f64, theta_pillar: f64) -> String {
    let (w, h) = (560.0, 420.0);
    let n = curve.len().max(1) as f64;
    let x = |pos: usize| MARGIN + (pos as f64 - 0.5) / n * (w - 2.0 * MARGIN);
    let y = |v: f64| MARGIN + (1.0 - v) * (h - 2.0 * MARGIN);
    let mut out = format!(
        r##"<svg version="1.1" width="{w:.0}" height="{h:.0}" xmlns="http://www.w3.org/2000/svg"><rect width="100%" height="100%" fill="white"/>"##
    );
    out.push_str(&format!(
        r##"<rect x="{m:.1}" y="{m:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444" stroke-width="1"/>"##,
        w - 2.0 * MARGIN,
        h - 2.0 * MARGIN,
        m = MARGIN
    ));
    for (theta, name) in [(theta_weak, "weak"), (theta_pillar, "pillar")] {
        let ty = y(theta);
        out.push_str(&format!(
            r##"<line x1="{:.1}" y1="{ty:.1}" x2="{:.1}" y2="{ty:.1}" stroke="#888" stroke-dasharray="5 4" stroke-width="1"/>"##,
            MARGIN,
            w - MARGIN,
        ));
        out.push_str(&format!(
            r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="#555">{name} {theta}</text>"##,
            w - MARGIN + 4.0,
            ty + 4.0,
        ));
    }
    // class boundaries: last position inside the weak mass, first position
    // reaching the pillar mass
    let weak_end = curve.iter().rev().find(|(_, c)| *c <= theta_weak).map(|&(p, _)| p);
    let pillar_start = curve.iter().find(|(_, c)| *c >= theta_pillar).map(|&(p, _)| p);
    for (pos, color) in [(weak_end, "#1f77b4"), (pillar_start, "#d62728")] {
        if let Some(p) = pos {
            let bx = x(p);
            out.push_str(&format!(
                r##"<line x1="{bx:.1}" y1="{:.1}" x2="{bx:.1}" y2="{:.1}" stroke="{color}" stroke-width="1.2"/>"##,
                MARGIN,
                h - MARGIN,
            ));
        }
    }
    let mut path = String::new();
    for (idx, &(pos, c)) in curve.iter().enumerate() {
        let cmd = if idx == 0 { 'M' } else { 'L' };
        path.push_str(&format!("{cmd}{:.2} {:.2} ", x(pos), y(c)));
    }
    out.push_str(&format!(
        r##"<path d="{}" fill="none" stroke="#1f77b4" stroke-width="1.8"/>"##,
        path.trim_end()
    ));
    for &(pos, c) in curve {
        out.push_str(&format!(
            r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#1f77b4"/>"##,
            x(pos),
            y(c)
        ));
    }
    out.push_str(&format!(
        r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">rank position</text>"##,
        w / 2.0,
        h - MARGIN + 32.0,
    ));
    out.push_str("</svg>");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
