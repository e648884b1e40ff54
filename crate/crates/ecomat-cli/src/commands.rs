use std::path::Path;

use ecomat::consumption::{
    available_consumption, chen_alpha_matrix, max_feasible_alpha, ConsumptionPlan, FeasibilityOpts,
};
use ecomat::eigen::{
    eigentriple, inverse_power_eigenpair, power_eigenpair, quasi_symmetrize, smooth_transform,
    Side, SolverConfig, SolverKind,
};
use ecomat::matrix::{amplitude, cw_bounds, is_irreducible, min_positivity_exponent, period};
use ecomat::numeric::{parse_decimal, rational_to_f64, Rational};
use ecomat::optimize::{invariance_deviation, optimize_structure};
use ecomat::ranking::{classify, cumulative_curve, rank_products};
use ecomat::stability::{
    collapse_report, equivalence_check, iterate_chain, iterate_exact, iterate_float, CrisisConfig,
    FloatOpts, Trajectory,
};
use ecomat::transform::{chen_transform, dual_chain, inverse_chen, similarity_transform};
use ecomat::{Error, NumericMode, StructureMatrix};
use ecomat::nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::config::{ModeArg, RunConfig};
use crate::output::{sorted_value, write_atomic};
use crate::table::parse_table;
use crate::CliError;

pub struct CommandOutput {
    pub json: Value,
    pub exit: i32,
}

impl From<Value> for CommandOutput {
    fn from(json: Value) -> Self {
        CommandOutput { json, exit: 0 }
    }
}

fn parse_vector(s: &str, d: usize, what: &str) -> Result<Vec<Rational>, Error> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != d {
        return Err(Error::Parse(format!(
            "{what}: expected {d} comma-separated values, found {}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|p| parse_decimal(p).map_err(|e| Error::Parse(format!("{what}: {e}"))))
        .collect()
}

fn to_f64s(v: &[Rational]) -> Vec<f64> {
    v.iter().map(rational_to_f64).collect()
}

pub fn inspect(cfg: &RunConfig, table: &Path) -> Result<CommandOutput, CliError> {
    let tf = parse_table(table)?;
    let a = &tf.matrix;
    if !is_irreducible(a) {
        return Err(Error::Structural(
            "matrix is reducible: some products are not interconnected".into(),
        )
        .into());
    }
    let p = period(a)?;
    let aperiodic = p == 1;
    let m_min = if aperiodic { Some(min_positivity_exponent(a)?) } else { None };
    let ones = vec![1.0; tf.dim];
    let cw = cw_bounds(a, &ones)?;
    let _ = cfg;
    Ok(json!({
        "dim": tf.dim,
        "labels": tf.labels,
        "irreducible": true,
        "period": p,
        "aperiodic": aperiodic,
        "min_positivity_exponent": m_min,
        "amplitude": rational_to_f64(&amplitude(a)),
        "cw_at_ones": { "lower": cw.lower, "upper": cw.upper },
    })
    .into())
}

pub fn eigen(cfg: &RunConfig, table: &Path) -> Result<CommandOutput, CliError> {
    let tf = parse_table(table)?;
    let t = eigentriple(&tf.matrix, &cfg.solver_config())?;
    let mut v = sorted_value(&t);
    v["labels"] = json!(tf.labels);
    v["normalization"] = json!("sum(v) = dim, dot(u, v) = 1");
    Ok(v.into())
}

pub fn transform(cfg: &RunConfig, table: &Path) -> Result<CommandOutput, CliError> {
    let tf = parse_table(table)?;
    let t = eigentriple(&tf.matrix, &cfg.solver_config())?;
    let chain = chen_transform(&tf.matrix, &t)?;
    let dual = dual_chain(&tf.matrix, &t)?;
    Ok(json!({
        "chain": sorted_value(&chain),
        "dual": sorted_value(&dual),
        "rho": t.rho,
    })
    .into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SpaceArg {
    /// Iterate the structure matrix itself.
    A,
    /// Iterate the transformed chain.
    P,
}

pub fn stability(
    cfg: &RunConfig,
    table: &Path,
    initial: &str,
    space: SpaceArg,
) -> Result<CommandOutput, CliError> {
    let tf = parse_table(table)?;
    let a = &tf.matrix;
    let x0 = parse_vector(initial, tf.dim, "--initial")?;
    let (traj, crisis_rho, mode_used): (Trajectory, Option<f64>, &str) = match space {
        SpaceArg::A => {
            let traj = match cfg.mode {
                ModeArg::Rational => iterate_exact(a, &x0, cfg.horizon)?,
                ModeArg::Float => iterate_float(a, &to_f64s(&x0), cfg.horizon, &FloatOpts::default())?,
            };
            // the spectral radius is only needed for the crisis window;
            // a matrix the solver rejects still iterates fine
            let rho = eigentriple(a, &cfg.solver_config()).ok().map(|t| t.rho);
            let mode = match cfg.mode {
                ModeArg::Rational => "rational",
                ModeArg::Float => "float",
            };
            (traj, rho, mode)
        }
        SpaceArg::P => {
            // chain-space initial vectors involve the irrational transform
            // vector, so this path always runs in doubles
            let t = eigentriple(a, &cfg.solver_config())?;
            let chain = chen_transform(a, &t)?;
            let traj = iterate_chain(&chain, &to_f64s(&x0), cfg.horizon, &FloatOpts::default())?;
            (traj, Some(1.0), "float")
        }
    };
    let report = collapse_report(
        &traj,
        &CrisisConfig { rho: crisis_rho, threshold: cfg.crisis_threshold },
    );
    let csv_path = cfg.output_dir.join("trajectory.csv");
    let svg_path = cfg.output_dir.join("trajectory.svg");
    write_atomic(&csv_path, &trajectory_csv(&traj))?;
    write_atomic(&svg_path, &ecomat::chart::trajectory_svg(&traj, &report))?;
    let collapse_product = report.collapse_product.map(|k| {
        json!({ "index": k, "label": tf.labels[k] })
    });
    Ok(json!({
        "space": match space { SpaceArg::A => "structure", SpaceArg::P => "chain" },
        "mode": mode_used,
        "horizon": cfg.horizon,
        "initial": to_f64s(&x0),
        "steps_recorded": traj.len(),
        "collapse_time": report.collapse_time,
        "collapse_product": collapse_product,
        "crisis_window": report.crisis_window,
        "terminal_magnitudes": sorted_value(&report.terminal_magnitudes),
        "files": {
            "trajectory_csv": csv_path.display().to_string(),
            "trajectory_svg": svg_path.display().to_string(),
        },
    })
    .into())
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["step".to_string()];
    header.extend(traj.labels().iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for k in 0..traj.len() {
        let mut row = vec![k.to_string()];
        row.extend(traj.step_f64(k).iter().map(|c| format!("{c}")));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub fn rank(cfg: &RunConfig, table: &Path) -> Result<CommandOutput, CliError> {
    let tf = parse_table(table)?;
    let t = eigentriple(&tf.matrix, &cfg.solver_config())?;
    let chain = chen_transform(&tf.matrix, &t)?;
    let report = rank_products(&chain, &tf.labels);
    Ok(sorted_value(&report).into())
}

pub fn classify_cmd(cfg: &RunConfig, table: &Path) -> Result<CommandOutput, CliError> {
    let tf = parse_table(table)?;
    let t = eigentriple(&tf.matrix, &cfg.solver_config())?;
    let chain = chen_transform(&tf.matrix, &t)?;
    let report = classify(&chain, cfg.theta_weak, cfg.theta_pillar)?;
    let curve = cumulative_curve(&chain);
    let svg_path = cfg.output_dir.join("cdf.svg");
    write_atomic(
        &svg_path,
        &ecomat::chart::cumulative_svg(&curve, cfg.theta_weak, cfg.theta_pillar),
    )?;
    let mut v = sorted_value(&report);
    v["curve"] = json!(curve);
    v["files"] = json!({ "cdf_svg": svg_path.display().to_string() });
    Ok(v.into())
}

#[allow(clippy::too_many_arguments)]
pub fn forecast(
    cfg: &RunConfig,
    table: &Path,
    delta: Option<f64>,
    alpha: Option<f64>,
    x_n: Option<&str>,
    planned: Option<&str>,
) -> Result<CommandOutput, CliError> {
    let tf = parse_table(table)?;
    let a = &tf.matrix;
    let t = eigentriple(a, &cfg.solver_config())?;
    let plan = match (delta, alpha) {
        (Some(d), None) => ConsumptionPlan::from_delta(d, t.rho)?,
        (None, Some(al)) => ConsumptionPlan::from_alpha(al, t.rho)?,
        _ => {
            return Err(Error::Domain(
                "exactly one of --delta and --alpha must be given".into(),
            )
            .into())
        }
    };
    let mut out = json!({ "rho": t.rho, "plan": sorted_value(&plan) });
    if let Some(x_n) = x_n {
        let xn = to_f64s(&parse_vector(x_n, tf.dim, "--x-n")?);
        let a_alpha = chen_alpha_matrix(a, plan.alpha)?;
        let one_step = iterate_float(&a_alpha, &xn, 1, &FloatOpts::default())?;
        let x_next = one_step.step_f64(1);
        let xi = available_consumption(&xn, &x_next, plan.delta, t.rho)?;
        out["x_next"] = json!(x_next);
        out["available_consumption"] = json!(xi);
        if let Some(planned) = planned {
            let planned_v = to_f64s(&parse_vector(planned, tf.dim, "--planned")?);
            let feas = max_feasible_alpha(&planned_v, &xn, a, t.rho, &FeasibilityOpts::default())?;
            out["feasibility"] = sorted_value(&feas);
        }
    } else if planned.is_some() {
        return Err(Error::Domain("--planned requires --x-n".into()).into());
    }
    Ok(out.into())
}

pub fn optimize(
    cfg: &RunConfig,
    table: &Path,
    target: &str,
    alpha: f64,
) -> Result<CommandOutput, CliError> {
    let tf = parse_table(table)?;
    let t = eigentriple(&tf.matrix, &cfg.solver_config())?;
    let a_alpha = chen_alpha_matrix(&tf.matrix, alpha)?;
    let mut t_alpha = t.clone();
    t_alpha.rho = (1.0 - alpha) * t.rho + alpha;
    t_alpha.residual = t_alpha.verify(&a_alpha);
    if !(t_alpha.residual <= t_alpha.tolerance) {
        return Err(Error::Numeric(format!(
            "blended eigen data drifted: residual {:e}",
            t_alpha.residual
        ))
        .into());
    }
    let target_v = to_f64s(&parse_vector(target, tf.dim, "--target")?);
    let result = optimize_structure(&a_alpha, &t_alpha, &target_v)?;
    let deviation = invariance_deviation(&a_alpha, &result, &t_alpha)?;
    Ok(json!({
        "alpha": alpha,
        "rho": t_alpha.rho,
        "result": sorted_value(&result),
        "invariance": { "ok": deviation <= 1e-10, "max_deviation": deviation },
    })
    .into())
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, out: Result<(bool, String), Error>) -> Check {
    match out {
        Ok((pass, detail)) => Check { name, pass, detail },
        Err(e) => Check { name, pass: false, detail: e.to_string() },
    }
}

/// Full property sweep against one matrix. Deterministic: fixed probe
/// vectors, no randomness.
pub fn check_invariants(cfg: &RunConfig, table: &Path) -> Result<CommandOutput, CliError> {
    let tf = parse_table(table)?;
    let a = &tf.matrix;
    let d = tf.dim;
    if !is_irreducible(a) {
        return Err(Error::Structural("matrix is reducible".into()).into());
    }
    if period(a)? != 1 {
        return Err(Error::Structural("matrix is periodic".into()).into());
    }
    let solver_cfg = cfg.solver_config();
    let tol = solver_cfg.tolerance;
    let t = eigentriple(a, &solver_cfg)?;
    let chain = chen_transform(a, &t)?;
    let probe: Vec<f64> = (0..d).map(|k| 1.0 + k as f64 / d as f64).collect();

    let mut checks = Vec::new();

    checks.push(check("eigen_residual_within_tolerance", Ok((
        t.residual <= tol,
        format!("residual {:e}", t.residual),
    ))));

    checks.push(check("power_and_inverse_power_agree", (|| {
        let (rho_p, _) = power_eigenpair(a, Side::Right, &solver_cfg)?;
        let inv_cfg = SolverConfig { solver: SolverKind::InversePower, ..solver_cfg.clone() };
        let (rho_i, _) = inverse_power_eigenpair(a, Side::Right, &inv_cfg)?;
        Ok(((rho_p - rho_i).abs() <= 10.0 * tol * rho_p, format!("gap {:e}", (rho_p - rho_i).abs())))
    })()));

    checks.push(check("cw_interval_brackets_rho", (|| {
        let mut ok = true;
        let mut detail = String::new();
        for x in [vec![1.0; d], probe.clone()] {
            let b = cw_bounds(a, &x)?;
            ok &= b.lower <= t.rho * (1.0 + 1e-12) && t.rho <= b.upper * (1.0 + 1e-12);
            detail = format!("[{}, {}] vs rho {}", b.lower, b.upper, t.rho);
        }
        Ok((ok, detail))
    })()));

    checks.push(check("chain_rows_sum_to_one", Ok((
        chain.row_sum_deviation() <= 10.0 * tol,
        format!("deviation {:e}", chain.row_sum_deviation()),
    ))));

    let pi_drift: f64 = {
        let pi = chain.pi();
        (0..d)
            .map(|j| {
                let next: f64 = (0..d).map(|i| pi[i] * chain.matrix()[(i, j)]).sum();
                (next - pi[j]).abs()
            })
            .fold(0.0, f64::max)
    };
    checks.push(check(
        "pi_is_stationary",
        Ok((pi_drift <= 1e-10, format!("drift {pi_drift:e}"))),
    ));

    checks.push(check("chain_powers_reach_equilibrium", (|| {
        let m_min = min_positivity_exponent(a)?;
        let n = (4 * m_min * (1.0f64 / tol).ln().ceil() as usize).min(10_000);
        let mut p_n = DMatrix::<f64>::identity(d, d);
        for _ in 0..n {
            p_n = &p_n * chain.matrix();
        }
        let dev = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| (p_n[(i, j)] - chain.pi()[j]).abs())
            .fold(0.0f64, f64::max);
        Ok((dev <= 1e-8, format!("n = {n}, deviation {dev:e}")))
    })()));

    checks.push(check("dual_columns_sum_to_one", (|| {
        let q = dual_chain(a, &t)?;
        Ok((q.column_sum_deviation() <= 10.0 * tol, format!("deviation {:e}", q.column_sum_deviation())))
    })()));

    checks.push(check("inverse_transform_round_trips", (|| {
        let a_w = inverse_chen(chain.matrix(), &probe, false, 1e-9)?;
        let dev = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| (a_w[(i, j)] * probe[j] / probe[i] - chain.matrix()[(i, j)]).abs())
            .fold(0.0f64, f64::max);
        Ok((dev <= 1e-12, format!("deviation {dev:e}")))
    })()));

    checks.push(check("stochastic_iff_w_is_v", (|| {
        let row_dev = |m: &DMatrix<f64>| -> f64 {
            (0..d)
                .map(|i| ((0..d).map(|j| m[(i, j)]).sum::<f64>() - 1.0).abs())
                .fold(0.0, f64::max)
        };
        let good = row_dev(&similarity_transform(a, t.rho, &t.v)?) <= 100.0 * tol;
        let mut w = t.v.clone();
        w[0] *= 1.05;
        let bad = row_dev(&similarity_transform(a, t.rho, &w)?) > 100.0 * tol;
        Ok((good && bad, String::new()))
    })()));

    checks.push(check("conversion_identity_on_probe_run", (|| {
        let n = 10.min(cfg.horizon);
        let ta = iterate_float(a, &probe, n, &FloatOpts::default())?;
        let converted = ecomat::stability::convert(&ta, &t, ecomat::stability::Direction::AToP)?;
        let mu0: Vec<f64> = probe.iter().zip(&t.v).map(|(x, v)| x * v).collect();
        let tp = iterate_chain(&chain, &mu0, n, &FloatOpts::default())?;
        let steps = ta.len().min(tp.len());
        let mut worst: f64 = 0.0;
        for k in 0..steps {
            let lhs = tp.step_f64(k);
            let rhs = converted.step_f64(k);
            let scale = lhs.iter().fold(1e-30f64, |acc, &v| acc.max(v.abs()));
            for j in 0..d {
                worst = worst.max((lhs[j] - rhs[j]).abs() / scale);
            }
        }
        Ok((worst <= 1e-10, format!("relative deviation {worst:e}")))
    })()));

    checks.push(check("trajectory_steps_solve_the_system", (|| {
        let traj = iterate_float(a, &probe, 10.min(cfg.horizon), &FloatOpts::default())?;
        let r = ecomat::stability::residual_of(&traj);
        Ok((r <= 1e-10, format!("relative residual {r:e}")))
    })()));

    checks.push(check("collapse_indices_match_across_spaces", (|| {
        let x0: Vec<Rational> = probe
            .iter()
            .map(|&c| ecomat::numeric::rational_from_f64(c))
            .collect::<Result<_, _>>()?;
        let same = equivalence_check(a, &t, &x0, cfg.horizon.min(300), &NumericMode::Rational)?;
        Ok((same, String::new()))
    })()));

    checks.push(check("quasi_symmetrization_preserves_rho", (|| {
        let (_, a_hat) = quasi_symmetrize(a)?;
        let rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| a_hat[(i, j)]).collect()).collect();
        let hat = StructureMatrix::from_f64_rows_default_labels(&rows)?;
        let (rho_hat, _) = power_eigenpair(&hat, Side::Right, &solver_cfg)?;
        Ok(((rho_hat - t.rho).abs() <= 1e-10 * t.rho, format!("gap {:e}", (rho_hat - t.rho).abs())))
    })()));

    checks.push(check("smoothing_preserves_rho", (|| {
        let b = smooth_transform(a, &probe)?;
        let rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| b[(i, j)]).collect()).collect();
        let sm = StructureMatrix::from_f64_rows_default_labels(&rows)?;
        let (rho_sm, _) = power_eigenpair(&sm, Side::Right, &solver_cfg)?;
        Ok(((rho_sm - t.rho).abs() <= 1e-10 * t.rho, format!("gap {:e}", (rho_sm - t.rho).abs())))
    })()));

    checks.push(check("consumption_blend_keeps_eigenvectors", (|| {
        let alpha = 0.3;
        let a_alpha = chen_alpha_matrix(a, alpha)?;
        let t_alpha = eigentriple(&a_alpha, &solver_cfg)?;
        let rho_ok = (t_alpha.rho - ((1.0 - alpha) * t.rho + alpha)).abs() <= 1e-12;
        let vec_ok = (0..d).all(|k| {
            (t_alpha.u[k] - t.u[k]).abs() <= 1e-8 * t.u[k]
                && (t_alpha.v[k] - t.v[k]).abs() <= 1e-8 * t.v[k]
        });
        Ok((rho_ok && vec_ok, String::new()))
    })()));

    checks.push(check("optimization_keeps_chain_invariant", (|| {
        let target: Vec<f64> = t.u.iter().zip(&probe).map(|(u, p)| u * p).collect();
        let result = optimize_structure(a, &t, &target)?;
        let dev = invariance_deviation(a, &result, &t)?;
        Ok((dev <= 1e-10, format!("deviation {dev:e}")))
    })()));

    let all_pass = checks.iter().all(|c| c.pass);
    let checks_json: Vec<Value> = checks
        .iter()
        .map(|c| json!({ "name": c.name, "pass": c.pass, "detail": c.detail }))
        .collect();
    Ok(CommandOutput {
        json: json!({ "checks": checks_json, "all_pass": all_pass }),
        exit: if all_pass { 0 } else { 8 },
    })
}
