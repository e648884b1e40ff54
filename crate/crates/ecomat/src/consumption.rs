//! Consumption-augmented models and growth-rate forecasting.
//!
//! Three historical model variants are provided for comparison (the
//! inverse-matrix model, the bounded-ratio model, and the blended model
//! `A_alpha = (1-alpha) A + alpha I`), plus the algebra connecting the
//! consumption parameter `alpha`, the consumption multiple
//! `gamma = alpha / (1 - alpha)` and the growth rate `delta`. A spectral
//! radius at or above one makes every conversion here meaningless and is
//! reported as a model error.

use nalgebra::{DMatrix, DVector};
use num::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::StructureMatrix;
use crate::numeric::{rational_from_f64, Rational};
use crate::transform::TransitionChain;

/// Consistent bundle of consumption parameter, multiple and growth rate
/// for a given spectral radius.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConsumptionPlan {
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
    pub rho_a: f64,
    pub rho_alpha: f64,
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain("spectral radius must be positive".into()));
    }
    if rho >= 1.0 {
        return Err(Error::Model(format!(
            "spectral radius {rho} >= 1: no positive growth rate exists for this system"
        )));
    }
    Ok(())
}

fn delta_upper(rho: f64) -> f64 {
    (1.0 / rho - 1.0).min(1.0)
}

impl ConsumptionPlan {
    pub fn from_alpha(alpha: f64, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::Domain(format!("alpha {alpha} outside [0, 1)")));
        }
        let rho_alpha = (1.0 - alpha) * rho + alpha;
        Ok(ConsumptionPlan {
            alpha,
            gamma: alpha / (1.0 - alpha),
            delta: 1.0 / rho_alpha - 1.0,
            rho_a: rho,
            rho_alpha,
        })
    }

    pub fn from_delta(delta: f64, rho: f64) -> Result<Self> {
        let alpha = alpha_from_delta(delta, rho)?;
        Self::from_alpha(alpha, rho)
    }
}

/// Blended consumption matrix `A_alpha = (1 - alpha) A + alpha I`, built in
/// exact arithmetic so rational-mode iterations stay exact. Its spectral
/// radius is `(1 - alpha) rho + alpha` and its maximal eigenvectors are
/// those of `A`.
pub fn chen_alpha_matrix(a: &StructureMatrix, alpha: f64) -> Result<StructureMatrix> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha {alpha} outside [0, 1)")));
    }
    let alpha_r = rational_from_f64(alpha)?;
    let keep = Rational::one() - &alpha_r;
    let rows: Vec<Vec<Rational>> = (0..a.dim())
        .map(|i| {
            (0..a.dim())
                .map(|j| {
                    let mut e = &keep * a.entry(i, j);
                    if i == j {
                        e += &alpha_r;
                    }
                    e
                })
                .collect()
        })
        .collect();
    StructureMatrix::from_rational_rows(a.labels().to_vec(), rows)
}

/// Bounded-ratio consumption matrix `A_gamma = (A + gamma I) / (1 + gamma)`
/// with `rho(A_gamma) = (rho + gamma) / (1 + gamma)`.
pub fn hua_gamma_matrix(a: &StructureMatrix, gamma: f64) -> Result<StructureMatrix> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("gamma {gamma} must be positive")));
    }
    let gamma_r = rational_from_f64(gamma)?;
    let denom = Rational::one() + &gamma_r;
    let rows: Vec<Vec<Rational>> = (0..a.dim())
        .map(|i| {
            (0..a.dim())
                .map(|j| {
                    let mut e = a.entry(i, j).clone();
                    if i == j {
                        e += &gamma_r;
                    }
                    e / &denom
                })
                .collect()
        })
        .collect();
    StructureMatrix::from_rational_rows(a.labels().to_vec(), rows)
}

/// Growth rate of the bounded-ratio model, `(1 - rho) / (gamma + rho)`.
/// Stays strictly positive as `gamma` approaches one, which is the model's
/// known flaw: consumption can never absorb all growth.
pub fn hua_gamma_growth_rate(gamma: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma {gamma} must be positive")));
    }
    Ok((1.0 - rho) / (gamma + rho))
}

/// The inverse-matrix consumption model `B = (1 - alpha) A^{-1} + alpha I`,
/// returned together with its growth rate `(1 - alpha) / rho + alpha - 1`.
/// `B` is generally not nonnegative, which is why the model was abandoned;
/// it is exposed for comparison, not for the pipeline.
pub fn hua_inverse_model(
    a: &StructureMatrix,
    alpha: f64,
    rho: f64,
) -> Result<(DMatrix<f64>, f64)> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {alpha} outside (0, 1)")));
    }
    if !(rho > 0.0) {
        return Err(Error::Domain("spectral radius must be positive".into()));
    }
    let inv = a
        .to_f64()
        .try_inverse()
        .ok_or_else(|| Error::Model("singular structure matrix has no inverse model".into()))?;
    let d = a.dim();
    let b = DMatrix::from_fn(d, d, |i, j| {
        (1.0 - alpha) * inv[(i, j)] + if i == j { alpha } else { 0.0 }
    });
    let growth = (1.0 - alpha) / rho + alpha - 1.0;
    Ok((b, growth))
}

/// Chain-side counterpart of [`chen_alpha_matrix`]:
/// `P_alpha = (1 - beta) P + beta I` with `beta = alpha / rho(A_alpha)`.
/// Shares the equilibrium and the constant right-eigenvector with `P`.
pub fn transformed_alpha_chain(
    p: &TransitionChain,
    alpha: f64,
    rho_a: f64,
) -> Result<TransitionChain> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha {alpha} outside [0, 1)")));
    }
    if (rho_a - p.source_rho()).abs() > 1e-9 * p.source_rho() {
        return Err(Error::Domain(format!(
            "rho {rho_a} does not match the chain's source rho {}",
            p.source_rho()
        )));
    }
    let rho_alpha = (1.0 - alpha) * rho_a + alpha;
    let beta = alpha / rho_alpha;
    let d = p.dim();
    let blended = DMatrix::from_fn(d, d, |i, j| {
        (1.0 - beta) * p.matrix()[(i, j)] + if i == j { beta } else { 0.0 }
    });
    Ok(p.with_blend(blended, rho_alpha))
}

/// Consumption parameter for a target growth rate:
/// `alpha(delta) = ((1 + delta)^{-1} - rho) / (1 - rho)`.
pub fn alpha_from_delta(delta: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    check_delta(delta, rho)?;
    Ok((1.0 / (1.0 + delta) - rho) / (1.0 - rho))
}

/// Growth rate implied by a consumption parameter:
/// `delta(alpha) = 1 / ((1 - alpha) rho + alpha) - 1`.
pub fn delta_from_alpha(alpha: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha {alpha} outside [0, 1)")));
    }
    Ok(1.0 / ((1.0 - alpha) * rho + alpha) - 1.0)
}

/// Consumption multiple for a target growth rate:
/// `gamma(delta) = ((1 + delta)^{-1} - rho) / (1 - (1 + delta)^{-1})`.
pub fn gamma_from_delta(delta: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    check_delta(delta, rho)?;
    let inv = 1.0 / (1.0 + delta);
    Ok((inv - rho) / (1.0 - inv))
}

fn check_delta(delta: f64, rho: f64) -> Result<()> {
    let upper = delta_upper(rho);
    if !(delta > 0.0 && delta < upper) {
        return Err(Error::Domain(format!(
            "growth rate {delta} outside (0, {upper})"
        )));
    }
    Ok(())
}

/// Available consumption implied by two consecutive outputs:
/// `xi_n = ((1 - (1 + delta) rho) / delta) (x_{n+1} - x_n)`, whose
/// coefficient equals `gamma(delta)`.
pub fn available_consumption(
    x_n: &[f64],
    x_n1: &[f64],
    delta: f64,
    rho: f64,
) -> Result<Vec<f64>> {
    check_rho(rho)?;
    check_delta(delta, rho)?;
    if x_n.len() != x_n1.len() {
        return Err(Error::Domain("output vectors differ in dimension".into()));
    }
    let coeff = (1.0 - (1.0 + delta) * rho) / delta;
    Ok(x_n.iter().zip(x_n1).map(|(a, b)| coeff * (b - a)).collect())
}

/// Outcome of the maximal-consumption search.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Feasibility {
    Feasible { alpha_bar: f64, delta: f64 },
    Infeasible,
}

#[derive(Debug, Clone, Copy)]
pub struct FeasibilityOpts {
    pub bisection_tolerance: f64,
    /// Largest alpha probed; the available consumption stays bounded as
    /// alpha approaches one, so anything unreachable below the cap is
    /// infeasible outright.
    pub alpha_cap: f64,
    /// Slack for the defensive monotonicity check on the bisection bracket.
    pub monotonicity_slack: f64,
}

impl Default for FeasibilityOpts {
    fn default() -> Self {
        FeasibilityOpts {
            bisection_tolerance: 1e-12,
            alpha_cap: 1.0 - 1e-12,
            monotonicity_slack: 1e-9,
        }
    }
}

/// Smallest consumption parameter whose available consumption covers the
/// plan componentwise, found by bisection over `alpha`.
///
/// The underlying monotonicity of `xi_n(alpha)` is a model property, not an
/// arithmetic one (the next-year output itself depends on `alpha`), so the
/// bracket is re-verified at every step and the search aborts with a
/// diagnostic if it fails numerically.
pub fn max_feasible_alpha(
    planned: &[f64],
    x_n: &[f64],
    a: &StructureMatrix,
    rho: f64,
    opts: &FeasibilityOpts,
) -> Result<Feasibility> {
    check_rho(rho)?;
    let d = a.dim();
    if planned.len() != d || x_n.len() != d {
        return Err(Error::Domain("vector dimension does not match the matrix".into()));
    }
    if planned.iter().any(|&c| c < 0.0 || !c.is_finite()) {
        return Err(Error::Domain("planned consumption must be nonnegative".into()));
    }
    if x_n.iter().any(|&c| !c.is_finite()) {
        return Err(Error::Domain("current output must be finite".into()));
    }
    if planned.iter().all(|&c| c == 0.0) {
        // the infimum over the whole interval
        return Ok(Feasibility::Feasible { alpha_bar: 0.0, delta: 1.0 / rho - 1.0 });
    }

    let m = a.to_f64();
    let xi = |alpha: f64| -> Result<Vec<f64>> {
        let blended = DMatrix::from_fn(d, d, |i, j| {
            (1.0 - alpha) * m[(i, j)] + if i == j { alpha } else { 0.0 }
        });
        let next = blended
            .transpose()
            .lu()
            .solve(&DVector::from_column_slice(x_n))
            .ok_or_else(|| {
                Error::Model(format!("consumption matrix is singular at alpha = {alpha}"))
            })?;
        let gamma = alpha / (1.0 - alpha);
        Ok(x_n
            .iter()
            .zip(next.iter())
            .map(|(cur, nxt)| gamma * (nxt - cur))
            .collect())
    };
    let feasible = |xi: &[f64]| xi.iter().zip(planned).all(|(have, want)| have >= want);

    let mut hi = opts.alpha_cap;
    let mut xi_hi = xi(hi)?;
    if !feasible(&xi_hi) {
        return Ok(Feasibility::Infeasible);
    }
    let mut lo = 0.0;
    let mut xi_lo = vec![0.0; d];
    while hi - lo > opts.bisection_tolerance {
        let mid = 0.5 * (lo + hi);
        let xi_mid = xi(mid)?;
        let scale = xi_lo
            .iter()
            .chain(&xi_mid)
            .chain(&xi_hi)
            .fold(1.0f64, |acc, &c| acc.max(c.abs()));
        let ordered = xi_lo
            .iter()
            .zip(&xi_mid)
            .zip(&xi_hi)
            .all(|((l, m), h)| {
                *m >= l - opts.monotonicity_slack * scale && *m <= h + opts.monotonicity_slack * scale
            });
        if !ordered {
            return Err(Error::Numeric(format!(
                "available consumption is not monotone near alpha = {mid}; \
                 the current output is too far from an equilibrium path"
            )));
        }
        if feasible(&xi_mid) {
            hi = mid;
            xi_hi = xi_mid;
        } else {
            lo = mid;
            xi_lo = xi_mid;
        }
    }
    let delta = delta_from_alpha(hi, rho)?;
    Ok(Feasibility::Feasible { alpha_bar: hi, delta })
}
