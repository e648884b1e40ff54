//! Maximal eigenpair computation.
//!
//! Both solvers bracket the maximal eigenvalue with the Collatz-Wielandt
//! interval of the current iterate and stop once the interval is relatively
//! tight. The interval is an a-priori guarantee (`lower <= rho <= upper`
//! for every positive vector), which is why it is used instead of a
//! Rayleigh-quotient estimate: the latter can look converged while being
//! wrong for strongly non-symmetric matrices.
//!
//! The shifted inverse-power solver places its shift strictly above the
//! current upper bound. For an irreducible aperiodic matrix every other
//! eigenvalue has modulus strictly below `rho`, so `rho` is the eigenvalue
//! nearest to any real shift above it and the iteration cannot lock onto a
//! subdominant pair.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{is_irreducible, period, StructureMatrix};

/// Which eigenvector of the matrix is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Power,
    InversePower,
}

/// Optional similarity applied before iterating; the solution is mapped back.
#[derive(Debug, Clone, PartialEq)]
pub enum Preconditioning {
    None,
    /// Iterate on the quasi-symmetrized matrix.
    QuasiSymmetrize,
    /// Iterate on `D_w^{-1} A D_w`; with `w` close to the true right
    /// eigenvector the transformed eigenvector is nearly constant.
    SmoothWithGuess(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub solver: SolverKind,
    pub preconditioning: Preconditioning,
    /// Relative offset of the inverse-power shift above the C-W upper bound.
    pub shift_margin: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-12,
            max_iterations: 100_000,
            solver: SolverKind::Power,
            preconditioning: Preconditioning::None,
            shift_margin: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Domain("solver tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Domain("max_iterations must be at least 1".into()));
        }
        if !(self.shift_margin > 0.0) {
            return Err(Error::Domain("shift_margin must be positive".into()));
        }
        if let Preconditioning::SmoothWithGuess(w) = &self.preconditioning {
            if w.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
                return Err(Error::Domain("smoothing guess must be strictly positive".into()));
            }
        }
        Ok(())
    }
}

/// The three major characteristics of a structure matrix: maximal
/// eigenvalue `rho` with its positive left (`u`) and right (`v`)
/// eigenvectors.
///
/// Normalization is fixed once for the whole crate: the components of `v`
/// sum to the dimension, and `u . v = 1`. With this choice `u (.) v` is
/// already a probability vector, which the Markov-chain transform relies on.
#[derive(Debug, Clone, Serialize)]
pub struct EigenTriple {
    pub rho: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Relative residual actually achieved, `max(|uA - rho u|, |Av - rho v|)
    /// / (rho |.|)` in the sup norm.
    pub residual: f64,
    /// Tolerance the triple was computed at; downstream consistency checks
    /// compare against this.
    pub tolerance: f64,
}

impl EigenTriple {
    /// Recomputes the relative residual of this triple against a matrix.
    pub fn verify(&self, a: &StructureMatrix) -> f64 {
        let m = a.to_f64();
        let d = a.dim();
        if self.u.len() != d || self.v.len() != d {
            return f64::INFINITY;
        }
        let u = DVector::from_column_slice(&self.u);
        let v = DVector::from_column_slice(&self.v);
        let left = (m.transpose() * &u - self.rho * &u).amax() / (self.rho * u.amax());
        let right = (&m * &v - self.rho * &v).amax() / (self.rho * v.amax());
        left.max(right)
    }

    /// Componentwise product `u (.) v`, the equilibrium of the transformed
    /// chain.
    pub fn mu(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(a, b)| a * b).collect()
    }
}

fn require_primitive(a: &StructureMatrix) -> Result<()> {
    if !is_irreducible(a) {
        return Err(Error::Structural("matrix is reducible".into()));
    }
    if period(a)? != 1 {
        return Err(Error::Structural("matrix is periodic".into()));
    }
    Ok(())
}

struct Bracket {
    lower: f64,
    upper: f64,
}

/// One C-W evaluation: ratios of `Bx` against `x`.
fn bracket_of(b: &DMatrix<f64>, x: &DVector<f64>) -> (Bracket, DVector<f64>) {
    let y = b * x;
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for i in 0..x.len() {
        let r = y[i] / x[i];
        lower = lower.min(r);
        upper = upper.max(r);
    }
    (Bracket { lower, upper }, y)
}

fn rescale(mut x: DVector<f64>) -> DVector<f64> {
    let d = x.len() as f64;
    let s = x.sum();
    x *= d / s;
    x
}

fn power_solve(
    b: &DMatrix<f64>,
    start: DVector<f64>,
    tolerance: f64,
    max_iterations: usize,
) -> Result<(f64, DVector<f64>)> {
    let mut x = rescale(start);
    let mut last = Bracket { lower: 0.0, upper: f64::INFINITY };
    for _ in 0..max_iterations {
        let (bracket, y) = bracket_of(b, &x);
        if bracket.upper - bracket.lower < tolerance * bracket.lower {
            return Ok((0.5 * (bracket.lower + bracket.upper), x));
        }
        last = bracket;
        x = rescale(y);
    }
    Err(Error::Convergence {
        lower: last.lower,
        upper: last.upper,
        iterations: max_iterations,
    })
}

fn inverse_power_solve(
    b: &DMatrix<f64>,
    start: DVector<f64>,
    tolerance: f64,
    max_iterations: usize,
    shift_margin: f64,
) -> Result<(f64, DVector<f64>)> {
    let d = b.nrows();
    let mut x = rescale(start);
    let mut bracket = bracket_of(b, &x).0;
    for _ in 0..max_iterations {
        if bracket.upper - bracket.lower < tolerance * bracket.lower {
            return Ok((0.5 * (bracket.lower + bracket.upper), x));
        }
        let width = bracket.upper - bracket.lower;
        let mut solved = None;
        for retry in 0..3u32 {
            let shift =
                bracket.upper + shift_margin * width.max(bracket.upper * 1e-15) * f64::powi(2.0, retry as i32);
            let shifted = DMatrix::identity(d, d) * shift - b;
            if let Some(y) = shifted.lu().solve(&x) {
                // a clean solve against a shift above rho keeps the iterate
                // positive; anything else means the system was effectively
                // singular, so widen the shift and try again
                if y.iter().all(|&c| c.is_finite() && c > 0.0) {
                    solved = Some(y);
                    break;
                }
            }
        }
        let y = solved.ok_or_else(|| {
            Error::Numeric("shifted system singular after 3 enlarged-margin retries".into())
        })?;
        x = rescale(y);
        bracket = bracket_of(b, &x).0;
    }
    Err(Error::Convergence {
        lower: bracket.lower,
        upper: bracket.upper,
        iterations: max_iterations,
    })
}

fn solve_dense(
    b: &DMatrix<f64>,
    start: DVector<f64>,
    cfg: &SolverConfig,
    tolerance: f64,
) -> Result<(f64, DVector<f64>)> {
    match cfg.solver {
        SolverKind::Power => power_solve(b, start, tolerance, cfg.max_iterations),
        SolverKind::InversePower => {
            inverse_power_solve(b, start, tolerance, cfg.max_iterations, cfg.shift_margin)
        }
    }
}

/// Power iteration with per-step rescaling and the C-W stopping rule.
/// Returns the interval midpoint and the final normalized iterate
/// (components summing to the dimension).
pub fn power_eigenpair(
    a: &StructureMatrix,
    side: Side,
    cfg: &SolverConfig,
) -> Result<(f64, Vec<f64>)> {
    cfg.validate()?;
    require_primitive(a)?;
    let b = oriented(a, side);
    let start = DVector::from_element(a.dim(), 1.0);
    let (rho, x) = power_solve(&b, start, cfg.tolerance, cfg.max_iterations)?;
    Ok((rho, x.iter().copied().collect()))
}

/// Shifted inverse-power iteration with the same contract as
/// [`power_eigenpair`]; the shift is re-derived from the current C-W
/// interval at every step.
pub fn inverse_power_eigenpair(
    a: &StructureMatrix,
    side: Side,
    cfg: &SolverConfig,
) -> Result<(f64, Vec<f64>)> {
    cfg.validate()?;
    require_primitive(a)?;
    let b = oriented(a, side);
    let start = DVector::from_element(a.dim(), 1.0);
    let (rho, x) = inverse_power_solve(&b, start, cfg.tolerance, cfg.max_iterations, cfg.shift_margin)?;
    Ok((rho, x.iter().copied().collect()))
}

fn oriented(a: &StructureMatrix, side: Side) -> DMatrix<f64> {
    match side {
        Side::Right => a.to_f64(),
        Side::Left => a.to_f64().transpose(),
    }
}

/// Computes the full triple `(rho, u, v)` under the crate normalization,
/// verifying the achieved residual against the configured tolerance.
pub fn eigentriple(a: &StructureMatrix, cfg: &SolverConfig) -> Result<EigenTriple> {
    cfg.validate()?;
    require_primitive(a)?;
    let d = a.dim();
    let m = a.to_f64();
    // solvers run at half the advertised tolerance so the final residual
    // stays below it even after combining the two sides
    let inner_tol = 0.5 * cfg.tolerance;

    // preconditioned iteration matrix plus the map back to eigenvectors of A
    type Unmap = Box<dyn Fn(DVector<f64>) -> DVector<f64>>;
    let (b_right, unmap_right, unmap_left): (DMatrix<f64>, Unmap, Unmap) =
        match &cfg.preconditioning {
        Preconditioning::None => (m.clone(), Box::new(|x| x), Box::new(|x| x)),
        Preconditioning::QuasiSymmetrize => {
            let (mu, a_hat) = quasi_symmetrize(a)?;
            let sqrt_mu: Vec<f64> = mu.iter().map(|&c| c.sqrt()).collect();
            let sm_r = sqrt_mu.clone();
            let sm_l = sqrt_mu;
            (
                a_hat,
                Box::new(move |x: DVector<f64>| {
                    DVector::from_iterator(x.len(), x.iter().zip(&sm_r).map(|(c, s)| c / s))
                }),
                Box::new(move |x: DVector<f64>| {
                    DVector::from_iterator(x.len(), x.iter().zip(&sm_l).map(|(c, s)| c * s))
                }),
            )
        }
        Preconditioning::SmoothWithGuess(w) => {
            if w.len() != d {
                return Err(Error::Domain("smoothing guess has wrong dimension".into()));
            }
            let b = smooth_transform(a, w)?;
            let w_r = w.clone();
            let w_l = w.clone();
            (
                b,
                Box::new(move |x: DVector<f64>| {
                    DVector::from_iterator(x.len(), x.iter().zip(&w_r).map(|(c, s)| c * s))
                }),
                Box::new(move |x: DVector<f64>| {
                    DVector::from_iterator(x.len(), x.iter().zip(&w_l).map(|(c, s)| c / s))
                }),
            )
        }
    };

    let ones = DVector::from_element(d, 1.0);
    let (_, raw_v) = solve_dense(&b_right, ones.clone(), cfg, inner_tol)?;
    let (_, raw_u) = solve_dense(&b_right.transpose(), ones, cfg, inner_tol)?;

    // map back to A's eigenvectors, then polish on A itself so the residual
    // guarantee refers to the original matrix even after preconditioning
    let v0 = unmap_right(raw_v);
    let u0 = unmap_left(raw_u);
    let (rho_v, v) = solve_dense(&m, v0, cfg, inner_tol)?;
    let (rho_u, u) = solve_dense(&m.transpose(), u0, cfg, inner_tol)?;
    let rho = 0.5 * (rho_v + rho_u);

    // normalization: sum(v) = d, u.v = 1
    let v = rescale(v);
    let uv: f64 = u.dot(&v);
    let u = u / uv;

    if u.iter().chain(v.iter()).any(|&c| !(c > 0.0)) {
        return Err(Error::Numeric("eigenvector lost positivity".into()));
    }
    let triple = EigenTriple {
        rho,
        u: u.iter().copied().collect(),
        v: v.iter().copied().collect(),
        residual: 0.0,
        tolerance: cfg.tolerance,
    };
    let residual = triple.verify(a);
    if !(residual <= cfg.tolerance) {
        return Err(Error::Numeric(format!(
            "achieved residual {residual:e} above tolerance {:e}",
            cfg.tolerance
        )));
    }
    Ok(EigenTriple { residual, ..triple })
}

/// Quasi-symmetrization: solves `mu Q = 0` for the row-balance matrix
/// `Q = A - D_{A 1}` (unique positive solution with `mu_1 = 1` under
/// irreducibility) and returns `mu` together with
/// `A_hat = D_{mu^{1/2}} A D_{mu^{-1/2}}`.
///
/// `A_hat` is similar to `A`, so the spectra coincide; it is symmetric
/// exactly when `A` is symmetrizable with respect to `mu`.
pub fn quasi_symmetrize(a: &StructureMatrix) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if !is_irreducible(a) {
        return Err(Error::Structural("quasi-symmetrization needs an irreducible matrix".into()));
    }
    let d = a.dim();
    let m = a.to_f64();
    // Q = A - diag(row sums); mu Q = 0 with mu_1 = 1. Replacing the first
    // column of Q by e_1 makes the system square and regular.
    let mut system = DMatrix::zeros(d, d);
    for i in 0..d {
        let row_sum: f64 = (0..d).map(|j| m[(i, j)]).sum();
        for j in 0..d {
            let q = m[(i, j)] - if i == j { row_sum } else { 0.0 };
            system[(i, j)] = q;
        }
    }
    for i in 0..d {
        system[(i, 0)] = if i == 0 { 1.0 } else { 0.0 };
    }
    let mut rhs = DVector::zeros(d);
    rhs[0] = 1.0;
    let mu = system
        .transpose()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("balance system is singular".into()))?;
    if mu.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::Numeric("balance vector lost positivity".into()));
    }
    let a_hat = DMatrix::from_fn(d, d, |i, j| (mu[i] / mu[j]).sqrt() * m[(i, j)]);
    Ok((mu.iter().copied().collect(), a_hat))
}

/// Whether `mu_i a_ij = mu_j a_ji` for all pairs, within `tol` relative to
/// the largest weighted entry.
pub fn is_symmetrizable(a: &StructureMatrix, mu: &[f64], tol: f64) -> bool {
    let d = a.dim();
    if mu.len() != d {
        return false;
    }
    let m = a.to_f64();
    let mut scale: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            scale = scale.max((mu[i] * m[(i, j)]).abs());
        }
    }
    if scale == 0.0 {
        return true;
    }
    for i in 0..d {
        for j in (i + 1)..d {
            if (mu[i] * m[(i, j)] - mu[j] * m[(j, i)]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// Eigenvector smoothing transform `A_w = D_w^{-1} A D_w`. The spectral
/// radius is unchanged and the maximal right-eigenvector becomes
/// `w^{-1} (.) v`, so a good guess `w ~ v` flattens it toward a constant.
pub fn smooth_transform(a: &StructureMatrix, w: &[f64]) -> Result<DMatrix<f64>> {
    let d = a.dim();
    if w.len() != d {
        return Err(Error::Domain("smoothing vector has wrong dimension".into()));
    }
    if w.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
        return Err(Error::Domain("smoothing vector must be strictly positive".into()));
    }
    let m = a.to_f64();
    Ok(DMatrix::from_fn(d, d, |i, j| m[(i, j)] * w[j] / w[i]))
}
