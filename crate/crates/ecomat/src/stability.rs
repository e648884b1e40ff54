//! Idealized input-output iteration and collapse detection.
//!
//! The forward step solves `x_{k+1} M = x_k` (never forms `M^{-1}`); the
//! factorization of `M` is computed once per trajectory. Exact rational
//! arithmetic is the reference mode here: the classic two-product
//! experiments are decimal-exact and their collapse times are arithmetic
//! facts, while double precision can shift a collapse by a step. Chain
//! trajectories run in doubles, since the transform vector is irrational
//! anyway.

use nalgebra::DVector;
use num::Zero;
use serde::Serialize;

use crate::eigen::EigenTriple;
use crate::error::{Error, Result};
use crate::matrix::StructureMatrix;
use crate::numeric::{rational_to_f64, NumericMode, Rational, RationalLu};
use crate::transform::TransitionChain;

/// Which iteration the trajectory belongs to: the structure matrix itself
/// or its transformed chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Structure,
    Chain,
}

#[derive(Debug, Clone)]
pub enum Steps {
    Exact(Vec<Vec<Rational>>),
    Float(Vec<Vec<f64>>),
}

impl Steps {
    pub fn len(&self) -> usize {
        match self {
            Steps::Exact(s) => s.len(),
            Steps::Float(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Iterated sequence `x_0, x_1, ..., x_N` with the matrix it was iterated
/// under.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub steps: Steps,
    pub space: Space,
    pub matrix: StructureMatrix,
    pub mode: NumericMode,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn labels(&self) -> &[String] {
        self.matrix.labels()
    }

    pub fn step_f64(&self, k: usize) -> Vec<f64> {
        match &self.steps {
            Steps::Exact(s) => s[k].iter().map(rational_to_f64).collect(),
            Steps::Float(s) => s[k].clone(),
        }
    }

    pub fn steps_f64(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|k| self.step_f64(k)).collect()
    }
}

/// Settings for the double-precision solve path.
#[derive(Debug, Clone, Copy)]
pub struct FloatOpts {
    /// A pivot smaller than this, relative to the largest pivot, declares
    /// the matrix singular.
    pub pivot_floor: f64,
}

impl Default for FloatOpts {
    fn default() -> Self {
        FloatOpts { pivot_floor: 1e-12 }
    }
}

/// Exact-arithmetic iteration from a rational initial vector; stops at
/// `n_max` steps or at the first step with a negative component.
pub fn iterate_exact(m: &StructureMatrix, x0: &[Rational], n_max: usize) -> Result<Trajectory> {
    iterate_exact_in(m, x0, n_max, Space::Structure)
}

fn iterate_exact_in(
    m: &StructureMatrix,
    x0: &[Rational],
    n_max: usize,
    space: Space,
) -> Result<Trajectory> {
    let d = m.dim();
    if x0.len() != d {
        return Err(Error::Domain(format!(
            "initial vector has {} components, matrix is {d}x{d}",
            x0.len()
        )));
    }
    // x_{k+1} M = x_k  <=>  M^T x_{k+1}^T = x_k^T
    let lu = RationalLu::new(m.transpose().rows_rational()).map_err(|_| {
        Error::Model("singular structure matrix: the iteration is not determined".into())
    })?;
    let mut steps = vec![x0.to_vec()];
    let mut current = x0.to_vec();
    let zero = Rational::zero();
    for _ in 0..n_max {
        if current.iter().any(|c| c < &zero) {
            break;
        }
        current = lu.solve(&current);
        steps.push(current.clone());
    }
    Ok(Trajectory {
        steps: Steps::Exact(steps),
        space,
        matrix: m.clone(),
        mode: NumericMode::Rational,
    })
}

/// Double-precision iteration; same stopping rules as [`iterate_exact`],
/// plus an overflow guard.
pub fn iterate_float(
    m: &StructureMatrix,
    x0: &[f64],
    n_max: usize,
    opts: &FloatOpts,
) -> Result<Trajectory> {
    iterate_float_in(m, x0, n_max, opts, Space::Structure)
}

fn iterate_float_in(
    m: &StructureMatrix,
    x0: &[f64],
    n_max: usize,
    opts: &FloatOpts,
    space: Space,
) -> Result<Trajectory> {
    let d = m.dim();
    if x0.len() != d {
        return Err(Error::Domain(format!(
            "initial vector has {} components, matrix is {d}x{d}",
            x0.len()
        )));
    }
    if x0.iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain("initial vector must be finite".into()));
    }
    let lu = m.to_f64().transpose().lu();
    let diag = lu.u().diagonal();
    let max_pivot = diag.amax();
    if !(max_pivot > 0.0) || diag.iter().any(|&p| p.abs() <= opts.pivot_floor * max_pivot) {
        return Err(Error::Model(
            "singular structure matrix: the iteration is not determined".into(),
        ));
    }
    let mut steps = vec![x0.to_vec()];
    let mut current = DVector::from_column_slice(x0);
    for k in 0..n_max {
        if steps[k].iter().any(|&c| c < 0.0) {
            break;
        }
        current = lu
            .solve(&current)
            .ok_or_else(|| Error::Model("linear solve failed".into()))?;
        if current.iter().any(|c| !c.is_finite()) {
            return Err(Error::Overflow {
                step: k + 1,
                last_valid: steps[k].clone(),
            });
        }
        steps.push(current.iter().copied().collect());
    }
    Ok(Trajectory {
        steps: Steps::Float(steps),
        space,
        matrix: m.clone(),
        mode: NumericMode::float_default(),
    })
}

/// Iterates the transformed chain from a chain-space initial vector.
pub fn iterate_chain(
    chain: &TransitionChain,
    mu0: &[f64],
    n_max: usize,
    opts: &FloatOpts,
) -> Result<Trajectory> {
    iterate_float_in(&chain.as_structure_matrix(), mu0, n_max, opts, Space::Chain)
}

/// Crisis-window settings for [`collapse_report`].
#[derive(Debug, Clone, Copy)]
pub struct CrisisConfig {
    /// Spectral radius of the iterated matrix; without it no crisis window
    /// is computed (the window compares growth ratios against `1/rho`).
    pub rho: Option<f64>,
    /// Relative deviation of a componentwise growth ratio from `1/rho`
    /// beyond which a step counts as part of the crisis.
    pub threshold: f64,
}

impl Default for CrisisConfig {
    fn default() -> Self {
        CrisisConfig { rho: None, threshold: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TerminalMagnitudes {
    pub max: f64,
    pub min: f64,
}

/// Collapse time, collapse product, crisis window and terminal magnitudes
/// extracted from a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// First step at which some component turns negative; `None` when the
    /// horizon was reached first (which never certifies stability).
    pub collapse_time: Option<usize>,
    /// Index of the first negative component at the collapse step, lowest
    /// index on ties.
    pub collapse_product: Option<usize>,
    /// Maximal final run of steps before the collapse whose growth ratios
    /// deviate from `1/rho`; ends at `collapse_time - 1` when present.
    pub crisis_window: Option<(usize, usize)>,
    pub terminal_magnitudes: TerminalMagnitudes,
}

fn first_negative(steps: &Steps) -> Option<(usize, usize)> {
    match steps {
        Steps::Exact(s) => {
            let zero = Rational::zero();
            s.iter().enumerate().find_map(|(n, step)| {
                step.iter().position(|c| c < &zero).map(|k| (n, k))
            })
        }
        Steps::Float(s) => s.iter().enumerate().find_map(|(n, step)| {
            step.iter().position(|&c| c < 0.0).map(|k| (n, k))
        }),
    }
}

pub fn collapse_report(t: &Trajectory, cfg: &CrisisConfig) -> StabilityReport {
    let collapse = first_negative(&t.steps);
    let last = t.step_f64(t.len() - 1);
    let terminal = TerminalMagnitudes {
        max: last.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min: last.iter().copied().fold(f64::INFINITY, f64::min),
    };
    let crisis_window = match (collapse, cfg.rho) {
        (Some((time, _)), Some(rho)) if time >= 2 => {
            let deviant = |n: usize| -> bool {
                let prev = t.step_f64(n - 1);
                let curr = t.step_f64(n);
                prev.iter().zip(&curr).any(|(&p, &c)| {
                    let r = c / p * rho;
                    !r.is_finite() || (r - 1.0).abs() > cfg.threshold
                })
            };
            let end = time - 1;
            if deviant(end) {
                let mut start = end;
                while start > 1 && deviant(start - 1) {
                    start -= 1;
                }
                Some((start, end))
            } else {
                None
            }
        }
        _ => None,
    };
    StabilityReport {
        collapse_time: collapse.map(|(n, _)| n),
        collapse_product: collapse.map(|(_, k)| k),
        crisis_window,
        terminal_magnitudes: terminal,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    AToP,
    PToA,
}

/// Converts a trajectory between the structure space and the chain space
/// using `mu_n = rho^n (x_n (.) v)` and its inverse
/// `x_n = rho^{-n} (mu_n (.) v^{-1})`. Both factors are positive, so the
/// (step, component) of the first sign change is preserved exactly.
pub fn convert(t: &Trajectory, triple: &EigenTriple, direction: Direction) -> Result<Trajectory> {
    let d = t.dim();
    if triple.v.len() != d {
        return Err(Error::Domain("triple dimension does not match trajectory".into()));
    }
    match (direction, t.space) {
        (Direction::AToP, Space::Structure) | (Direction::PToA, Space::Chain) => {}
        _ => {
            return Err(Error::Domain(
                "conversion direction does not match the trajectory space".into(),
            ))
        }
    }
    let (target_matrix, target_space) = match direction {
        Direction::AToP => {
            let r = triple.verify(&t.matrix);
            if !(r <= triple.tolerance) {
                return Err(Error::Domain(format!(
                    "triple is inconsistent with the iterated matrix: residual {r:e}"
                )));
            }
            let m = t.matrix.to_f64();
            let p: Vec<Vec<f64>> = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| m[(i, j)] * triple.v[j] / (triple.rho * triple.v[i]))
                        .collect()
                })
                .collect();
            (StructureMatrix::from_f64_rows(t.labels().to_vec(), &p)?, Space::Chain)
        }
        Direction::PToA => {
            let p = t.matrix.to_f64();
            let a: Vec<Vec<f64>> = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| triple.rho * triple.v[i] * p[(i, j)] / triple.v[j])
                        .collect()
                })
                .collect();
            let a = StructureMatrix::from_f64_rows(t.labels().to_vec(), &a)?;
            let r = triple.verify(&a);
            if !(r <= triple.tolerance) {
                return Err(Error::Domain(format!(
                    "triple is inconsistent with the iterated chain: residual {r:e}"
                )));
            }
            (a, Space::Structure)
        }
    };
    let steps: Vec<Vec<f64>> = (0..t.len())
        .map(|n| {
            let x = t.step_f64(n);
            let factor = triple.rho.powi(n as i32);
            match direction {
                Direction::AToP => x.iter().zip(&triple.v).map(|(c, v)| factor * c * v).collect(),
                Direction::PToA => x.iter().zip(&triple.v).map(|(c, v)| c / (factor * v)).collect(),
            }
        })
        .collect();
    Ok(Trajectory {
        steps: Steps::Float(steps),
        space: target_space,
        matrix: target_matrix,
        mode: NumericMode::float_default(),
    })
}

/// Runs the structure-space iteration from `x0` and the chain-space
/// iteration from `mu_0 = x0 (.) v`, and reports whether they collapse at
/// the same step and the same product (or both never collapse within the
/// horizon).
pub fn equivalence_check(
    a: &StructureMatrix,
    triple: &EigenTriple,
    x0: &[Rational],
    n_max: usize,
    mode: &NumericMode,
) -> Result<bool> {
    let a_traj = match mode {
        NumericMode::Rational => iterate_exact(a, x0, n_max)?,
        NumericMode::Float { .. } => {
            let x0_f: Vec<f64> = x0.iter().map(rational_to_f64).collect();
            iterate_float(a, &x0_f, n_max, &FloatOpts::default())?
        }
    };
    let chain = crate::transform::chen_transform(a, triple)?;
    let mu0: Vec<f64> = x0
        .iter()
        .map(rational_to_f64)
        .zip(&triple.v)
        .map(|(x, v)| x * v)
        .collect();
    let p_traj = iterate_chain(&chain, &mu0, n_max, &FloatOpts::default())?;
    let cfg = CrisisConfig::default();
    let ra = collapse_report(&a_traj, &cfg);
    let rp = collapse_report(&p_traj, &cfg);
    Ok(ra.collapse_time == rp.collapse_time && ra.collapse_product == rp.collapse_product)
}

/// A trajectory step must satisfy `x_{k+1} M = x_k`; largest relative
/// violation over all recorded steps (diagnostic, used by invariant checks).
pub fn residual_of(t: &Trajectory) -> f64 {
    let m = t.matrix.to_f64();
    let mut worst: f64 = 0.0;
    for k in 0..t.len().saturating_sub(1) {
        let x = DVector::from_vec(t.step_f64(k));
        let y = DVector::from_vec(t.step_f64(k + 1));
        let back: DVector<f64> = m.transpose() * &y;
        let scale = x.amax().max(1e-300);
        worst = worst.max((back - &x).amax() / scale);
    }
    worst
}

/// Convenience: all steps strictly positive.
pub fn all_positive(t: &Trajectory) -> bool {
    first_negative(&t.steps).is_none()
}
