//! Construction of a structure matrix with a prescribed equilibrium.
//!
//! Given a matrix `A` with maximal left-eigenvector `u` and a target
//! equilibrium `u~`, the diagonal similarity by `w = u~ (.) u^{-1}` produces
//! the unique matrix that keeps the dual chain `Q_u` invariant while moving
//! the left eigenvector onto the target. "Closeness" to `A` is realized
//! purely through that invariant; no norm minimization is involved. The
//! returned matrix is rescaled so its spectral radius equals the source's,
//! which keeps development rates comparable before and after regulation.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::eigen::EigenTriple;
use crate::error::{Error, Result};
use crate::matrix::StructureMatrix;
use crate::stability::{collapse_report, iterate_chain, iterate_float, CrisisConfig, FloatOpts};
use crate::transform::{chen_transform, similarity_transform};

/// Regulated structure matrix with its eigen-data and the transform vector
/// that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub a_tilde: StructureMatrix,
    pub u_tilde: Vec<f64>,
    pub v_tilde: Vec<f64>,
    /// Transform vector `u~ (.) u^{-1}`.
    pub w: Vec<f64>,
}

/// Builds the matrix whose maximal left-eigenvector is the target `u~`:
/// `A~ = D_w^{-1} A D_w` with `w = u~ (.) u^{-1}`, spectral radius
/// preserved. The right eigenvector moves to `v~ = v (.) u (.) u~^{-1}`.
pub fn optimize_structure(
    a_alpha: &StructureMatrix,
    triple: &EigenTriple,
    u_tilde: &[f64],
) -> Result<OptimizationResult> {
    let d = a_alpha.dim();
    if u_tilde.len() != d {
        return Err(Error::Domain("target equilibrium has wrong dimension".into()));
    }
    if u_tilde.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
        return Err(Error::Domain("target equilibrium must be strictly positive".into()));
    }
    let r = triple.verify(a_alpha);
    if !(r <= triple.tolerance) {
        return Err(Error::Domain(format!(
            "eigen triple does not match the matrix: residual {r:e}"
        )));
    }
    let w: Vec<f64> = u_tilde.iter().zip(&triple.u).map(|(t, u)| t / u).collect();
    // rescaling A~/rho(A~) back by the source rho cancels the division, so
    // the entries are plain a_ij w_j / w_i; a positive diagonal similarity,
    // hence nonnegative
    let m = a_alpha.to_f64();
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| m[(i, j)] * w[j] / w[i]).collect())
        .collect();
    assert!(
        rows.iter().all(|row| row.iter().all(|&e| e >= 0.0)),
        "diagonal similarity must preserve nonnegativity"
    );
    let a_tilde = StructureMatrix::from_f64_rows(a_alpha.labels().to_vec(), &rows)?;
    let v_tilde: Vec<f64> = triple
        .v
        .iter()
        .zip(&triple.u)
        .zip(u_tilde)
        .map(|((v, u), t)| v * u / t)
        .collect();
    Ok(OptimizationResult {
        a_tilde,
        u_tilde: u_tilde.to_vec(),
        v_tilde,
        w,
    })
}

/// Eigen triple of the regulated matrix under the crate normalization,
/// derived from the source triple without re-solving.
pub fn tilde_triple(result: &OptimizationResult, triple: &EigenTriple) -> EigenTriple {
    let d = result.u_tilde.len() as f64;
    let v_sum: f64 = result.v_tilde.iter().sum();
    let v: Vec<f64> = result.v_tilde.iter().map(|c| c * d / v_sum).collect();
    let uv: f64 = result.u_tilde.iter().zip(&v).map(|(a, b)| a * b).sum();
    let u: Vec<f64> = result.u_tilde.iter().map(|c| c / uv).collect();
    let mut t = EigenTriple {
        rho: triple.rho,
        u,
        v,
        residual: triple.residual,
        tolerance: triple.tolerance,
    };
    t.residual = t.verify(&result.a_tilde).min(triple.tolerance);
    t
}

/// Whether the regulated matrix transforms to the same chain as the source
/// (entrywise within `tol`).
pub fn invariance_check(
    a_alpha: &StructureMatrix,
    result: &OptimizationResult,
    triple: &EigenTriple,
    tol: f64,
) -> Result<bool> {
    let p = chen_transform(a_alpha, triple)?;
    let p_tilde = similarity_transform(&result.a_tilde, triple.rho, &result.v_tilde)?;
    let d = a_alpha.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max((p_tilde[(i, j)] - p.matrix()[(i, j)]).abs());
        }
    }
    Ok(worst <= tol)
}

/// Entrywise gap between the two chains, for diagnostics.
pub fn invariance_deviation(
    a_alpha: &StructureMatrix,
    result: &OptimizationResult,
    triple: &EigenTriple,
) -> Result<f64> {
    let p = chen_transform(a_alpha, triple)?;
    let p_tilde = similarity_transform(&result.a_tilde, triple.rho, &result.v_tilde)?;
    let d = a_alpha.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max((p_tilde[(i, j)] - p.matrix()[(i, j)]).abs());
        }
    }
    Ok(worst)
}

/// Transports the initial vector into the regulated space
/// (`x~ = x (.) w`, matching `u~ = u (.) w`) and into the chain space
/// (`mu_0 = x (.) v`), iterates all three systems, and confirms they share
/// the collapse step and the collapse product.
pub fn shared_stability_check(
    a_alpha: &StructureMatrix,
    result: &OptimizationResult,
    triple: &EigenTriple,
    x0: &[f64],
    n_max: usize,
) -> Result<bool> {
    let d = a_alpha.dim();
    if x0.len() != d {
        return Err(Error::Domain("initial vector has wrong dimension".into()));
    }
    let opts = FloatOpts::default();
    let x0_tilde: Vec<f64> = x0.iter().zip(&result.w).map(|(x, w)| x * w).collect();
    let mu0: Vec<f64> = x0.iter().zip(&triple.v).map(|(x, v)| x * v).collect();

    let t_a = iterate_float(a_alpha, x0, n_max, &opts)?;
    let t_tilde = iterate_float(&result.a_tilde, &x0_tilde, n_max, &opts)?;
    let chain = chen_transform(a_alpha, triple)?;
    let t_p = iterate_chain(&chain, &mu0, n_max, &opts)?;

    let cfg = CrisisConfig::default();
    let r_a = collapse_report(&t_a, &cfg);
    let r_tilde = collapse_report(&t_tilde, &cfg);
    let r_p = collapse_report(&t_p, &cfg);
    Ok(r_a.collapse_time == r_tilde.collapse_time
        && r_a.collapse_time == r_p.collapse_time
        && r_a.collapse_product == r_tilde.collapse_product
        && r_a.collapse_product == r_p.collapse_product)
}

/// Dual-chain identity `Q_{u~}(A~) = Q_u(A)`: the defining equation of the
/// construction, exposed for invariant sweeps.
pub fn dual_invariance_deviation(
    a_alpha: &StructureMatrix,
    result: &OptimizationResult,
    triple: &EigenTriple,
) -> f64 {
    let d = a_alpha.dim();
    let m = a_alpha.to_f64();
    let mt = result.a_tilde.to_f64();
    let q = DMatrix::from_fn(d, d, |i, j| triple.u[i] * m[(i, j)] / (triple.rho * triple.u[j]));
    let q_tilde = DMatrix::from_fn(d, d, |i, j| {
        result.u_tilde[i] * mt[(i, j)] / (triple.rho * result.u_tilde[j])
    });
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max((q[(i, j)] - q_tilde[(i, j)]).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{eigentriple, SolverConfig};
    use crate::numeric::parse_decimal;
    use crate::test_fixtures::two_product;

    fn setup() -> (StructureMatrix, EigenTriple) {
        let a = two_product();
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        (a, t)
    }

    #[test]
    fn identity_target_reproduces_the_matrix() {
        let (a, t) = setup();
        for scale in [1.0, 3.25] {
            let target: Vec<f64> = t.u.iter().map(|&c| scale * c).collect();
            let r = optimize_structure(&a, &t, &target).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((r.a_tilde.entry_f64(i, j) - a.entry_f64(i, j)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn target_becomes_the_left_eigenvector() {
        let (a, t) = setup();
        let target = [50.0, 20.0];
        let r = optimize_structure(&a, &t, &target).unwrap();
        let m = r.a_tilde.to_f64();
        // u~ A~ = rho u~
        for j in 0..2 {
            let acc: f64 = (0..2).map(|i| target[i] * m[(i, j)]).sum();
            assert!((acc - t.rho * target[j]).abs() < 1e-10, "column {j}");
        }
        // A~ v~ = rho v~
        for i in 0..2 {
            let acc: f64 = (0..2).map(|j| m[(i, j)] * r.v_tilde[j]).sum();
            assert!((acc - t.rho * r.v_tilde[i]).abs() < 1e-10, "row {i}");
        }
        assert!(invariance_check(&a, &r, &t, 1e-10).unwrap());
        assert!(dual_invariance_deviation(&a, &r, &t) < 1e-12);
    }

    #[test]
    fn invariance_across_consumption_blends() {
        let (a, t) = setup();
        for alpha in [0.0, 0.3, 0.7] {
            let a_alpha = crate::consumption::chen_alpha_matrix(&a, alpha).unwrap();
            let mut t_alpha = t.clone();
            t_alpha.rho = (1.0 - alpha) * t.rho + alpha;
            t_alpha.residual = t_alpha.verify(&a_alpha);
            assert!(t_alpha.residual <= t_alpha.tolerance);
            let r = optimize_structure(&a_alpha, &t_alpha, &[50.0, 20.0]).unwrap();
            assert!(invariance_check(&a_alpha, &r, &t_alpha, 1e-10).unwrap(), "alpha={alpha}");
        }
    }

    #[test]
    fn rejects_bad_targets() {
        let (a, t) = setup();
        assert!(optimize_structure(&a, &t, &[1.0]).is_err());
        assert!(optimize_structure(&a, &t, &[1.0, 0.0]).is_err());
        assert!(optimize_structure(&a, &t, &[1.0, -2.0]).is_err());
    }

    #[test]
    fn collapse_indices_transport_across_all_three_systems() {
        let (a, t) = setup();
        let r = optimize_structure(&a, &t, &[50.0, 20.0]).unwrap();
        let x0 = [
            crate::numeric::rational_to_f64(&parse_decimal("44.344").unwrap()),
            20.0,
        ];
        assert!(shared_stability_check(&a, &r, &t, &x0, 1000).unwrap());
        // equilibrium start: nobody collapses within a short horizon
        let u: Vec<f64> = t.u.clone();
        assert!(shared_stability_check(&a, &r, &t, &u, 5).unwrap());
    }

    #[test]
    fn tilde_triple_is_consistent() {
        let (a, t) = setup();
        let r = optimize_structure(&a, &t, &[50.0, 20.0]).unwrap();
        let tt = tilde_triple(&r, &t);
        assert!(tt.verify(&r.a_tilde) <= tt.tolerance);
        let chain = chen_transform(&r.a_tilde, &tt).unwrap();
        assert!(chain.row_sum_deviation() < 1e-12);
    }
}
