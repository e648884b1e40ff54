//! Similarity transforms between structure matrices and Markov chains.
//!
//! The key map is `P = D_v^{-1} (A / rho) D_v`, which turns an irreducible
//! aperiodic structure matrix into a row-stochastic transition matrix.
//! `P` is stochastic exactly when the transform vector is the maximal
//! right-eigenvector, its stationary distribution is `u (.) v` (normalized),
//! and iterating under `P` is step-for-step equivalent to iterating under
//! `A`. The dual map `Q = D_u (A / rho) D_u^{-1}` is column-stochastic and
//! is what the structure optimizer holds invariant.

use nalgebra::DMatrix;
use num::complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::eigen::EigenTriple;
use crate::error::{Error, Result};
use crate::matrix::StructureMatrix;

/// Row-stochastic chain obtained from a structure matrix, together with the
/// eigen-data it was derived from so that downstream consumers never have
/// to recompute it.
#[derive(Debug, Clone)]
pub struct TransitionChain {
    p: DMatrix<f64>,
    mu: Vec<f64>,
    pi: Vec<f64>,
    source_rho: f64,
    triple: EigenTriple,
    labels: Vec<String>,
}

impl TransitionChain {
    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// Equilibrium `u (.) v` of the source matrix.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Stationary distribution of the chain (sums to one).
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn source_rho(&self) -> f64 {
        self.source_rho
    }

    pub fn triple(&self) -> &EigenTriple {
        &self.triple
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Largest deviation of a row sum from one.
    pub fn row_sum_deviation(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .map(|i| ((0..d).map(|j| self.p[(i, j)]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Chain over the same eigen-data but with a blended kernel; used by
    /// the consumption transform, which moves `rho` without moving `u` or
    /// `v`.
    pub(crate) fn with_blend(&self, p: DMatrix<f64>, rho_alpha: f64) -> TransitionChain {
        let mut triple = self.triple.clone();
        triple.rho = rho_alpha;
        TransitionChain {
            p,
            mu: self.mu.clone(),
            pi: self.pi.clone(),
            source_rho: rho_alpha,
            triple,
            labels: self.labels.clone(),
        }
    }

    /// The chain viewed as a nonnegative structure matrix, for iteration.
    pub fn as_structure_matrix(&self) -> StructureMatrix {
        let rows: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.p[(i, j)]).collect())
            .collect();
        StructureMatrix::from_f64_rows(self.labels.clone(), &rows)
            .expect("stochastic matrix entries are nonnegative")
    }
}

impl Serialize for TransitionChain {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let rows: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| self.p[(i, j)]).collect())
            .collect();
        let mut s = serializer.serialize_struct("TransitionChain", 5)?;
        s.serialize_field("p", &rows)?;
        s.serialize_field("mu", &self.mu)?;
        s.serialize_field("pi", &self.pi)?;
        s.serialize_field("source_rho", &self.source_rho)?;
        s.serialize_field("labels", &self.labels)?;
        s.end()
    }
}

/// Column-stochastic dual chain `Q = D_u (A / rho) D_u^{-1}` with its right
/// equilibrium `u (.) v`.
#[derive(Debug, Clone)]
pub struct DualChain {
    q: DMatrix<f64>,
    equilibrium: Vec<f64>,
}

impl DualChain {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn equilibrium(&self) -> &[f64] {
        &self.equilibrium
    }

    pub fn column_sum_deviation(&self) -> f64 {
        let d = self.q.nrows();
        (0..d)
            .map(|j| ((0..d).map(|i| self.q[(i, j)]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

impl Serialize for DualChain {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.q.nrows();
        let rows: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| self.q[(i, j)]).collect())
            .collect();
        let mut s = serializer.serialize_struct("DualChain", 2)?;
        s.serialize_field("q", &rows)?;
        s.serialize_field("equilibrium", &self.equilibrium)?;
        s.end()
    }
}

fn check_triple(a: &StructureMatrix, t: &EigenTriple) -> Result<()> {
    let r = t.verify(a);
    if !(r <= t.tolerance) {
        return Err(Error::Domain(format!(
            "eigen triple does not match the matrix: residual {r:e} above tolerance {:e}",
            t.tolerance
        )));
    }
    Ok(())
}

/// The key transform `P = D_v^{-1} (A / rho) D_v`.
pub fn chen_transform(a: &StructureMatrix, t: &EigenTriple) -> Result<TransitionChain> {
    check_triple(a, t)?;
    let d = a.dim();
    let m = a.to_f64();
    let p = DMatrix::from_fn(d, d, |i, j| m[(i, j)] * t.v[j] / (t.rho * t.v[i]));
    let mu = t.mu();
    let uv: f64 = mu.iter().sum();
    let pi: Vec<f64> = mu.iter().map(|&c| c / uv).collect();
    let chain = TransitionChain {
        p,
        mu,
        pi,
        source_rho: t.rho,
        triple: t.clone(),
        labels: a.labels().to_vec(),
    };
    let dev = chain.row_sum_deviation();
    if !(dev <= 10.0 * t.tolerance) {
        return Err(Error::Numeric(format!(
            "transform is not stochastic: row-sum deviation {dev:e}"
        )));
    }
    Ok(chain)
}

/// General similarity `A_w = D_w^{-1} (A / rho) D_w`; row-stochastic
/// exactly when `w` is (a multiple of) the maximal right-eigenvector.
pub fn similarity_transform(a: &StructureMatrix, rho: f64, w: &[f64]) -> Result<DMatrix<f64>> {
    let d = a.dim();
    if w.len() != d {
        return Err(Error::Domain("transform vector has wrong dimension".into()));
    }
    if w.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
        return Err(Error::Domain("transform vector must be strictly positive".into()));
    }
    if !(rho > 0.0) {
        return Err(Error::Domain("spectral radius must be positive".into()));
    }
    let m = a.to_f64();
    Ok(DMatrix::from_fn(d, d, |i, j| m[(i, j)] * w[j] / (rho * w[i])))
}

/// The dual transform `Q = D_u (A / rho) D_u^{-1}` (column-stochastic).
pub fn dual_chain(a: &StructureMatrix, t: &EigenTriple) -> Result<DualChain> {
    check_triple(a, t)?;
    let d = a.dim();
    let m = a.to_f64();
    let q = DMatrix::from_fn(d, d, |i, j| t.u[i] * m[(i, j)] / (t.rho * t.u[j]));
    let dual = DualChain { q, equilibrium: t.mu() };
    let dev = dual.column_sum_deviation();
    if !(dev <= 10.0 * t.tolerance) {
        return Err(Error::Numeric(format!(
            "dual transform is not column-stochastic: deviation {dev:e}"
        )));
    }
    Ok(dual)
}

/// Reconstructs a structure matrix from a chain: `A_w = D_w P D_w^{-1}`
/// (or `D_w^{-1} Q D_w` for a dual chain). The result has spectral radius
/// one, `w` as its maximal right- (resp. left-) eigenvector, and transforms
/// back to the same chain.
pub fn inverse_chen(m: &DMatrix<f64>, w: &[f64], dual: bool, tol: f64) -> Result<DMatrix<f64>> {
    let d = m.nrows();
    if m.ncols() != d {
        return Err(Error::Domain("chain matrix must be square".into()));
    }
    if w.len() != d {
        return Err(Error::Domain("transform vector has wrong dimension".into()));
    }
    if w.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
        return Err(Error::Domain("transform vector must be strictly positive".into()));
    }
    for k in 0..d {
        let sum: f64 = if dual {
            (0..d).map(|i| m[(i, k)]).sum()
        } else {
            (0..d).map(|j| m[(k, j)]).sum()
        };
        if (sum - 1.0).abs() > tol {
            return Err(Error::Domain(format!(
                "input is not {}-stochastic: {} {k} sums to {sum}",
                if dual { "column" } else { "row" },
                if dual { "column" } else { "row" },
            )));
        }
    }
    Ok(if dual {
        DMatrix::from_fn(d, d, |i, j| m[(i, j)] * w[j] / w[i])
    } else {
        DMatrix::from_fn(d, d, |i, j| w[i] * m[(i, j)] / w[j])
    })
}

/// Complex version of the key transform: for a right-eigenpair
/// `(lambda, v)` of a complex matrix with nowhere-zero `v`, the matrix
/// `R_v = D_v^{-1} (A / lambda) D_v` has all row sums equal to one.
pub fn generalized_transform(
    a: &DMatrix<Complex64>,
    lambda: Complex64,
    v: &[Complex64],
) -> Result<DMatrix<Complex64>> {
    let d = a.nrows();
    if a.ncols() != d {
        return Err(Error::Domain("matrix must be square".into()));
    }
    if v.len() != d {
        return Err(Error::Domain("eigenvector has wrong dimension".into()));
    }
    if lambda.norm() == 0.0 {
        return Err(Error::Domain("eigenvalue must be nonzero".into()));
    }
    if v.iter().any(|c| c.norm() == 0.0) {
        return Err(Error::Domain("eigenvector must have no zero component".into()));
    }
    // sanity: (lambda, v) must actually be an eigenpair
    let scale = v.iter().map(|c| c.norm()).fold(0.0, f64::max) * lambda.norm();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..d {
            acc += a[(i, j)] * v[j];
        }
        worst = worst.max((acc - lambda * v[i]).norm());
    }
    if worst > 1e-9 * scale {
        return Err(Error::Domain(format!(
            "(lambda, v) is not a right-eigenpair: residual {worst:e}"
        )));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| a[(i, j)] * v[j] / (lambda * v[i])))
}

/// Probability density carried by a complex state vector:
/// `(|v_1|^2, ..., |v_d|^2) / |v|^2`.
pub fn wave_probability(v: &[Complex64]) -> Result<Vec<f64>> {
    let total: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    if !(total > 0.0) {
        return Err(Error::Domain("wave vector must be nonzero".into()));
    }
    Ok(v.iter().map(|c| c.norm_sqr() / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{eigentriple, SolverConfig};
    use crate::test_fixtures::two_product;

    fn chain() -> (StructureMatrix, EigenTriple, TransitionChain) {
        let a = two_product();
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let c = chen_transform(&a, &t).unwrap();
        (a, t, c)
    }

    #[test]
    fn rows_sum_to_one_and_pi_matches_figure_scaling() {
        let (_, _, c) = chain();
        assert!(c.row_sum_deviation() < 1e-12);
        // pi scaled so the second component reads 20
        let scaled = c.pi()[0] / c.pi()[1] * 20.0;
        assert!((scaled - 34.41179182).abs() < 5e-8, "scaled={scaled}");
        // module normalization makes pi and mu coincide
        for (p, m) in c.pi().iter().zip(c.mu()) {
            assert!((p - m).abs() < 1e-12);
        }
    }

    #[test]
    fn stochastic_matrix_is_fixed_point() {
        // A already row-stochastic: v = 1, P = A
        let a = StructureMatrix::from_f64_rows_default_labels(&[
            vec![0.25, 0.75],
            vec![0.5, 0.5],
        ])
        .unwrap();
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let c = chen_transform(&a, &t).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((c.matrix()[(i, j)] - a.entry_f64(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pi_is_stationary_for_ten_steps() {
        let (_, _, c) = chain();
        let d = c.dim();
        let mut x = c.pi().to_vec();
        for _ in 0..10 {
            let next: Vec<f64> = (0..d)
                .map(|j| (0..d).map(|i| x[i] * c.matrix()[(i, j)]).sum())
                .collect();
            x = next;
        }
        for (a, b) in x.iter().zip(c.pi()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn similarity_is_stochastic_iff_w_is_v() {
        let (a, t, _) = chain();
        let row_dev = |m: &DMatrix<f64>| {
            (0..2)
                .map(|i| ((0..2).map(|j| m[(i, j)]).sum::<f64>() - 1.0).abs())
                .fold(0.0, f64::max)
        };
        let at_v = similarity_transform(&a, t.rho, &t.v).unwrap();
        assert!(row_dev(&at_v) < 1e-12);
        // scaling w by a constant changes nothing
        let doubled: Vec<f64> = t.v.iter().map(|c| 2.0 * c).collect();
        let at_2v = similarity_transform(&a, t.rho, &doubled).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((at_v[(i, j)] - at_2v[(i, j)]).abs() < 1e-15);
            }
        }
        // perturbing one component breaks stochasticity
        let mut w = t.v.clone();
        w[0] *= 1.1;
        let perturbed = similarity_transform(&a, t.rho, &w).unwrap();
        assert!(row_dev(&perturbed) > 1e-3);
    }

    #[test]
    fn dual_chain_properties() {
        let (a, t, _) = chain();
        let q = dual_chain(&a, &t).unwrap();
        assert!(q.column_sum_deviation() < 1e-12);
        // Q (u.v) = u.v
        let eq = q.equilibrium();
        for i in 0..2 {
            let acc: f64 = (0..2).map(|j| q.matrix()[(i, j)] * eq[j]).sum();
            assert!((acc - eq[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn dual_of_symmetric_is_transpose_of_chain() {
        let a = StructureMatrix::from_f64_rows_default_labels(&[
            vec![2.0, 1.0],
            vec![1.0, 3.0],
        ])
        .unwrap();
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let p = chen_transform(&a, &t).unwrap();
        let q = dual_chain(&a, &t).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((q.matrix()[(i, j)] - p.matrix()[(j, i)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn inverse_chen_round_trips() {
        let (_, _, c) = chain();
        let w = [0.8, 2.5];
        let a_w = inverse_chen(c.matrix(), &w, false, 1e-9).unwrap();
        // rho(A_w) = 1 and w is its right eigenvector
        for i in 0..2 {
            let acc: f64 = (0..2).map(|j| a_w[(i, j)] * w[j]).sum();
            assert!((acc - w[i]).abs() < 1e-12);
        }
        // transforming back recovers P exactly
        let p2 = DMatrix::from_fn(2, 2, |i, j| a_w[(i, j)] * w[j] / w[i]);
        for i in 0..2 {
            for j in 0..2 {
                assert!((p2[(i, j)] - c.matrix()[(i, j)]).abs() < 1e-14);
            }
        }
        // w = 1 gives back P itself
        let identity_w = inverse_chen(c.matrix(), &[1.0, 1.0], false, 1e-9).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((identity_w[(i, j)] - c.matrix()[(i, j)]).abs() < 1e-15);
            }
        }
        // non-stochastic input is rejected
        let bad = DMatrix::from_row_slice(2, 2, &[0.5, 0.6, 0.5, 0.5]);
        assert!(matches!(inverse_chen(&bad, &w, false, 1e-9), Err(Error::Domain(_))));
    }

    #[test]
    fn inverse_chen_dual_round_trips() {
        let (a, t, _) = chain();
        let q = dual_chain(&a, &t).unwrap();
        let w = [1.3, 0.6];
        let a_w = inverse_chen(q.matrix(), &w, true, 1e-9).unwrap();
        // w is the left eigenvector of A_w at eigenvalue 1
        for j in 0..2 {
            let acc: f64 = (0..2).map(|i| w[i] * a_w[(i, j)]).sum();
            assert!((acc - w[j]).abs() < 1e-12);
        }
        // dual transform of A_w recovers Q
        let q2 = DMatrix::from_fn(2, 2, |i, j| w[i] * a_w[(i, j)] / w[j]);
        for i in 0..2 {
            for j in 0..2 {
                assert!((q2[(i, j)] - q.matrix()[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn generalized_transform_reduces_to_real_case() {
        let (a, t, c) = chain();
        let d = a.dim();
        let ac = DMatrix::from_fn(d, d, |i, j| Complex64::new(a.entry_f64(i, j), 0.0));
        let vc: Vec<Complex64> = t.v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let r = generalized_transform(&ac, Complex64::new(t.rho, 0.0), &vc).unwrap();
        for i in 0..d {
            for j in 0..d {
                assert!((r[(i, j)].re - c.matrix()[(i, j)]).abs() < 1e-12);
                assert!(r[(i, j)].im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn generalized_transform_hermitian_example() {
        // [[0, i], [-i, 0]] has eigenpair lambda = 1, v = (1, -i)/sqrt(2)
        let i = Complex64::new(0.0, 1.0);
        let a = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(0.0, 0.0),
            i,
            -i,
            Complex64::new(0.0, 0.0),
        ]);
        let s = 1.0 / 2f64.sqrt();
        let v = [Complex64::new(s, 0.0), Complex64::new(0.0, -s)];
        let r = generalized_transform(&a, Complex64::new(1.0, 0.0), &v).unwrap();
        for row in 0..2 {
            let sum: Complex64 = (0..2).map(|col| r[(row, col)]).sum();
            assert!((sum - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        // left eigenvector of R_v is conj(v) (.) v
        let left: Vec<Complex64> = v.iter().map(|c| c.conj() * c).collect();
        for j in 0..2 {
            let acc: Complex64 = (0..2).map(|k| left[k] * r[(k, j)]).sum();
            assert!((acc - left[j]).norm() < 1e-12);
        }
        // rejects a non-eigenpair
        let bad_v = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(generalized_transform(&a, Complex64::new(1.0, 0.0), &bad_v).is_err());
    }

    #[test]
    fn wave_probability_examples() {
        let p = wave_probability(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);
        let s = 1.0 / 2f64.sqrt();
        let p = wave_probability(&[Complex64::new(s, 0.0), Complex64::new(0.0, -s)]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let p = wave_probability(&[Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)]).unwrap();
        assert!((p[0] - 0.36).abs() < 1e-15 && (p[1] - 0.64).abs() < 1e-15);
        assert!(wave_probability(&[Complex64::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn mismatched_triple_is_rejected() {
        let (_, t, _) = chain();
        let other = StructureMatrix::from_f64_rows_default_labels(&[
            vec![0.3, 0.3],
            vec![0.3, 0.3],
        ])
        .unwrap();
        assert!(matches!(chen_transform(&other, &t), Err(Error::Domain(_))));
        assert!(matches!(dual_chain(&other, &t), Err(Error::Domain(_))));
    }
}
