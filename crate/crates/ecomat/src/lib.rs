//! Analysis toolkit for nonnegative economic structure matrices.
//!
//! The pipeline, end to end:
//!
//! 1. [`matrix`] — structure matrices, irreducibility/period/positivity
//!    predicates, Collatz-Wielandt bounds.
//! 2. [`eigen`] — the three major characteristics `(rho, u, v)` via
//!    C-W-safeguarded power or shifted inverse-power iteration, with
//!    quasi-symmetrization and eigenvector-smoothing preconditioners.
//! 3. [`transform`] — the similarity `P = D_v^{-1}(A/rho)D_v` turning a
//!    structure matrix into a Markov chain, its column-stochastic dual, the
//!    invariant matrix families, and the complex generalization.
//! 4. [`stability`] — idealized input-output iteration, collapse
//!    detection, and the equivalence between structure-space and
//!    chain-space trajectories. Exact rational arithmetic available
//!    throughout (the experiments are hypersensitive to rounding).
//! 5. [`consumption`] — consumption-augmented models and the
//!    growth-rate/consumption-parameter algebra, plus feasibility search.
//! 6. [`ranking`] — product ranking by the chain equilibrium and
//!    weak/intermediate/pillar classification by cumulative mass.
//! 7. [`optimize`] — regulated structure matrices with a prescribed
//!    equilibrium, sharing their chain invariant with the source.
//! 8. [`chart`] — self-contained SVG plots of trajectories and cumulative
//!    distributions.

// `!(x > 0.0)` guards are deliberate: unlike `x <= 0.0`, the negated
// form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chart;
pub mod consumption;
pub mod eigen;
pub mod error;
pub mod matrix;
pub mod numeric;
pub mod optimize;
pub mod ranking;
pub mod stability;
pub mod transform;

pub use error::{Error, Result};
pub use matrix::{amplitude, cw_bounds, is_irreducible, min_positivity_exponent, period};
pub use matrix::{CwBounds, StructureMatrix};
pub use numeric::{parse_decimal, NumericMode, Rational};

pub use nalgebra;
pub use num;

#[cfg(test)]
pub(crate) mod test_fixtures {
    use crate::eigen::{eigentriple, SolverConfig};
    use crate::matrix::StructureMatrix;
    use crate::transform::{chen_transform, TransitionChain};

    /// The classic two-sector economy (agriculture / manufacturing).
    pub fn two_product() -> StructureMatrix {
        StructureMatrix::from_decimal_rows(
            vec!["agriculture".into(), "manufacturing".into()],
            &[vec!["0.25", "0.14"], vec!["0.4", "0.12"]],
        )
        .unwrap()
    }

    /// Closed-form eigen data of the two-sector matrix from its
    /// characteristic polynomial `lambda^2 - 0.37 lambda - 0.026 = 0`:
    /// returns `(rho, u, v)` with `u`, `v` in the raw scalings
    /// `u = ((5/7)(sqrt(2409) + 13), 20)` and `v = (1, (sqrt(2409) - 13)/28)`.
    pub fn two_product_eigen_oracle() -> (f64, Vec<f64>, Vec<f64>) {
        let s = 2409f64.sqrt();
        let rho = (37.0 + s) / 200.0;
        let u = vec![5.0 / 7.0 * (s + 13.0), 20.0];
        let v = vec![1.0, (s - 13.0) / 28.0];
        (rho, u, v)
    }

    /// A chain whose stationary distribution is exactly the prescribed
    /// probability vector: every row of the source matrix equals `pi`, so
    /// `v = 1`, `u = pi`, and the transform is the matrix itself.
    pub fn chain_with_pi(pi: &[f64]) -> TransitionChain {
        let rows: Vec<Vec<f64>> = (0..pi.len()).map(|_| pi.to_vec()).collect();
        let a = StructureMatrix::from_f64_rows_default_labels(&rows).unwrap();
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        chen_transform(&a, &t).unwrap()
    }
}
