//! Cross-module invariants on randomized inputs. Everything is seeded, so
//! failures reproduce.

mod common;

use common::{random_positive_vec, random_primitive, random_primitive_substochastic, rng};
use ecomat::consumption::{chen_alpha_matrix, transformed_alpha_chain};
use ecomat::eigen::{
    eigentriple, inverse_power_eigenpair, power_eigenpair, quasi_symmetrize, Side, SolverConfig,
    SolverKind,
};
use ecomat::matrix::{cw_bounds, min_positivity_exponent, period, StructureMatrix};
use ecomat::numeric::rational_from_f64;
use ecomat::optimize::{
    dual_invariance_deviation, invariance_deviation, optimize_structure, shared_stability_check,
};
use ecomat::ranking::{classify, cumulative_curve, rank_products};
use ecomat::stability::{
    collapse_report, convert, equivalence_check, iterate_chain, iterate_exact, iterate_float,
    CrisisConfig, Direction, FloatOpts,
};
use ecomat::transform::{chen_transform, dual_chain, inverse_chen, similarity_transform};
use ecomat::NumericMode;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Independent oracle for the spectral radius: largest eigenvalue modulus
/// from a dense general-purpose eigensolver.
fn rho_oracle(a: &StructureMatrix) -> f64 {
    a.to_f64()
        .complex_eigenvalues()
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}

#[test]
fn cw_interval_brackets_rho_and_solvers_agree() {
    let mut r = rng(11);
    for &d in &[2usize, 3, 5, 10, 20, 50] {
        let a = random_primitive(&mut r, d, 0.4);
        let x = random_positive_vec(&mut r, d);
        let b = cw_bounds(&a, &x).unwrap();
        assert!(b.lower <= b.upper);
        let cfg = SolverConfig::default();
        let (rho_p, v_p) = power_eigenpair(&a, Side::Right, &cfg).unwrap();
        let cfg_inv = SolverConfig { solver: SolverKind::InversePower, ..cfg.clone() };
        let (rho_i, v_i) = inverse_power_eigenpair(&a, Side::Right, &cfg_inv).unwrap();
        assert!(
            b.lower * (1.0 - 1e-12) <= rho_p && rho_p <= b.upper * (1.0 + 1e-12),
            "d={d}: rho {rho_p} outside [{}, {}]",
            b.lower,
            b.upper
        );
        assert!((rho_p - rho_i).abs() <= 10.0 * cfg.tolerance * rho_p, "d={d}");
        for (p, i) in v_p.iter().zip(&v_i) {
            assert!((p - i).abs() < 1e-8 * p.max(*i), "d={d}");
        }
        // dense-eigensolver oracle
        let oracle = rho_oracle(&a);
        assert!((rho_p - oracle).abs() <= 1e-10 * oracle, "d={d}: {rho_p} vs {oracle}");
    }
}

#[test]
fn positive_diagonal_forces_period_one() {
    let mut r = rng(12);
    for _ in 0..50 {
        let d = r.random_range(2..8);
        let mut a = random_primitive(&mut r, d, 0.3);
        // random_primitive already sets a positive (0,0); double-check on
        // a fresh matrix whose only guaranteed structure is the diagonal
        let mut rows = a.rows_f64();
        let k = r.random_range(0..d);
        rows[k][k] = 0.5;
        a = StructureMatrix::from_f64_rows_default_labels(&rows).unwrap();
        if ecomat::is_irreducible(&a) {
            assert_eq!(period(&a).unwrap(), 1);
        }
    }
}

#[test]
fn positivity_exponent_bounds_hold_up_to_d6() {
    // the classical bounds are asserted inside the operation; this sweep
    // exercises them across random patterns up to d = 6
    let mut r = rng(13);
    for _ in 0..300 {
        let d = r.random_range(1..=6usize);
        let a = random_primitive(&mut r, d, 0.25);
        let m = min_positivity_exponent(&a).unwrap();
        assert!(m <= (d.max(2) - 1) * (d.max(2) - 1) + 1);
    }
}

#[test]
fn similarity_transforms_preserve_rho() {
    let mut r = rng(14);
    for &d in &[2usize, 4, 8] {
        let a = random_primitive(&mut r, d, 0.6);
        let cfg = SolverConfig::default();
        let t = eigentriple(&a, &cfg).unwrap();
        let (mu, a_hat) = quasi_symmetrize(&a).unwrap();
        assert!(mu.iter().all(|&c| c > 0.0));
        let rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| a_hat[(i, j)]).collect()).collect();
        let hat = StructureMatrix::from_f64_rows_default_labels(&rows).unwrap();
        let (rho_hat, _) = power_eigenpair(&hat, Side::Right, &cfg).unwrap();
        assert!((rho_hat - t.rho).abs() < 1e-10 * t.rho);
        let w = random_positive_vec(&mut r, d);
        let smoothed = ecomat::eigen::smooth_transform(&a, &w).unwrap();
        let rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| smoothed[(i, j)]).collect()).collect();
        let sm = StructureMatrix::from_f64_rows_default_labels(&rows).unwrap();
        let (rho_sm, _) = power_eigenpair(&sm, Side::Right, &cfg).unwrap();
        assert!((rho_sm - t.rho).abs() < 1e-10 * t.rho);
    }
}

#[test]
fn chain_is_stochastic_and_pi_invariant_over_100_steps() {
    let mut r = rng(15);
    for &d in &[2usize, 3, 6, 10] {
        let a = random_primitive(&mut r, d, 0.5);
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let c = chen_transform(&a, &t).unwrap();
        assert!(c.row_sum_deviation() <= 1e-12);
        let mut x = c.pi().to_vec();
        for _ in 0..100 {
            x = (0..d)
                .map(|j| (0..d).map(|i| x[i] * c.matrix()[(i, j)]).sum())
                .collect();
        }
        let drift = x
            .iter()
            .zip(c.pi())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        // the residual of the solved pi amplified by the spectral gap
        // dominates here; 1e-10 is the acceptance-level budget
        assert!(drift <= 1e-10, "d={d} drift={drift:e}");
    }
}

#[test]
fn stochastic_iff_w_proportional_to_v() {
    let mut r = rng(16);
    for _ in 0..20 {
        let d = r.random_range(2..=10usize);
        let a = random_primitive(&mut r, d, 0.5);
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let row_dev = |m: &DMatrix<f64>| -> f64 {
            (0..d)
                .map(|i| ((0..d).map(|j| m[(i, j)]).sum::<f64>() - 1.0).abs())
                .fold(0.0, f64::max)
        };
        let stoch_tol = 100.0 * t.tolerance;
        let scale = r.random_range(0.5..2.0);
        let w: Vec<f64> = t.v.iter().map(|&c| scale * c).collect();
        assert!(row_dev(&similarity_transform(&a, t.rho, &w).unwrap()) <= stoch_tol);
        let mut bad = t.v.clone();
        bad[r.random_range(0..d)] *= 1.05;
        assert!(row_dev(&similarity_transform(&a, t.rho, &bad).unwrap()) > stoch_tol);
    }
}

#[test]
fn ergodic_limit_reaches_rank_one() {
    let mut r = rng(17);
    for &d in &[2usize, 3, 4] {
        let a = random_primitive(&mut r, d, 1.0); // fully positive
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let c = chen_transform(&a, &t).unwrap();
        let m_min = min_positivity_exponent(&a).unwrap();
        let n = 4 * m_min * (1.0f64 / 1e-12).ln().ceil() as usize;
        let mut p_n = DMatrix::<f64>::identity(d, d);
        for _ in 0..n {
            p_n = &p_n * c.matrix();
        }
        for i in 0..d {
            for j in 0..d {
                assert!((p_n[(i, j)] - c.pi()[j]).abs() < 1e-9, "d={d} ({i},{j})");
            }
        }
    }
}

#[test]
fn dual_chain_is_transposed_transform_of_transpose() {
    let mut r = rng(18);
    for _ in 0..10 {
        let d = r.random_range(2..=8usize);
        let a = random_primitive(&mut r, d, 0.5);
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let q = dual_chain(&a, &t).unwrap();
        let at = a.transpose();
        let tt = eigentriple(&at, &SolverConfig::default()).unwrap();
        let p_of_t = chen_transform(&at, &tt).unwrap();
        for i in 0..d {
            for j in 0..d {
                assert!(
                    (q.matrix()[(i, j)] - p_of_t.matrix()[(j, i)]).abs() < 1e-9,
                    "({i},{j})"
                );
            }
        }
        assert!((tt.rho - t.rho).abs() < 1e-12 * t.rho);
    }
}

#[test]
fn inverse_chen_round_trips_both_sides() {
    let mut r = rng(19);
    for _ in 0..20 {
        let d = r.random_range(2..=10usize);
        let a = random_primitive(&mut r, d, 0.5);
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let c = chen_transform(&a, &t).unwrap();
        let w = random_positive_vec(&mut r, d);
        let a_w = inverse_chen(c.matrix(), &w, false, 1e-9).unwrap();
        let p_back = DMatrix::from_fn(d, d, |i, j| a_w[(i, j)] * w[j] / w[i]);
        for i in 0..d {
            for j in 0..d {
                assert!((p_back[(i, j)] - c.matrix()[(i, j)]).abs() <= 1e-12);
            }
        }
        let q = dual_chain(&a, &t).unwrap();
        let a_wq = inverse_chen(q.matrix(), &w, true, 1e-9).unwrap();
        let q_back = DMatrix::from_fn(d, d, |i, j| w[i] * a_wq[(i, j)] / w[j]);
        for i in 0..d {
            for j in 0..d {
                assert!((q_back[(i, j)] - q.matrix()[(i, j)]).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn chain_iteration_matches_converted_structure_iteration() {
    // the two iterative sequences are equivalent: iterating P from
    // x0 (.) v reproduces rho^n (x_n (.) v) step by step
    let mut r = rng(20);
    for _ in 0..10 {
        let d = r.random_range(2..=6usize);
        let a = random_primitive(&mut r, d, 0.7);
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let c = chen_transform(&a, &t).unwrap();
        let x0 = random_positive_vec(&mut r, d);
        let n = 14;
        let ta = iterate_float(&a, &x0, n, &FloatOpts::default()).unwrap();
        let converted = convert(&ta, &t, Direction::AToP).unwrap();
        let mu0: Vec<f64> = x0.iter().zip(&t.v).map(|(x, v)| x * v).collect();
        let tp = iterate_chain(&c, &mu0, n, &FloatOpts::default()).unwrap();
        let steps = ta.len().min(tp.len());
        for k in 0..steps {
            let lhs = tp.step_f64(k);
            let rhs = converted.step_f64(k);
            let scale = lhs.iter().fold(0.0f64, |acc, &v| acc.max(v.abs())).max(1e-30);
            for j in 0..d {
                assert!(
                    (lhs[j] - rhs[j]).abs() <= 1e-10 * scale,
                    "step {k} component {j}: {} vs {}",
                    lhs[j],
                    rhs[j]
                );
            }
        }
    }
}

#[test]
fn collapse_indices_agree_between_spaces() {
    let mut r = rng(21);
    for trial in 0..25 {
        let d = 3;
        let a = random_primitive(&mut r, d, 0.8);
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let x0: Vec<_> = random_positive_vec(&mut r, d)
            .into_iter()
            .map(|c| rational_from_f64(c).unwrap())
            .collect();
        assert!(
            equivalence_check(&a, &t, &x0, 400, &NumericMode::Rational).unwrap(),
            "trial {trial}"
        );
    }
}

#[test]
fn consumption_family_shares_eigenvectors() {
    let mut r = rng(22);
    for _ in 0..8 {
        let d = r.random_range(2..=10usize);
        let a = random_primitive_substochastic(&mut r, d, 0.5);
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        for alpha in [0.1, 0.4, 0.8] {
            let a_alpha = chen_alpha_matrix(&a, alpha).unwrap();
            let t_alpha = eigentriple(&a_alpha, &SolverConfig::default()).unwrap();
            assert!(
                (t_alpha.rho - ((1.0 - alpha) * t.rho + alpha)).abs() < 1e-12,
                "rho linearity"
            );
            for k in 0..d {
                assert!((t_alpha.u[k] - t.u[k]).abs() < 1e-8 * t.u[k]);
                assert!((t_alpha.v[k] - t.v[k]).abs() < 1e-8 * t.v[k]);
            }
            // commuting square: blend-then-transform = transform-then-blend
            let p = chen_transform(&a, &t).unwrap();
            let blended = transformed_alpha_chain(&p, alpha, t.rho).unwrap();
            let direct = chen_transform(&a_alpha, &t_alpha).unwrap();
            for i in 0..d {
                for j in 0..d {
                    assert!(
                        (blended.matrix()[(i, j)] - direct.matrix()[(i, j)]).abs() < 1e-9,
                        "alpha={alpha} ({i},{j})"
                    );
                }
            }
        }
    }
}

#[test]
fn feasible_set_is_an_up_set() {
    let mut r = rng(23);
    let d = 3;
    let a = random_primitive_substochastic(&mut r, d, 1.0);
    let t = eigentriple(&a, &SolverConfig::default()).unwrap();
    // near-equilibrium output keeps the model in its sensible regime
    let x_n = t.u.clone();
    let m = a.to_f64();
    let xi = |alpha: f64| -> Vec<f64> {
        let blended = DMatrix::from_fn(d, d, |i, j| {
            (1.0 - alpha) * m[(i, j)] + if i == j { alpha } else { 0.0 }
        });
        let next = blended
            .transpose()
            .lu()
            .solve(&nalgebra::DVector::from_column_slice(&x_n))
            .unwrap();
        let gamma = alpha / (1.0 - alpha);
        x_n.iter().zip(next.iter()).map(|(c, n)| gamma * (n - c)).collect()
    };
    let planned = xi(0.45);
    let feasible = |alpha: f64| xi(alpha).iter().zip(&planned).all(|(h, w)| h >= w);
    let mut seen_feasible = false;
    for k in 1..100 {
        let alpha = k as f64 / 100.0;
        let f = feasible(alpha);
        if seen_feasible {
            assert!(f, "feasibility lost at alpha={alpha}");
        }
        seen_feasible |= f;
    }
    assert!(seen_feasible);
}

#[test]
fn ranking_by_mu_and_pi_coincide() {
    let mut r = rng(24);
    for _ in 0..10 {
        let d = r.random_range(2..=12usize);
        let a = random_primitive(&mut r, d, 0.6);
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let c = chen_transform(&a, &t).unwrap();
        let by_mu = rank_products(&c, c.labels());
        let mut by_pi: Vec<usize> = (0..d).collect();
        by_pi.sort_by(|&x, &y| c.pi()[y].partial_cmp(&c.pi()[x]).unwrap().then(x.cmp(&y)));
        assert_eq!(by_mu.order, by_pi);
        let curve = cumulative_curve(&c);
        assert!((curve.last().unwrap().1 - 1.0).abs() < 1e-12);
        for w in curve.windows(2) {
            assert!(w[0].1 <= w[1].1 + 1e-15);
        }
    }
}

#[test]
fn optimization_hits_eigen_targets_up_to_d20() {
    let mut r = rng(25);
    for &d in &[2usize, 5, 10, 20] {
        let a = random_primitive(&mut r, d, 0.5);
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let target = random_positive_vec(&mut r, d);
        let res = optimize_structure(&a, &t, &target).unwrap();
        let m = res.a_tilde.to_f64();
        let scale_u = target.iter().fold(0.0f64, |acc, &c| acc.max(c));
        for j in 0..d {
            let acc: f64 = (0..d).map(|i| target[i] * m[(i, j)]).sum();
            assert!((acc - t.rho * target[j]).abs() <= 1e-10 * t.rho * scale_u, "d={d} col {j}");
        }
        let scale_v = res.v_tilde.iter().fold(0.0f64, |acc, &c| acc.max(c));
        for i in 0..d {
            let acc: f64 = (0..d).map(|j| m[(i, j)] * res.v_tilde[j]).sum();
            assert!((acc - t.rho * res.v_tilde[i]).abs() <= 1e-10 * t.rho * scale_v, "d={d} row {i}");
        }
        assert!(res.a_tilde.rows_f64().iter().all(|r| r.iter().all(|&e| e >= 0.0)));
        assert!(invariance_deviation(&a, &res, &t).unwrap() <= 1e-10);
        assert!(dual_invariance_deviation(&a, &res, &t) <= 1e-10);
    }
}

#[test]
fn transported_stability_agrees_on_random_fixtures() {
    let mut r = rng(26);
    for trial in 0..15 {
        let d = 3;
        let a = random_primitive(&mut r, d, 0.9);
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let target = random_positive_vec(&mut r, d);
        let res = optimize_structure(&a, &t, &target).unwrap();
        let x0 = random_positive_vec(&mut r, d);
        assert!(shared_stability_check(&a, &res, &t, &x0, 400).unwrap(), "trial {trial}");
    }
}

#[test]
fn exact_and_float_iterations_agree_while_positive() {
    let mut r = rng(27);
    let a = random_primitive(&mut r, 3, 0.9);
    let x0_f = random_positive_vec(&mut r, 3);
    let x0: Vec<_> = x0_f.iter().map(|&c| rational_from_f64(c).unwrap()).collect();
    let te = iterate_exact(&a, &x0, 30).unwrap();
    let tf = iterate_float(&a, &x0_f, 30, &FloatOpts::default()).unwrap();
    let re = collapse_report(&te, &CrisisConfig::default());
    let rf = collapse_report(&tf, &CrisisConfig::default());
    assert_eq!(re.collapse_time, rf.collapse_time);
    assert_eq!(re.collapse_product, rf.collapse_product);
    // every recorded step solves the system it was iterated under
    assert!(ecomat::stability::residual_of(&te) <= 1e-12);
    assert!(ecomat::stability::residual_of(&tf) <= 1e-12);
}

proptest! {
    #[test]
    fn classification_partitions_products(masses in prop::collection::vec(1e-6..1.0f64, 1..40)) {
        let total: f64 = masses.iter().sum();
        let pi: Vec<f64> = masses.iter().map(|m| m / total).collect();
        let rows: Vec<Vec<f64>> = (0..pi.len()).map(|_| pi.clone()).collect();
        let a = StructureMatrix::from_f64_rows_default_labels(&rows).unwrap();
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let c = chen_transform(&a, &t).unwrap();
        let cls = classify(&c, 0.05, 0.5).unwrap();
        let mut all: Vec<usize> = cls.weak.iter().chain(&cls.intermediate).chain(&cls.pillar).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..pi.len()).collect::<Vec<_>>());
        // threshold monotonicity: shrinking theta_weak never adds weak
        // products, growing theta_pillar never adds pillars
        let tighter = classify(&c, 0.025, 0.5).unwrap();
        prop_assert!(tighter.weak.iter().all(|p| cls.weak.contains(p)));
        let higher = classify(&c, 0.05, 0.75).unwrap();
        prop_assert!(higher.pillar.iter().all(|p| cls.pillar.contains(p)));
    }

    #[test]
    fn wave_probability_is_a_distribution(re in prop::collection::vec(-5.0..5.0f64, 1..12), im in prop::collection::vec(-5.0..5.0f64, 1..12)) {
        let d = re.len().min(im.len());
        let v: Vec<num::complex::Complex64> = (0..d)
            .map(|k| num::complex::Complex64::new(re[k], im[k]))
            .collect();
        if v.iter().any(|c| c.norm_sqr() > 0.0) {
            let p = ecomat::transform::wave_probability(&v).unwrap();
            let sum: f64 = p.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|&c| c >= 0.0));
        }
    }

    #[test]
    fn decimal_strings_round_trip(int_part in 0u64..10_000, frac in 0u32..1_000_000) {
        let s = format!("{int_part}.{frac:06}");
        let r = ecomat::parse_decimal(&s).unwrap();
        let formatted = ecomat::numeric::format_exact_decimal(&r).unwrap();
        prop_assert_eq!(ecomat::parse_decimal(&formatted).unwrap(), r);
    }
}
