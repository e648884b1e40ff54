//! Product ranking and weak/intermediate/pillar classification.
//!
//! Ranking uses the chain equilibrium `mu = u (.) v`, which carries all
//! three characteristics of the source matrix and has a unified dimension
//! across products. Classification sorts the stationary distribution
//! ascending and cuts the cumulative mass at two thresholds: products
//! inside the first 5% of mass are weak, products from the point where the
//! cumulative mass first reaches 50% onward are pillars, the rest are
//! intermediate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::transform::TransitionChain;

/// Descending ranking of products by equilibrium value.
#[derive(Debug, Clone, Serialize)]
pub struct RankingReport {
    /// Product indices sorted by descending `mu`; ties broken by ascending
    /// index.
    pub order: Vec<usize>,
    /// `mu` values aligned with `order`.
    pub values: Vec<f64>,
    /// Each ranked product's value as a multiple of the mean equilibrium
    /// value.
    pub equilibrium_multiples: Vec<f64>,
    pub labels: Vec<String>,
}

pub fn rank_products(chain: &TransitionChain, labels: &[String]) -> RankingReport {
    let mu = chain.mu();
    let mut order: Vec<usize> = (0..mu.len()).collect();
    order.sort_by(|&a, &b| mu[b].partial_cmp(&mu[a]).unwrap().then(a.cmp(&b)));
    let mean = mu.iter().sum::<f64>() / mu.len() as f64;
    let values: Vec<f64> = order.iter().map(|&i| mu[i]).collect();
    let equilibrium_multiples: Vec<f64> = values.iter().map(|&v| v / mean).collect();
    let labels = order.iter().map(|&i| labels[i].clone()).collect();
    RankingReport { order, values, equilibrium_multiples, labels }
}

/// Cumulative-distribution classification of products.
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    /// Product indices sorted by ascending stationary mass; ties broken by
    /// ascending index.
    pub ascending_order: Vec<usize>,
    /// Prefix sums of the sorted stationary distribution.
    pub cumulative: Vec<f64>,
    /// Product indices, ascending, in each class.
    pub weak: Vec<usize>,
    pub intermediate: Vec<usize>,
    pub pillar: Vec<usize>,
    pub thresholds: (f64, f64),
}

pub fn classify(
    chain: &TransitionChain,
    theta_weak: f64,
    theta_pillar: f64,
) -> Result<ClassificationReport> {
    if !(0.0 < theta_weak && theta_weak < theta_pillar && theta_pillar <= 1.0) {
        return Err(Error::Domain(format!(
            "thresholds must satisfy 0 < {theta_weak} < {theta_pillar} <= 1"
        )));
    }
    let pi = chain.pi();
    let d = pi.len();
    let mut ascending_order: Vec<usize> = (0..d).collect();
    ascending_order.sort_by(|&a, &b| pi[a].partial_cmp(&pi[b]).unwrap().then(a.cmp(&b)));
    let mut cumulative = Vec::with_capacity(d);
    let mut acc = 0.0;
    for &i in &ascending_order {
        acc += pi[i];
        cumulative.push(acc);
    }
    // weak: cumulative mass at most theta_weak
    // pillar: from the first position whose cumulative mass reaches
    // theta_pillar, onward
    let mut weak = Vec::new();
    let mut intermediate = Vec::new();
    let mut pillar = Vec::new();
    let pillar_start = cumulative
        .iter()
        .position(|&c| c >= theta_pillar)
        .unwrap_or(d);
    for (pos, &product) in ascending_order.iter().enumerate() {
        if pos >= pillar_start {
            pillar.push(product);
        } else if cumulative[pos] <= theta_weak {
            weak.push(product);
        } else {
            intermediate.push(product);
        }
    }
    weak.sort_unstable();
    intermediate.sort_unstable();
    pillar.sort_unstable();
    Ok(ClassificationReport {
        ascending_order,
        cumulative,
        weak,
        intermediate,
        pillar,
        thresholds: (theta_weak, theta_pillar),
    })
}

/// Data for the cumulative-distribution curve: 1-based rank position and
/// cumulative mass of the products up to it.
pub fn cumulative_curve(chain: &TransitionChain) -> Vec<(usize, f64)> {
    let pi = chain.pi();
    let mut sorted: Vec<f64> = pi.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut acc = 0.0;
    sorted
        .iter()
        .enumerate()
        .map(|(pos, &p)| {
            acc += p;
            (pos + 1, acc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{eigentriple, SolverConfig};
    use crate::matrix::StructureMatrix;
    use crate::test_fixtures::{chain_with_pi, two_product};
    use crate::transform::chen_transform;

    #[test]
    fn two_product_ranking_puts_agriculture_first() {
        let a = two_product();
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let c = chen_transform(&a, &t).unwrap();
        let r = rank_products(&c, a.labels());
        // mu proportional to (34.41.., 20): the first product wins
        assert_eq!(r.order, vec![0, 1]);
        assert_eq!(r.labels, vec!["agriculture", "manufacturing"]);
        assert!(r.values[0] > r.values[1]);
        // multiples average to one over the product set
        let back: f64 = r.equilibrium_multiples.iter().sum::<f64>() / 2.0;
        assert!((back - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_distribution_ties_break_by_index() {
        let c = chain_with_pi(&[0.25, 0.25, 0.25, 0.25]);
        let r = rank_products(&c, c.labels());
        assert_eq!(r.order, vec![0, 1, 2, 3]);
        let cls = classify(&c, 0.05, 0.5).unwrap();
        assert_eq!(cls.ascending_order, vec![0, 1, 2, 3]);
        // prefix sums 0.25, 0.5, 0.75, 1.0: nothing weak, pillar from
        // position 2 of the ascending order
        assert!(cls.weak.is_empty());
        assert_eq!(cls.pillar, vec![1, 2, 3]);
        assert_eq!(cls.intermediate, vec![0]);
    }

    #[test]
    fn skewed_distribution_classifies_as_expected() {
        let c = chain_with_pi(&[0.01, 0.02, 0.97]);
        let cls = classify(&c, 0.05, 0.5).unwrap();
        assert_eq!(cls.weak, vec![0, 1]);
        assert_eq!(cls.pillar, vec![2]);
        assert!(cls.intermediate.is_empty());
        assert!((cls.cumulative.last().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_product_is_a_pillar() {
        let c = chain_with_pi(&[1.0]);
        let cls = classify(&c, 0.05, 0.5).unwrap();
        assert!(cls.weak.is_empty());
        assert_eq!(cls.pillar, vec![0]);
    }

    #[test]
    fn thresholds_are_validated() {
        let c = chain_with_pi(&[0.5, 0.5]);
        assert!(classify(&c, 0.5, 0.05).is_err());
        assert!(classify(&c, 0.0, 0.5).is_err());
        assert!(classify(&c, 0.05, 1.1).is_err());
    }

    #[test]
    fn ranking_is_scale_invariant() {
        // scaling u or v rescales mu uniformly and leaves the order alone
        let a = StructureMatrix::from_f64_rows_default_labels(&[
            vec![0.2, 0.5, 0.1],
            vec![0.3, 0.1, 0.4],
            vec![0.1, 0.2, 0.3],
        ])
        .unwrap();
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let c = chen_transform(&a, &t).unwrap();
        let r = rank_products(&c, a.labels());
        let mut scaled = t.clone();
        for k in 0..3 {
            scaled.u[k] *= 7.5;
            scaled.v[k] /= 7.5;
        }
        // mu built from the scaled pair keeps the ranking
        let mu2: Vec<f64> = scaled.u.iter().zip(&scaled.v).map(|(a, b)| a * b * 56.25).collect();
        let mut order2: Vec<usize> = (0..3).collect();
        order2.sort_by(|&x, &y| mu2[y].partial_cmp(&mu2[x]).unwrap().then(x.cmp(&y)));
        assert_eq!(r.order, order2);
    }

    #[test]
    fn curve_ends_at_one_and_is_monotone() {
        let a = two_product();
        let t = eigentriple(&a, &SolverConfig::default()).unwrap();
        let c = chen_transform(&a, &t).unwrap();
        let curve = cumulative_curve(&c);
        assert_eq!(curve.len(), 2);
        assert!((curve[1].1 - 1.0).abs() < 1e-12);
        assert!(curve[0].1 <= curve[1].1);
        assert_eq!((curve[0].0, curve[1].0), (1, 2));
    }
}
