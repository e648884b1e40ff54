use ecomat::StructureMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random irreducible aperiodic structure matrix: sparse positive entries
/// plus a guaranteed cycle and one positive diagonal entry.
pub fn random_primitive(rng: &mut ChaCha8Rng, d: usize, density: f64) -> StructureMatrix {
    let mut rows = vec![vec![0.0f64; d]; d];
    for row in rows.iter_mut() {
        for e in row.iter_mut() {
            if rng.random::<f64>() < density {
                *e = rng.random_range(0.05..1.0);
            }
        }
    }
    for i in 0..d {
        rows[i][(i + 1) % d] = rng.random_range(0.05..1.0);
    }
    rows[0][0] = rng.random_range(0.05..1.0);
    StructureMatrix::from_f64_rows_default_labels(&rows).unwrap()
}

/// As [`random_primitive`], but scaled so the spectral radius is below one.
pub fn random_primitive_substochastic(rng: &mut ChaCha8Rng, d: usize, density: f64) -> StructureMatrix {
    let a = random_primitive(rng, d, density);
    let rows = a.rows_f64();
    let max_row_sum = rows
        .iter()
        .map(|r| r.iter().sum::<f64>())
        .fold(0.0f64, f64::max);
    let scale = 1.25 * max_row_sum;
    let scaled: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|e| e / scale).collect())
        .collect();
    StructureMatrix::from_f64_rows_default_labels(&scaled).unwrap()
}

pub fn random_positive_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(0.1..10.0)).collect()
}
