//! Structure matrices and their pattern-level predicates.
//!
//! A structure matrix records consumption coefficients: entry `(i, j)` is
//! the amount of product `j` consumed to produce one unit of product `i`.
//! Entries are kept as exact rationals so that decimal input keeps its
//! decimal meaning in exact-arithmetic runs; every operation that works in
//! doubles goes through [`StructureMatrix::to_f64`].
//!
//! Irreducibility, period and the positivity exponent depend only on the
//! zero-pattern of the matrix ("is this entry positive"), never on entry
//! magnitudes, and there is deliberately no epsilon involved.

use nalgebra::DMatrix;
use num::Zero;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::{parse_decimal, rational_from_f64, rational_to_f64, Rational};

/// Nonnegative square matrix of consumption coefficients with product labels.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureMatrix {
    dim: usize,
    labels: Vec<String>,
    /// Row-major, `dim * dim` entries.
    entries: Vec<Rational>,
}

impl StructureMatrix {
    /// Builds a matrix from exact rational rows.
    pub fn from_rational_rows(labels: Vec<String>, rows: Vec<Vec<Rational>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::Domain("empty matrix".into()));
        }
        if labels.len() != d {
            return Err(Error::Domain(format!(
                "{} labels for a {d}x{d} matrix",
                labels.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Domain(format!("duplicate label {l:?}")));
            }
        }
        let mut entries = Vec::with_capacity(d * d);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != d {
                return Err(Error::Domain(format!(
                    "row {} has {} entries, expected {d}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, e) in row.into_iter().enumerate() {
                if e < Rational::zero() {
                    return Err(Error::Domain(format!(
                        "negative entry at row {}, column {}",
                        i + 1,
                        j + 1
                    )));
                }
                entries.push(e);
            }
        }
        Ok(StructureMatrix { dim: d, labels, entries })
    }

    /// Builds a matrix from doubles; each double is converted to the exact
    /// rational it represents.
    pub fn from_f64_rows(labels: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let rational_rows = rows
            .iter()
            .map(|row| row.iter().map(|&x| rational_from_f64(x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rational_rows(labels, rational_rows)
    }

    /// Builds a matrix from decimal strings, read exactly (`"0.14"` is 14/100).
    pub fn from_decimal_rows(labels: Vec<String>, rows: &[Vec<&str>]) -> Result<Self> {
        let rational_rows = rows
            .iter()
            .map(|row| row.iter().map(|s| parse_decimal(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rational_rows(labels, rational_rows)
    }

    /// Convenience constructor with labels `p1..pd`.
    pub fn from_f64_rows_default_labels(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_f64_rows(default_labels(rows.len()), rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.dim + j]
    }

    pub fn entry_f64(&self, i: usize, j: usize) -> f64 {
        rational_to_f64(self.entry(i, j))
    }

    pub fn rows_rational(&self) -> Vec<Vec<Rational>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.entry(i, j).clone()).collect())
            .collect()
    }

    pub fn rows_f64(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.entry_f64(i, j)).collect())
            .collect()
    }

    /// Double-precision view of the matrix.
    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.entry_f64(i, j))
    }

    /// Transposed matrix with the same labels.
    pub fn transpose(&self) -> StructureMatrix {
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(self.entry(j, i).clone());
            }
        }
        StructureMatrix {
            dim: d,
            labels: self.labels.clone(),
            entries,
        }
    }

    /// Zero-pattern: `true` where the entry is strictly positive.
    pub(crate) fn pattern(&self) -> Vec<Vec<bool>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.entry(i, j) > &Rational::zero()).collect())
            .collect()
    }
}

impl Serialize for StructureMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("StructureMatrix", 3)?;
        s.serialize_field("dim", &self.dim)?;
        s.serialize_field("labels", &self.labels)?;
        s.serialize_field("entries", &self.rows_f64())?;
        s.end()
    }
}

pub fn default_labels(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("p{i}")).collect()
}

/// Collatz-Wielandt bounds of the spectral radius at a positive test vector.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CwBounds {
    pub lower: f64,
    pub upper: f64,
    /// The sandwich `lower <= rho <= upper` is only guaranteed for
    /// irreducible matrices; set when the input was reducible.
    pub reducible_warning: bool,
}

/// Strong connectivity of the directed graph with an edge `i -> j` whenever
/// `a_ij > 0`. A 1x1 matrix counts as irreducible exactly when its single
/// entry is positive.
pub fn is_irreducible(a: &StructureMatrix) -> bool {
    let pat = a.pattern();
    let d = a.dim();
    if d == 1 {
        return pat[0][0];
    }
    reachable_from(&pat, 0).iter().all(|&r| r) && {
        // reverse reachability: everything reaches node 0
        let rev: Vec<Vec<bool>> = (0..d)
            .map(|i| (0..d).map(|j| pat[j][i]).collect())
            .collect();
        reachable_from(&rev, 0).iter().all(|&r| r)
    }
}

fn reachable_from(pat: &[Vec<bool>], start: usize) -> Vec<bool> {
    let d = pat.len();
    let mut seen = vec![false; d];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(u) = stack.pop() {
        for w in 0..d {
            if pat[u][w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Common period of an irreducible matrix: the gcd of `level(u) + 1 - level(w)`
/// over all edges `u -> w`, with levels from a breadth-first search.
pub fn period(a: &StructureMatrix) -> Result<usize> {
    if !is_irreducible(a) {
        return Err(Error::Structural("period of a reducible matrix".into()));
    }
    let pat = a.pattern();
    let d = a.dim();
    let mut level = vec![usize::MAX; d];
    let mut queue = std::collections::VecDeque::from([0usize]);
    level[0] = 0;
    while let Some(u) = queue.pop_front() {
        for w in 0..d {
            if pat[u][w] && level[w] == usize::MAX {
                level[w] = level[u] + 1;
                queue.push_back(w);
            }
        }
    }
    let mut g: usize = 0;
    for u in 0..d {
        for w in 0..d {
            if pat[u][w] {
                g = gcd(g, level[u] + 1 - level[w]);
            }
        }
    }
    debug_assert!(g >= 1, "strongly connected graph must close a cycle");
    Ok(g)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Least `m` with `A^m` entrywise positive, for irreducible aperiodic input.
///
/// Found by boolean powering; the classical bounds `m <= (d-1)^2 + 1`
/// (and `m <= d-1` with a fully positive diagonal) are asserted on the way
/// out, so a violation would flag a bug rather than pass silently.
pub fn min_positivity_exponent(a: &StructureMatrix) -> Result<usize> {
    let p = period(a)?; // also rejects reducible input
    if p != 1 {
        return Err(Error::Structural(format!(
            "no positive power exists: matrix has period {p}"
        )));
    }
    let d = a.dim();
    let base = a.pattern();
    let cap = (d - 1) * (d - 1) + 1;
    let mut power = base.clone();
    let mut m = 1;
    while !power.iter().all(|row| row.iter().all(|&b| b)) {
        m += 1;
        assert!(m <= cap, "positivity exponent exceeded (d-1)^2 + 1");
        power = bool_mul(&power, &base);
    }
    if (0..d).all(|i| base[i][i]) {
        assert!(m < d.max(2) || d == 1, "positive diagonal bound m <= d-1 violated");
    }
    Ok(m)
}

fn bool_mul(x: &[Vec<bool>], y: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let d = x.len();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| (0..d).any(|k| x[i][k] && y[k][j]))
                .collect()
        })
        .collect()
}

/// Bounds `min_k (xA)_k / x_k <= rho(A) <= max_k (xA)_k / x_k` for a
/// strictly positive row vector `x`. Both bounds collapse onto `rho`
/// exactly when `x` is the maximal left-eigenvector.
pub fn cw_bounds(a: &StructureMatrix, x: &[f64]) -> Result<CwBounds> {
    let d = a.dim();
    if x.len() != d {
        return Err(Error::Domain(format!("test vector has {} components, matrix is {d}x{d}", x.len())));
    }
    if x.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::Domain("test vector must be strictly positive".into()));
    }
    let m = a.to_f64();
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for k in 0..d {
        let mut acc = 0.0;
        for i in 0..d {
            acc += x[i] * m[(i, k)];
        }
        let ratio = acc / x[k];
        lower = lower.min(ratio);
        upper = upper.max(ratio);
    }
    Ok(CwBounds {
        lower,
        upper,
        reducible_warning: !is_irreducible(a),
    })
}

/// Spread of the entries, `max a_ij - min a_ij`.
pub fn amplitude(a: &StructureMatrix) -> Rational {
    let mut min = a.entry(0, 0).clone();
    let mut max = min.clone();
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let e = a.entry(i, j);
            if e < &min {
                min = e.clone();
            }
            if e > &max {
                max = e.clone();
            }
        }
    }
    max - min
}
