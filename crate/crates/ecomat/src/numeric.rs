//! Exact-rational arithmetic support.
//!
//! The collapse experiments are hypersensitive to rounding: truncating the
//! equilibrium input from 8 decimals to 3 moves the collapse time from 13
//! to 8. Regression-grade stability runs therefore execute in exact
//! rational arithmetic, and decimal input like `0.14` is read as the exact
//! fraction 14/100 rather than the nearest binary double.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used throughout the exact paths.
pub type Rational = BigRational;

/// Numeric regime for iteration and comparisons.
///
/// `Rational` carries no tolerance by construction (comparisons are exact);
/// `Float` performs IEEE-754 double arithmetic and compares within
/// `tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub enum NumericMode {
    Rational,
    Float { tolerance: f64 },
}

impl NumericMode {
    pub fn float_default() -> Self {
        NumericMode::Float { tolerance: 1e-12 }
    }

    /// Tolerance for approximate comparisons; exactly zero in rational mode.
    pub fn tolerance(&self) -> f64 {
        match self {
            NumericMode::Rational => 0.0,
            NumericMode::Float { tolerance } => *tolerance,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, NumericMode::Rational)
    }
}

/// Parses a decimal string (`-12`, `0.14`, `+3.5e2`) into the exact
/// rational it denotes, so `0.14` becomes 14/100.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    let (mantissa, exp10) = match t.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = t[pos + 1..]
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {t:?}")))?;
            (&t[..pos], exp)
        }
        None => (t, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(pos) => (&digits[..pos], &digits[pos + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("no digits in {t:?}")));
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("malformed number {t:?}")));
    }
    let joined = format!("{int_part}{frac_part}");
    let numer: BigInt = joined
        .parse()
        .map_err(|_| Error::Parse(format!("malformed number {t:?}")))?;
    let scale = frac_part.len() as i64 - exp10;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::new(numer, ten.pow(scale as u32))
    } else {
        Rational::from_integer(numer * ten.pow((-scale) as u32))
    };
    Ok(if sign < 0 { -value } else { value })
}

/// Exact conversion of a finite double into the rational it represents.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::Numeric(format!("non-finite value {x}")))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Renders a rational whose denominator divides a power of ten as the exact
/// decimal string (`14/100` -> `"0.14"`). Returns `None` when no finite
/// decimal expansion exists.
pub fn format_exact_decimal(r: &Rational) -> Option<String> {
    let mut den = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let k = twos.max(fives);
    let scaled = r * Rational::from_integer(BigInt::from(10).pow(k));
    debug_assert!(scaled.is_integer());
    let digits = scaled.to_integer().abs().to_string();
    let sign = if r.is_negative() { "-" } else { "" };
    if k == 0 {
        return Some(format!("{sign}{digits}"));
    }
    let k = k as usize;
    let padded = format!("{digits:0>width$}", width = k + 1);
    let split = padded.len() - k;
    let frac = padded[split..].trim_end_matches('0');
    if frac.is_empty() {
        Some(format!("{sign}{}", &padded[..split]))
    } else {
        Some(format!("{sign}{}.{}", &padded[..split], frac))
    }
}

/// LU factorization of a square rational matrix with row pivoting on the
/// first nonzero entry. Factor once, solve many right-hand sides exactly.
pub struct RationalLu {
    dim: usize,
    /// Combined L (below diagonal, unit diagonal implied) and U.
    lu: Vec<Vec<Rational>>,
    perm: Vec<usize>,
}

impl RationalLu {
    pub fn new(mut m: Vec<Vec<Rational>>) -> Result<Self> {
        let d = m.len();
        if m.iter().any(|row| row.len() != d) {
            return Err(Error::Domain("LU of a non-square matrix".into()));
        }
        let mut perm: Vec<usize> = (0..d).collect();
        for col in 0..d {
            let pivot_row = (col..d)
                .find(|&r| !m[r][col].is_zero())
                .ok_or_else(|| Error::Model("singular matrix: exact zero pivot".into()))?;
            m.swap(col, pivot_row);
            perm.swap(col, pivot_row);
            let pivot = m[col][col].clone();
            #[allow(clippy::needless_range_loop)] // two rows of m are touched at once
            for r in col + 1..d {
                if m[r][col].is_zero() {
                    continue;
                }
                let factor = &m[r][col] / &pivot;
                for c in col + 1..d {
                    let delta = &factor * &m[col][c];
                    m[r][c] -= delta;
                }
                m[r][col] = factor;
            }
        }
        Ok(RationalLu { dim: d, lu: m, perm })
    }

    pub fn solve(&self, rhs: &[Rational]) -> Vec<Rational> {
        assert_eq!(rhs.len(), self.dim, "rhs length mismatch");
        let d = self.dim;
        // forward substitution on the permuted rhs
        let mut y: Vec<Rational> = self.perm.iter().map(|&p| rhs[p].clone()).collect();
        for r in 1..d {
            for c in 0..r {
                let delta = &self.lu[r][c] * &y[c];
                y[r] -= delta;
            }
        }
        // back substitution
        for r in (0..d).rev() {
            for c in r + 1..d {
                let delta = &self.lu[r][c] * &y[c];
                y[r] -= delta;
            }
            y[r] = &y[r] / &self.lu[r][r];
        }
        y
    }
}
