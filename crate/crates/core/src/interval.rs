//! Interval numbers in bounds form with derived center/radius views.
//!
//! Bounds are the stored representation; center and radius are computed on
//! demand, so the bounds and center/radius versions of each operation are
//! identities to be checked rather than two copies of state.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed real interval `[lower, upper]`. Degenerate intervals are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lower: f64,
    upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidInterval { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    /// Builds `[center - radius, center + radius]`; `radius` must be nonnegative.
    pub fn from_center_radius(center: f64, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidInterval {
                lower: center - radius,
                upper: center + radius,
            });
        }
        Self::new(center - radius, center + radius)
    }

    pub fn point(x: f64) -> Self {
        Self { lower: x, upper: x }
    }

    pub fn zero() -> Self {
        Self::point(0.0)
    }

    #[inline]
    pub fn lower(&self) -> f64 {
        self.lower
    }

    #[inline]
    pub fn upper(&self) -> f64 {
        self.upper
    }

    #[inline]
    pub fn center(&self) -> f64 {
        (self.lower + self.upper) / 2.0
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        (self.upper - self.lower) / 2.0
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// `λ·D`; bounds swap for negative `λ`.
    pub fn scale(self, lambda: f64) -> Self {
        if lambda >= 0.0 {
            Self {
                lower: lambda * self.lower,
                upper: lambda * self.upper,
            }
        } else {
            Self {
                lower: lambda * self.upper,
                upper: lambda * self.lower,
            }
        }
    }

    /// Hausdorff distance between two compact intervals:
    /// `max(|Δlower|, |Δupper|)`, which equals `|Δcenter| + |Δradius|`.
    pub fn hausdorff(&self, other: &Interval) -> f64 {
        (self.lower - other.lower)
            .abs()
            .max((self.upper - other.upper).abs())
    }

    /// The `∘` product with a single parameter pair `[p1; p2]`:
    /// center `a·p1`, radius `c·p2`. Requires `p2 >= 0`.
    pub fn circ_pair(self, p1: f64, p2: f64) -> Result<Self> {
        if !(p2 >= 0.0) {
            return Err(Error::NegativeRadiusCoefficient {
                row: 0,
                col: 0,
                value: p2,
            });
        }
        Self::from_center_radius(self.center() * p1, self.radius() * p2)
    }

    /// The `∘` product with a `2n × m` matrix, producing an `n × m` interval matrix.
    pub fn circ(self, p: &RealMatrix2n) -> IntervalMatrix {
        let (a, c) = (self.center(), self.radius());
        let entries = p
            .first
            .iter()
            .zip(&p.second)
            .map(|(&p1, &p2)| Interval {
                lower: a * p1 - c * p2,
                upper: a * p1 + c * p2,
            })
            .collect();
        IntervalMatrix {
            rows: p.pairs,
            cols: p.cols,
            entries,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

impl Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lower: self.lower + rhs.lower,
            upper: self.upper + rhs.upper,
        }
    }
}

impl Sub for Interval {
    type Output = Interval;

    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lower: self.lower - rhs.upper,
            upper: self.upper - rhs.lower,
        }
    }
}

impl Mul<Interval> for f64 {
    type Output = Interval;

    fn mul(self, rhs: Interval) -> Interval {
        rhs.scale(self)
    }
}

impl Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::zero(), Add::add)
    }
}

/// A `2n × m` real matrix whose rows alternate between center coefficients
/// (`p¹`) and radius coefficients (`p²`). Every `p²` entry is nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix2n {
    pairs: usize,
    cols: usize,
    /// `p¹` entries, `pairs × cols` row-major.
    first: Vec<f64>,
    /// `p²` entries, `pairs × cols` row-major.
    second: Vec<f64>,
}

impl RealMatrix2n {
    /// Builds the matrix from its `2n` rows, each of length `m`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows.len() % 2 != 0 {
            return Err(Error::DimensionMismatch {
                what: "row count must be even and positive",
                expected: rows.len() + rows.len() % 2,
                actual: rows.len(),
            });
        }
        let cols = rows[0].len();
        let pairs = rows.len() / 2;
        let mut first = Vec::with_capacity(pairs * cols);
        let mut second = Vec::with_capacity(pairs * cols);
        for (i, pair) in rows.chunks(2).enumerate() {
            for row in pair {
                if row.len() != cols {
                    return Err(Error::DimensionMismatch {
                        what: "ragged matrix rows",
                        expected: cols,
                        actual: row.len(),
                    });
                }
            }
            for (j, &v) in pair[1].iter().enumerate() {
                if !(v >= 0.0) {
                    return Err(Error::NegativeRadiusCoefficient {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
            first.extend_from_slice(&pair[0]);
            second.extend_from_slice(&pair[1]);
        }
        Ok(Self {
            pairs,
            cols,
            first,
            second,
        })
    }

    /// Number of `(p¹, p²)` row pairs, i.e. `n`.
    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn p1(&self, i: usize, j: usize) -> f64 {
        self.first[i * self.cols + j]
    }

    pub fn p2(&self, i: usize, j: usize) -> f64 {
        self.second[i * self.cols + j]
    }
}

/// Result of `∘`: an `n × m` matrix of intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Interval>,
}

impl IntervalMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Interval {
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[Interval] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(l: f64, u: f64) -> Interval {
        Interval::new(l, u).unwrap()
    }

    fn cr(c: f64, r: f64) -> Interval {
        Interval::from_center_radius(c, r).unwrap()
    }

    #[test]
    fn addition() {
        assert_eq!(iv(1.0, 3.0) + iv(2.0, 4.0), iv(3.0, 7.0));
        assert_eq!(Interval::zero() + iv(-2.5, 4.0), iv(-2.5, 4.0));
        let s = cr(2.0, 1.0) + cr(3.0, 2.0);
        assert_eq!((s.center(), s.radius()), (5.0, 3.0));
    }

    #[test]
    fn subtraction() {
        assert_eq!(iv(1.0, 3.0) - iv(0.0, 1.0), iv(0.0, 3.0));
        let d = iv(2.0, 5.0);
        assert_eq!(d - d, iv(-3.0, 3.0));
        let s = cr(5.0, 1.0) - cr(2.0, 2.0);
        assert_eq!((s.center(), s.radius()), (3.0, 3.0));
    }

    #[test]
    fn scaling() {
        assert_eq!(2.0 * iv(1.0, 3.0), iv(2.0, 6.0));
        assert_eq!(-2.0 * iv(1.0, 3.0), iv(-6.0, -2.0));
        let z = 0.0 * iv(1.0, 3.0);
        assert_eq!((z.lower(), z.upper()), (0.0, 0.0));
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(iv(0.0, 1.0).hausdorff(&iv(0.0, 1.0)), 0.0);
        assert_eq!(iv(0.0, 1.0).hausdorff(&iv(2.0, 4.0)), 3.0);
        assert_eq!(iv(-1.0, 1.0).hausdorff(&iv(0.0, 1.0)), 1.0);
    }

    #[test]
    fn rejects_inverted_bounds() {
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::from_center_radius(0.0, -1e-9).is_err());
        assert!(Interval::new(1.0, 1.0).is_ok());
    }

    #[test]
    fn circ_column_vector() {
        let d = cr(2.0, 1.0);
        let p = RealMatrix2n::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        assert_eq!(d.circ(&p).get(0, 0), cr(2.0, 1.0));

        let p = RealMatrix2n::from_rows(&[vec![3.0], vec![0.5]]).unwrap();
        let e = d.circ(&p).get(0, 0);
        assert_eq!((e.center(), e.radius()), (6.0, 0.5));

        let d = cr(-1.0, 2.0);
        let p = RealMatrix2n::from_rows(&[vec![1.0], vec![0.0], vec![-2.0], vec![3.0]]).unwrap();
        let out = d.circ(&p);
        assert_eq!(out.rows(), 2);
        assert_eq!((out.get(0, 0).center(), out.get(0, 0).radius()), (-1.0, 0.0));
        assert_eq!((out.get(1, 0).center(), out.get(1, 0).radius()), (2.0, 6.0));
    }

    #[test]
    fn circ_general_matrix() {
        let d = cr(1.5, 0.5);
        let p = RealMatrix2n::from_rows(&[vec![1.0, -1.0, 2.0], vec![0.0, 2.0, 4.0]]).unwrap();
        let out = d.circ(&p);
        assert_eq!((out.rows(), out.cols()), (1, 3));
        assert_eq!(out.get(0, 1), cr(-1.5, 1.0));
        assert_eq!(out.get(0, 2), cr(3.0, 2.0));
    }

    #[test]
    fn circ_rejects_negative_radius_row() {
        let err = RealMatrix2n::from_rows(&[vec![1.0], vec![1.0], vec![1.0], vec![-0.1]]).unwrap_err();
        assert!(matches!(err, Error::NegativeRadiusCoefficient { row: 1, col: 0, .. }));
        assert!(cr(1.0, 1.0).circ_pair(1.0, -0.5).is_err());
        assert!(RealMatrix2n::from_rows(&[vec![1.0]]).is_err());
    }
}
