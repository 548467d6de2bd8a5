//! Two-channel identification: ordinary least squares on the centers and
//! nonnegative least squares on the radii.

use nalgebra::{DMatrix, DVector};

use super::{build_regressors, IarxParams};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::nnls::nnls;

/// Relative singular-value floor below which the center design is rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

struct Design {
    x: DMatrix<f64>,
    x_abs: DMatrix<f64>,
    y_center: DVector<f64>,
    y_radius: DVector<f64>,
}

/// Stacks one regression row per sample `k = max(n, m) .. N−1`.
fn design(series: &[Interval], u: &[f64], n: usize, m: usize) -> Result<Design> {
    if series.len() != u.len() {
        return Err(Error::DimensionMismatch {
            what: "input series length",
            expected: series.len(),
            actual: u.len(),
        });
    }
    let start = n.max(m);
    let dim = 1 + n + m;
    let rows = series.len().saturating_sub(start);
    if rows == 0 {
        return Err(Error::InsufficientSamples {
            available: 0,
            required: 1,
        });
    }
    let mut x = DMatrix::zeros(rows, dim);
    let mut x_abs = DMatrix::zeros(rows, dim);
    let mut y_center = DVector::zeros(rows);
    let mut y_radius = DVector::zeros(rows);
    for (row, k) in (start..series.len()).enumerate() {
        let r = build_regressors(series, u, k, n, m)?;
        for j in 0..dim {
            x[(row, j)] = r.x[j];
            x_abs[(row, j)] = r.x_abs[j];
        }
        y_center[row] = series[k].center();
        y_radius[row] = series[k].radius();
    }
    Ok(Design {
        x,
        x_abs,
        y_center,
        y_radius,
    })
}

/// A design with at least one row per parameter.
fn full_design(series: &[Interval], u: &[f64], n: usize, m: usize) -> Result<Design> {
    let d = design(series, u, n, m)?;
    let (rows, dim) = d.x.shape();
    if rows < dim {
        return Err(Error::InsufficientSamples {
            available: rows,
            required: dim,
        });
    }
    Ok(d)
}

/// Least-squares center parameters `A`. Rank-deficient designs are an error.
pub fn fit_center(series: &[Interval], u: &[f64], n: usize, m: usize) -> Result<Vec<f64>> {
    let d = full_design(series, u, n, m)?;
    let cols = d.x.ncols();
    let svd = d.x.svd(true, true);
    let sigma = &svd.singular_values;
    let sigma_max = sigma.max();
    let sigma_min = sigma.min();
    if !(sigma_min > RANK_TOLERANCE * sigma_max) {
        let rank = sigma.iter().filter(|&&s| s > RANK_TOLERANCE * sigma_max).count();
        return Err(Error::RankDeficient {
            rank,
            cols,
            sigma_min,
        });
    }
    let a = svd
        .solve(&d.y_center, 0.0)
        .map_err(|e| Error::Config(format!("least squares solve failed: {e}")))?;
    Ok(a.iter().copied().collect())
}

/// The quadratic program `min CᵀHC − CᵀB, C ≥ 0` with
/// `H = Σ |x||x|ᵀ` and `B = 2 Σ Yr |x|`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub h: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl QpProblem {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn objective(&self, c: &[f64]) -> f64 {
        let c = DVector::from_column_slice(c);
        (c.transpose() * &self.h * &c)[0] - c.dot(&self.b)
    }

    /// `2HC − B`.
    pub fn gradient(&self, c: &[f64]) -> DVector<f64> {
        let c = DVector::from_column_slice(c);
        2.0 * &self.h * c - &self.b
    }

    /// Scaled KKT tolerance `1e-8 · (1 + ‖B‖∞)`.
    pub fn kkt_tolerance(&self) -> f64 {
        1e-8 * (1.0 + self.b.amax())
    }

    /// Largest KKT violation: dual infeasibility `max(0, −g_j)`,
    /// complementarity `|c_j g_j|` and primal infeasibility `max(0, −c_j)`.
    pub fn kkt_violation(&self, c: &[f64]) -> f64 {
        let g = self.gradient(c);
        c.iter()
            .zip(g.iter())
            .map(|(&cj, &gj)| (-gj).max(0.0).max((cj * gj).abs()).max((-cj).max(0.0)))
            .fold(0.0, f64::max)
    }

    /// Projected cyclic coordinate descent on the QP form. Each step
    /// minimizes exactly along one coordinate and clips at zero. Works on
    /// `H` and `B` alone, independent of the regression rows.
    pub fn solve_coordinate_descent(&self, tolerance: f64, max_sweeps: usize) -> Result<Vec<f64>> {
        let d = self.dim();
        let mut c = vec![0.0; d];
        for _ in 0..max_sweeps {
            let mut change: f64 = 0.0;
            for j in 0..d {
                let hjj = self.h[(j, j)];
                if hjj <= 0.0 {
                    // A zero column of |x|: the objective is linear in c_j.
                    let next = if self.b[j] > 0.0 { f64::INFINITY } else { 0.0 };
                    change = change.max((next - c[j]).abs());
                    c[j] = next;
                    continue;
                }
                let off: f64 = (0..d).filter(|&l| l != j).map(|l| self.h[(j, l)] * c[l]).sum();
                let next = ((self.b[j] / 2.0 - off) / hjj).max(0.0);
                change = change.max((next - c[j]).abs());
                c[j] = next;
            }
            if change <= tolerance {
                return Ok(c);
            }
        }
        Err(Error::NoConvergence {
            iterations: max_sweeps,
        })
    }
}

pub fn assemble_qp(series: &[Interval], u: &[f64], n: usize, m: usize) -> Result<QpProblem> {
    let d = design(series, u, n, m)?;
    let h = d.x_abs.transpose() * &d.x_abs;
    let b = 2.0 * d.x_abs.transpose() * &d.y_radius;
    Ok(QpProblem { h, b })
}

/// `J₁(C) = Σ (Yr(k) − Cᵀ|x(k−1)|)²` over the usable rows.
pub fn radius_objective(series: &[Interval], u: &[f64], n: usize, m: usize, c: &[f64]) -> Result<f64> {
    let d = design(series, u, n, m)?;
    if c.len() != d.x_abs.ncols() {
        return Err(Error::DimensionMismatch {
            what: "radius parameter length",
            expected: d.x_abs.ncols(),
            actual: c.len(),
        });
    }
    let r = &d.y_radius - &d.x_abs * DVector::from_column_slice(c);
    Ok(r.norm_squared())
}

/// Nonnegative least-squares radius parameters `C`, solved on the regression
/// form `min ‖Yr − |X| C‖²`, which shares its minimizer with the QP form.
pub fn fit_radius(series: &[Interval], u: &[f64], n: usize, m: usize) -> Result<Vec<f64>> {
    let d = full_design(series, u, n, m)?;
    let sol = nnls(&d.x_abs, &d.y_radius)?;
    Ok(sol.x.iter().map(|&v| v.max(0.0)).collect())
}

/// Fits both channels on an interval series with crisp inputs.
pub fn fit(series: &[Interval], u: &[f64], n: usize, m: usize) -> Result<IarxParams> {
    let a = fit_center(series, u, n, m)?;
    let c = fit_radius(series, u, n, m)?;
    IarxParams::new(n, m, a, c)
}
