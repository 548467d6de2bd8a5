//! Lawson–Hanson active-set nonnegative least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    /// Dual vector `Aᵀ(b − Ax)`; nonpositive (within tolerance) on the zero set.
    pub dual: DVector<f64>,
    pub iterations: usize,
}

/// Solves `min ‖Ax − b‖²` subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<NnlsSolution> {
    let (rows, cols) = a.shape();
    if rows != b.len() {
        return Err(Error::DimensionMismatch {
            what: "nnls right-hand side",
            expected: rows,
            actual: b.len(),
        });
    }
    if cols == 0 {
        return Err(Error::DimensionMismatch {
            what: "nnls needs at least one column",
            expected: 1,
            actual: 0,
        });
    }

    let atb = a.transpose() * b;
    let tol = 1e-12 * (1.0 + atb.amax()) * (1.0 + a.amax());
    let max_iterations = 30 * (cols + 1);

    let mut x = DVector::zeros(cols);
    let mut passive = vec![false; cols];
    let mut dual = atb.clone();
    let mut iterations = 0;

    loop {
        // Entering variable: largest positive dual component on the zero set.
        let entering = (0..cols)
            .filter(|&j| !passive[j] && dual[j] > tol)
            .max_by(|&i, &j| dual[i].total_cmp(&dual[j]));
        let Some(t) = entering else { break };
        passive[t] = true;

        loop {
            iterations += 1;
            if iterations > max_iterations {
                return Err(Error::NoConvergence {
                    iterations: max_iterations,
                });
            }
            let s = passive_solve(a, b, &passive);
            let infeasible: Vec<usize> = (0..cols).filter(|&j| passive[j] && s[j] <= 0.0).collect();
            if infeasible.is_empty() {
                x = s;
                break;
            }
            // Step toward s as far as feasibility allows.
            let alpha = infeasible
                .iter()
                .map(|&j| x[j] / (x[j] - s[j]))
                .fold(f64::INFINITY, f64::min);
            for j in 0..cols {
                if passive[j] {
                    x[j] += alpha * (s[j] - x[j]);
                }
            }
            let mut removed = false;
            for j in 0..cols {
                if passive[j] && x[j] <= 1e-15 * (1.0 + x.amax()) {
                    passive[j] = false;
                    x[j] = 0.0;
                    removed = true;
                }
            }
            if !removed {
                // Rounding left every variable strictly positive; drop the blocking one.
                let j = infeasible[0];
                passive[j] = false;
                x[j] = 0.0;
            }
        }
        dual = a.transpose() * (b - a * &x);
        if passive.iter().all(|&p| p) {
            break;
        }
    }

    Ok(NnlsSolution {
        x,
        dual,
        iterations,
    })
}

/// Unconstrained least squares over the passive columns; zero elsewhere.
fn passive_solve(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    let sub = a.select_columns(idx.iter());
    let svd = sub.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max();
    let z = svd
        .solve(b, eps)
        .unwrap_or_else(|_| DVector::zeros(idx.len()));
    let mut out = DVector::zeros(passive.len());
    for (k, &j) in idx.iter().enumerate() {
        out[j] = z[k];
    }
    out
}
