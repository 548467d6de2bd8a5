//! The interval ARX model.
//!
//! An IARX model of orders `(n, m)` maps `n` lagged interval outputs and `m`
//! lagged crisp inputs to an interval forecast. Centers follow `Aᵀx` over
//! `x = [1, centers, inputs]`, radii follow `Cᵀ|x|` over
//! `|x| = [1, radii, |inputs|]`, with `C ≥ 0`.

mod identify;

use serde::{Deserialize, Serialize};

pub use identify::{assemble_qp, fit, fit_center, fit_radius, radius_objective, QpProblem};

use crate::error::{Error, Result};
use crate::interval::{Interval, RealMatrix2n};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IarxParams {
    pub n: usize,
    pub m: usize,
    /// Center channel: `[p0c, p1¹..pn¹, p(1+n)c..p(m+n)c]`.
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    /// Radius channel: `[p0r, p1²..pn², p(1+n)r..p(m+n)r]`, all nonnegative.
    #[serde(rename = "C")]
    pub c: Vec<f64>,
}

impl IarxParams {
    pub fn new(n: usize, m: usize, a: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let params = Self { n, m, a, c };
        params.validate()?;
        Ok(params)
    }

    pub fn dim(&self) -> usize {
        1 + self.n + self.m
    }

    /// Number of leading samples without a full lag window.
    pub fn max_lag(&self) -> usize {
        self.n.max(self.m)
    }

    pub fn validate(&self) -> Result<()> {
        for (what, v) in [("A", &self.a), ("C", &self.c)] {
            if v.len() != self.dim() {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: self.dim(),
                    actual: v.len(),
                });
            }
        }
        if let Some((index, &value)) = self.c.iter().enumerate().find(|(_, &v)| !(v >= 0.0)) {
            return Err(Error::NegativeRadiusParam { index, value });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressorPair {
    /// `[1, Yc(k−1)..Yc(k−n), u(k−1)..u(k−m)]`
    pub x: Vec<f64>,
    /// `[1, Yr(k−1)..Yr(k−n), |u(k−1)|..|u(k−m)|]`
    pub x_abs: Vec<f64>,
}

/// Regressors for predicting sample `k` (0-based). Needs `k ≥ max(n, m)`.
pub fn build_regressors(
    history: &[Interval],
    inputs: &[f64],
    k: usize,
    n: usize,
    m: usize,
) -> Result<RegressorPair> {
    let required = n.max(m);
    if k < required || (n > 0 && k > history.len()) || (m > 0 && k > inputs.len()) {
        return Err(Error::InsufficientHistory { k, required });
    }
    let mut x = Vec::with_capacity(1 + n + m);
    let mut x_abs = Vec::with_capacity(1 + n + m);
    x.push(1.0);
    x_abs.push(1.0);
    for j in 1..=n {
        let y = history[k - j];
        x.push(y.center());
        x_abs.push(y.radius());
    }
    for l in 1..=m {
        let u = inputs[k - l];
        x.push(u);
        x_abs.push(u.abs());
    }
    Ok(RegressorPair { x, x_abs })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Closed-form forecast `(Aᵀx, Cᵀ|x|)`.
pub fn predict(params: &IarxParams, regr: &RegressorPair) -> Result<Interval> {
    params.validate()?;
    if regr.x.len() != params.dim() || regr.x_abs.len() != params.dim() {
        return Err(Error::DimensionMismatch {
            what: "regressor length",
            expected: params.dim(),
            actual: regr.x.len(),
        });
    }
    Interval::from_center_radius(dot(&params.a, &regr.x), dot(&params.c, &regr.x_abs))
}

/// Evaluates the model term by term in interval arithmetic: the interval
/// intercept, one `∘` product per output lag, and one scalar·interval product
/// per input lag, summed with interval addition. Agrees with [`predict`] up
/// to rounding.
pub fn predict_compositional(
    params: &IarxParams,
    history: &[Interval],
    inputs: &[f64],
    k: usize,
) -> Result<Interval> {
    params.validate()?;
    let (n, m) = (params.n, params.m);
    let required = n.max(m);
    if k < required || (n > 0 && k > history.len()) || (m > 0 && k > inputs.len()) {
        return Err(Error::InsufficientHistory { k, required });
    }
    let mut total = Interval::from_center_radius(params.a[0], params.c[0])?;
    for j in 1..=n {
        let pair = RealMatrix2n::from_rows(&[vec![params.a[j]], vec![params.c[j]]])?;
        total = total + history[k - j].circ(&pair).get(0, 0);
    }
    for l in 1..=m {
        let idx = n + l;
        let p = Interval::from_center_radius(params.a[idx], params.c[idx])?;
        total = total + inputs[k - l] * p;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(l: f64, u: f64) -> Interval {
        Interval::new(l, u).unwrap()
    }

    #[test]
    fn regressor_read_off() {
        let r = build_regressors(&[iv(0.0, 2.0)], &[-3.0], 1, 1, 1).unwrap();
        assert_eq!(r.x, vec![1.0, 1.0, -3.0]);
        assert_eq!(r.x_abs, vec![1.0, 1.0, 3.0]);

        let hist = vec![iv(0.0, 0.0); 4];
        let r = build_regressors(&hist, &[0.0; 4], 3, 3, 1).unwrap();
        assert_eq!(r.x.len(), 5);
        assert_eq!(r.x, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.x_abs, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn regressor_lag_order() {
        let hist = [iv(0.0, 2.0), iv(1.0, 5.0), iv(2.0, 2.5)];
        let r = build_regressors(&hist, &[7.0, -8.0, 9.0], 3, 2, 2).unwrap();
        assert_eq!(r.x, vec![1.0, 2.25, 3.0, 9.0, -8.0]);
        assert_eq!(r.x_abs, vec![1.0, 0.25, 2.0, 9.0, 8.0]);
    }

    #[test]
    fn insufficient_history() {
        let hist = [iv(0.0, 1.0); 3];
        assert!(matches!(
            build_regressors(&hist, &[0.0; 3], 2, 3, 1),
            Err(Error::InsufficientHistory { .. })
        ));
        let p = IarxParams::new(3, 1, vec![0.0; 5], vec![0.0; 5]).unwrap();
        assert!(predict_compositional(&p, &hist, &[0.0; 3], 1).is_err());
    }

    #[test]
    fn unit_lag_identity() {
        let p = IarxParams::new(1, 1, vec![0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0]).unwrap();
        let r = build_regressors(&[iv(1.0, 3.0)], &[42.0], 1, 1, 1).unwrap();
        assert_eq!(predict(&p, &r).unwrap(), iv(1.0, 3.0));
    }

    #[test]
    fn reported_parameters_dot_products() {
        let p = IarxParams::new(
            3,
            1,
            vec![0.0055, 1.2369, 0.0356, -0.2880, -0.0085],
            vec![0.0124, 0.8898, 0.0, 0.0, 0.0018],
        )
        .unwrap();
        let hist = [iv(-0.4387, -0.2304), iv(-0.2210, -0.0215), iv(-0.0196, 0.2056)];
        let r = build_regressors(&hist, &[0.0, 0.0, -1.5], 3, 3, 1).unwrap();
        let y = predict(&p, &r).unwrap();
        // Hand computation with centers (0.093, -0.12125, -0.33455) and
        // radii (0.1126, 0.09975, 0.10415) taken newest first.
        let center = 0.0055 + 1.2369 * 0.093 + 0.0356 * -0.12125 - 0.2880 * -0.33455 - 0.0085 * -1.5;
        let radius = 0.0124 + 0.8898 * 0.1126 + 0.0018 * 1.5;
        assert!((y.center() - center).abs() < 1e-12);
        assert!((y.radius() - radius).abs() < 1e-12);
    }

    #[test]
    fn intercept_only() {
        let p = IarxParams::new(2, 1, vec![0.5, 1.0, 2.0, 3.0], vec![0.25, 1.0, 1.0, 1.0]).unwrap();
        let r = RegressorPair {
            x: vec![1.0, 0.0, 0.0, 0.0],
            x_abs: vec![1.0, 0.0, 0.0, 0.0],
        };
        let y = predict(&p, &r).unwrap();
        assert_eq!((y.center(), y.radius()), (0.5, 0.25));
    }

    #[test]
    fn compositional_identity_map() {
        let p = IarxParams::new(1, 0, vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let y = predict_compositional(&p, &[iv(-2.0, 5.0)], &[], 1).unwrap();
        assert_eq!(y, iv(-2.0, 5.0));
    }

    #[test]
    fn compositional_two_lags_by_hand() {
        // p0 = (0.5, 0.1); p1 = [2; 0.5]; p2 = [-1; 0.25]; p3 = (0.3, 0.2), u = -2.
        // Y(k-1) = (1, 0.4), Y(k-2) = (3, 2).
        // Lag terms: (2, 0.2) and (-3, 0.5); input term: (-0.6, 0.4).
        // Sum: (0.5 + 2 - 3 - 0.6, 0.1 + 0.2 + 0.5 + 0.4) = (-1.1, 1.2).
        let p = IarxParams::new(2, 1, vec![0.5, 2.0, -1.0, 0.3], vec![0.1, 0.5, 0.25, 0.2]).unwrap();
        let hist = [
            Interval::from_center_radius(3.0, 2.0).unwrap(),
            Interval::from_center_radius(1.0, 0.4).unwrap(),
        ];
        let y = predict_compositional(&p, &hist, &[0.0, -2.0], 2).unwrap();
        assert!((y.center() + 1.1).abs() < 1e-12);
        assert!((y.radius() - 1.2).abs() < 1e-12);
        let z = predict(&p, &build_regressors(&hist, &[0.0, -2.0], 2, 2, 1).unwrap()).unwrap();
        assert!((y.lower() - z.lower()).abs() < 1e-12 && (y.upper() - z.upper()).abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(IarxParams::new(1, 1, vec![0.0; 3], vec![0.0, -0.1, 0.0]).is_err());
        assert!(IarxParams::new(1, 1, vec![0.0; 2], vec![0.0; 3]).is_err());
        let bad = IarxParams {
            n: 1,
            m: 0,
            a: vec![0.0, 1.0],
            c: vec![0.0],
        };
        let r = RegressorPair {
            x: vec![1.0, 0.0],
            x_abs: vec![1.0, 0.0],
        };
        assert!(matches!(predict(&bad, &r), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn json_layout() {
        let p = IarxParams::new(1, 0, vec![0.1, 0.2], vec![0.3, 0.0]).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"n":1,"m":0,"A":[0.1,0.2],"C":[0.3,0.0]}"#);
        let back: IarxParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}
