//! Moving-pattern modeling end to end: encode the operating condition as
//! pattern-class intervals, identify the IARX model on them, forecast one
//! step ahead, classify the preliminary forecast into a final class interval,
//! and score both outputs. Also the CPMS sweep and the parameter
//! perturbation experiment.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::model::{self, build_regressors, predict, IarxParams};
use crate::pattern_space::{build_space_with_retries, FcmConfig, PatternSpace, DEFAULT_RESEED_ATTEMPTS};

/// Header shared by RMSE, sweep and robustness tables.
pub const RMSE_HEADER: [&str; 5] = [
    "cpms",
    "prelim_upper_rmse",
    "prelim_lower_rmse",
    "final_upper_rmse",
    "final_lower_rmse",
];

pub const TRACE_HEADER: [&str; 8] = [
    "k",
    "dx_lower",
    "dx_upper",
    "prelim_lower",
    "prelim_upper",
    "final_lower",
    "final_upper",
    "class_id",
];

/// Pattern-class variable series with its crisp input.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSeries {
    pub dx: Vec<Interval>,
    pub ids: Vec<usize>,
    pub u: Vec<f64>,
}

impl EncodedSeries {
    pub fn encode(space: &PatternSpace, data: &[f64], u: &[f64]) -> Result<Self> {
        if data.len() != u.len() {
            return Err(Error::DimensionMismatch {
                what: "input length",
                expected: data.len(),
                actual: u.len(),
            });
        }
        Ok(Self {
            dx: space.encode_series(data),
            ids: space.encode_ids(data),
            u: u.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.dx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dx.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovingPatternModel {
    pub space: PatternSpace,
    pub params: IarxParams,
}

impl MovingPatternModel {
    pub fn new(space: PatternSpace, params: IarxParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { space, params })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn m(&self) -> usize {
        self.params.m
    }

    pub fn with_params(&self, params: IarxParams) -> Result<Self> {
        Self::new(self.space.clone(), params)
    }
}

/// Builds the pattern space with `cpms` classes, encodes `data`, and fits
/// both IARX channels on the encoded series.
pub fn fit_model(
    data: &[f64],
    u: &[f64],
    cpms: usize,
    n: usize,
    m: usize,
    fcm: &FcmConfig,
) -> Result<MovingPatternModel> {
    if data.len() != u.len() {
        return Err(Error::DimensionMismatch {
            what: "input length",
            expected: data.len(),
            actual: u.len(),
        });
    }
    if cpms < 2 {
        return Err(Error::Config(format!("cpms must be at least 2, got {cpms}")));
    }
    let required = (1 + n + m + n.max(m)).max(cpms);
    if data.len() < required {
        return Err(Error::InsufficientSamples {
            available: data.len(),
            required,
        });
    }
    let config = FcmConfig {
        k: cpms,
        ..fcm.clone()
    };
    let space = build_space_with_retries(data, &config, DEFAULT_RESEED_ATTEMPTS)?;
    let encoded = EncodedSeries::encode(&space, data, u)?;
    let params = model::fit(&encoded.dx, u, n, m)?;
    MovingPatternModel::new(space, params)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forecast {
    pub prelim: Interval,
    pub final_: Interval,
    pub class_id: usize,
}

/// Preliminary forecast for sample `k` from the true history, then its
/// nearest class as the final forecast.
pub fn forecast_step(
    model: &MovingPatternModel,
    history: &[Interval],
    u: &[f64],
    k: usize,
) -> Result<Forecast> {
    let regr = build_regressors(history, u, k, model.n(), model.m())?;
    let prelim = predict(&model.params, &regr)?;
    let class_id = model.space.classify(&prelim);
    let final_ = model.space.measure(class_id)?;
    Ok(Forecast {
        prelim,
        final_,
        class_id,
    })
}

/// Which steps to score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalRange {
    /// Every step with a full lag window, `max(n, m) .. N`.
    #[default]
    InSample,
    /// Steps `start .. end`, clamped below to `max(n, m)`.
    HeldOut { start: usize, end: usize },
}

impl EvalRange {
    fn bounds(self, len: usize, max_lag: usize) -> (usize, usize) {
        match self {
            EvalRange::InSample => (max_lag, len),
            EvalRange::HeldOut { start, end } => (start.max(max_lag), end.min(len)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub dx: Interval,
    pub prelim: Interval,
    pub final_: Interval,
    pub class_id: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmseReport {
    pub prelim_upper: f64,
    pub prelim_lower: f64,
    pub final_upper: f64,
    pub final_lower: f64,
}

impl RmseReport {
    pub fn from_trace(trace: &[TraceRow]) -> Result<Self> {
        if trace.is_empty() {
            return Err(Error::EmptyRange);
        }
        let n = trace.len() as f64;
        let rmse = |f: &dyn Fn(&TraceRow) -> f64| (trace.iter().map(|r| f(r).powi(2)).sum::<f64>() / n).sqrt();
        Ok(Self {
            prelim_upper: rmse(&|r| r.dx.upper() - r.prelim.upper()),
            prelim_lower: rmse(&|r| r.dx.lower() - r.prelim.lower()),
            final_upper: rmse(&|r| r.dx.upper() - r.final_.upper()),
            final_lower: rmse(&|r| r.dx.lower() - r.final_.lower()),
        })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [
            self.prelim_upper,
            self.prelim_lower,
            self.final_upper,
            self.final_lower,
        ]
    }
}

/// One-step-ahead forecasts over `range`, with true encoded history as regressors.
pub fn trace(model: &MovingPatternModel, encoded: &EncodedSeries, range: EvalRange) -> Result<Vec<TraceRow>> {
    let (start, end) = range.bounds(encoded.len(), model.params.max_lag());
    if start >= end {
        return Err(Error::EmptyRange);
    }
    (start..end)
        .map(|k| {
            let f = forecast_step(model, &encoded.dx, &encoded.u, k)?;
            Ok(TraceRow {
                k,
                dx: encoded.dx[k],
                prelim: f.prelim,
                final_: f.final_,
                class_id: f.class_id,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: RmseReport,
    pub trace: Vec<TraceRow>,
}

/// Encodes `data` with the model's space and scores one-step forecasts.
pub fn evaluate(model: &MovingPatternModel, data: &[f64], u: &[f64], range: EvalRange) -> Result<Evaluation> {
    let encoded = EncodedSeries::encode(&model.space, data, u)?;
    evaluate_encoded(model, &encoded, range)
}

pub fn evaluate_encoded(model: &MovingPatternModel, encoded: &EncodedSeries, range: EvalRange) -> Result<Evaluation> {
    let trace = trace(model, encoded, range)?;
    let report = RmseReport::from_trace(&trace)?;
    Ok(Evaluation { report, trace })
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub cpms: usize,
    pub result: std::result::Result<RmseReport, String>,
}

/// Fits and scores one model per CPMS value. Cells run in parallel; rows come
/// back in the order of `cpms_values`, and a failed cell does not stop the rest.
pub fn sweep_cpms(
    data: &[f64],
    u: &[f64],
    cpms_values: &[usize],
    n: usize,
    m: usize,
    fcm: &FcmConfig,
) -> Vec<SweepRow> {
    cpms_values
        .par_iter()
        .map(|&cpms| {
            let result = fit_model(data, u, cpms, n, m, fcm)
                .and_then(|model| evaluate(&model, data, u, EvalRange::InSample))
                .map(|e| e.report)
                .map_err(|e| e.to_string());
            SweepRow { cpms, result }
        })
        .collect()
}

/// `C + ε` with each `ε_j ~ Uniform[0, magnitude]`.
pub fn perturb_radius_params(c: &[f64], magnitude: f64, seed: u64) -> Result<Vec<f64>> {
    if !(magnitude >= 0.0) || !magnitude.is_finite() {
        return Err(Error::Config(format!("magnitude must be nonnegative, got {magnitude}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(c.iter()
        .map(|&cj| {
            let eps: f64 = rng.random::<f64>() * magnitude;
            cj + eps
        })
        .collect())
}

/// `A + ε` with each `ε_j ~ Uniform[−magnitude, magnitude]`. Not part of the
/// reference robustness protocol, which perturbs only `C`.
pub fn perturb_center_params(a: &[f64], magnitude: f64, seed: u64) -> Result<Vec<f64>> {
    if !(magnitude >= 0.0) || !magnitude.is_finite() {
        return Err(Error::Config(format!("magnitude must be nonnegative, got {magnitude}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    Ok(a.iter()
        .map(|&aj| aj + (2.0 * rng.random::<f64>() - 1.0) * magnitude)
        .collect())
}

#[derive(Debug, Clone)]
pub struct RobustnessReport {
    pub original: RmseReport,
    pub perturbed: RmseReport,
    pub perturbed_params: IarxParams,
    /// Every scored step classified the same way under both parameter sets.
    pub classes_match: bool,
    pub changed_steps: usize,
}

/// Scores the model as fitted and with perturbed radius parameters (and,
/// optionally, perturbed center parameters) on the same data.
pub fn robustness_experiment(
    model: &MovingPatternModel,
    data: &[f64],
    u: &[f64],
    magnitude: f64,
    seed: u64,
    perturb_center: bool,
) -> Result<RobustnessReport> {
    let encoded = EncodedSeries::encode(&model.space, data, u)?;
    let base = evaluate_encoded(model, &encoded, EvalRange::InSample)?;
    let mut params = model.params.clone();
    params.c = perturb_radius_params(&params.c, magnitude, seed)?;
    if perturb_center {
        params.a = perturb_center_params(&params.a, magnitude, seed)?;
    }
    let perturbed_model = model.with_params(params.clone())?;
    let varied = evaluate_encoded(&perturbed_model, &encoded, EvalRange::InSample)?;
    let changed_steps = base
        .trace
        .iter()
        .zip(&varied.trace)
        .filter(|(a, b)| a.class_id != b.class_id)
        .count();
    Ok(RobustnessReport {
        original: base.report,
        perturbed: varied.report,
        perturbed_params: params,
        classes_match: changed_steps == 0,
        changed_steps,
    })
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn report_fields(cpms: usize, r: &RmseReport) -> Vec<String> {
    std::iter::once(cpms.to_string())
        .chain(r.as_array().iter().map(|v| v.to_string()))
        .collect()
}

pub fn write_rmse_csv(path: &Path, cpms: usize, report: &RmseReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RMSE_HEADER).map_err(csv_err(path))?;
    w.write_record(report_fields(cpms, report)).map_err(csv_err(path))?;
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_trace_csv(path: &Path, trace: &[TraceRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(TRACE_HEADER).map_err(csv_err(path))?;
    for r in trace {
        w.write_record([
            r.k.to_string(),
            r.dx.lower().to_string(),
            r.dx.upper().to_string(),
            r.prelim.lower().to_string(),
            r.prelim.upper().to_string(),
            r.final_.lower().to_string(),
            r.final_.upper().to_string(),
            r.class_id.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// The five RMSE columns plus a trailing `status` column (`ok` or the error).
/// Failed rows leave the RMSE fields empty.
pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = writer(path)?;
    let mut header: Vec<&str> = RMSE_HEADER.to_vec();
    header.push("status");
    w.write_record(&header).map_err(csv_err(path))?;
    for row in rows {
        let mut fields = match &row.result {
            Ok(r) => report_fields(row.cpms, r),
            Err(_) => {
                let mut f = vec![row.cpms.to_string()];
                f.extend(std::iter::repeat_n(String::new(), 4));
                f
            }
        };
        fields.push(match &row.result {
            Ok(_) => "ok".to_string(),
            Err(e) => format!("failed: {e}"),
        });
        w.write_record(fields).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Two rows, original then perturbed parameters. Trailing columns name the
/// row's parameter set, list its `C`, and flag whether any final
/// classification changed.
pub fn write_robust_csv(path: &Path, cpms: usize, original: &IarxParams, report: &RobustnessReport) -> Result<()> {
    let mut w = writer(path)?;
    let mut header: Vec<&str> = RMSE_HEADER.to_vec();
    header.extend(["params", "c", "final_changed"]);
    w.write_record(&header).map_err(csv_err(path))?;
    let join = |c: &[f64]| c.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
    let flag = (!report.classes_match).to_string();
    for (label, r, p) in [
        ("C", &report.original, original),
        ("C1", &report.perturbed, &report.perturbed_params),
    ] {
        let mut fields = report_fields(cpms, r);
        fields.extend([label.to_string(), join(&p.c), flag.clone()]);
        w.write_record(fields).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
