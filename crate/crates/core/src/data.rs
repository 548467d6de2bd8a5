//! Data ingestion, preprocessing (z-score normalization and a one-component
//! PCA) and a synthetic IARX data generator.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::model::{build_regressors, IarxParams};

/// Named, equal-length numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    /// Seconds between samples; metadata only.
    pub sample_period: Option<f64>,
}

impl RawDataset {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() || names.is_empty() {
            return Err(Error::Config("dataset needs one name per column".into()));
        }
        let len = columns[0].len();
        if columns.iter().any(|c| c.len() != len) {
            return Err(Error::Config("dataset columns differ in length".into()));
        }
        if len < 2 {
            return Err(Error::Config(format!("dataset needs at least 2 rows, got {len}")));
        }
        Ok(Self {
            names,
            columns,
            sample_period: None,
        })
    }

    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }
}

/// Reads a comma-separated file with a header row. Row numbers in errors are
/// file line numbers (the header is line 1).
pub fn load_csv(path: &Path) -> Result<RawDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| csv_error(path, source))?;
    let names: Vec<String> = reader
        .headers()
        .map_err(|source| csv_error(path, source))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut columns = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(|source| csv_error(path, source))?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != names.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row,
                column: names.get(record.len()).cloned().unwrap_or_default(),
                message: format!("expected {} fields, found {}", names.len(), record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row,
                column: names[j].clone(),
                message: format!("not a number: {cell:?}"),
            })?;
            columns[j].push(value);
        }
    }
    RawDataset::new(names, columns)
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    if let csv::ErrorKind::Io(_) = source.kind() {
        let csv::ErrorKind::Io(io) = source.into_kind() else {
            unreachable!()
        };
        return Error::Io {
            path: path.to_path_buf(),
            source: io,
        };
    }
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Normalization {
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    pub fn invert(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

/// `(x − mean) / std` with the population standard deviation.
pub fn zero_mean_normalize(column: &[f64]) -> Result<(Vec<f64>, Normalization)> {
    if column.is_empty() {
        return Err(Error::ConstantColumn);
    }
    let n = column.len() as f64;
    let mean = column.iter().sum::<f64>() / n;
    let var = column.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if !(std > 0.0) || !std.is_finite() {
        return Err(Error::ConstantColumn);
    }
    let norm = Normalization { mean, std };
    Ok((column.iter().map(|&x| norm.apply(x)).collect(), norm))
}

#[derive(Debug, Clone)]
pub struct PcaProjection {
    /// Projection of every row onto the leading principal direction.
    pub scores: Vec<f64>,
    /// Unit loading vector; its first nonzero entry is positive.
    pub loading: Vec<f64>,
    /// Leading eigenvalue of the population covariance.
    pub eigenvalue: f64,
    /// Fraction of total variance captured.
    pub explained: f64,
}

/// Projects rows of `columns` onto the first principal component.
pub fn pca_project(columns: &[Vec<f64>]) -> Result<PcaProjection> {
    let p = columns.len();
    if p < 2 {
        return Err(Error::Config(format!("PCA needs at least 2 columns, got {p}")));
    }
    let rows = columns[0].len();
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::Config("PCA columns differ in length".into()));
    }
    if rows < p {
        return Err(Error::Config(format!("PCA needs at least {p} rows, got {rows}")));
    }
    let means: Vec<f64> = columns.iter().map(|c| c.iter().sum::<f64>() / rows as f64).collect();
    let centered = DMatrix::from_fn(rows, p, |i, j| columns[j][i] - means[j]);
    let cov = (centered.transpose() * &centered) / rows as f64;
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let first = eig.eigenvalues[order[0]];
    let second = eig.eigenvalues[order[1]];
    if !(first - second > 1e-9 * first.abs().max(f64::MIN_POSITIVE)) {
        return Err(Error::EigenTie { first, second });
    }
    let mut loading: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
    if let Some(&lead) = loading.iter().find(|v| v.abs() > 1e-12) {
        if lead < 0.0 {
            loading.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let scores = (0..rows)
        .map(|i| (0..p).map(|j| centered[(i, j)] * loading[j]).sum())
        .collect();
    let total: f64 = eig.eigenvalues.iter().sum();
    Ok(PcaProjection {
        scores,
        loading,
        eigenvalue: first,
        explained: first / total,
    })
}

/// Operating-condition series and normalized input ready for modeling.
#[derive(Debug, Clone)]
pub struct PreparedSeries {
    pub condition: Vec<f64>,
    pub input: Vec<f64>,
}

/// Normalizes every non-input column; several condition columns are reduced
/// to one with PCA. The input column is normalized the same way.
pub fn prepare(dataset: &RawDataset, input_col: &str) -> Result<PreparedSeries> {
    let input = dataset
        .column(input_col)
        .ok_or_else(|| Error::Config(format!("input column {input_col:?} not found")))?;
    let (input, _) = zero_mean_normalize(input)?;
    let normalized = dataset
        .names
        .iter()
        .zip(&dataset.columns)
        .filter(|(name, _)| name.as_str() != input_col)
        .map(|(_, col)| zero_mean_normalize(col).map(|(z, _)| z))
        .collect::<Result<Vec<_>>>()?;
    let condition = match normalized.len() {
        0 => return Err(Error::Config("no operating-condition columns besides the input".into())),
        1 => normalized.into_iter().next().unwrap_or_default(),
        _ => pca_project(&normalized)?.scores,
    };
    Ok(PreparedSeries { condition, input })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputProcess {
    /// Independent draws from `Uniform[−amplitude, amplitude]`.
    WhiteNoise { amplitude: f64 },
    /// Cycles through `levels`, holding each for `hold` samples.
    Steps { levels: Vec<f64>, hold: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub length: usize,
    pub true_params: IarxParams,
    /// Suggested CPMS for models fit on this data.
    pub class_count: usize,
    pub noise_center: f64,
    pub noise_radius: f64,
    pub input: InputProcess,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// 864 samples, `n = 3`, `m = 1`, 26 classes.
    fn default() -> Self {
        Self {
            length: 864,
            true_params: IarxParams {
                n: 3,
                m: 1,
                a: vec![0.0, 1.8, -0.8, -0.002, 0.01],
                c: vec![0.02, 0.5, 0.15, 0.1, 0.05],
            },
            class_count: 26,
            noise_center: 0.002,
            noise_radius: 0.01,
            input: InputProcess::WhiteNoise { amplitude: 1.0 },
            seed: 21,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        self.true_params.validate()?;
        let min_len = 10 * self.true_params.dim();
        if self.length < min_len {
            return Err(Error::Config(format!(
                "synthetic length {} below the minimum {min_len}",
                self.length
            )));
        }
        if !(self.noise_center >= 0.0) || !(self.noise_radius >= 0.0) {
            return Err(Error::Config("noise levels must be nonnegative".into()));
        }
        match &self.input {
            InputProcess::WhiteNoise { amplitude } if !(*amplitude >= 0.0) => {
                Err(Error::Config("input amplitude must be nonnegative".into()))
            }
            InputProcess::Steps { levels, hold } if levels.is_empty() || *hold == 0 => {
                Err(Error::Config("step input needs levels and a positive hold".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    /// Scalar operating-condition stream: the simulated interval centers.
    pub data: Vec<f64>,
    pub u: Vec<f64>,
    /// The simulated interval trajectory.
    pub intervals: Vec<Interval>,
    pub ground_truth: IarxParams,
}

const DIVERGENCE_LIMIT: f64 = 1e6;

/// Runs the IARX recursion forward from a steady-state history.
pub fn synthesize(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let p = &spec.true_params;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let u: Vec<f64> = match &spec.input {
        InputProcess::WhiteNoise { amplitude } => (0..spec.length)
            .map(|_| {
                if *amplitude > 0.0 {
                    rng.random_range(-amplitude..=*amplitude)
                } else {
                    0.0
                }
            })
            .collect(),
        InputProcess::Steps { levels, hold } => (0..spec.length)
            .map(|k| levels[(k / hold) % levels.len()])
            .collect(),
    };
    let center_noise = Normal::new(0.0, spec.noise_center)
        .map_err(|e| Error::Config(format!("center noise: {e}")))?;
    let radius_noise = Normal::new(0.0, spec.noise_radius)
        .map_err(|e| Error::Config(format!("radius noise: {e}")))?;

    let lag_gain = |v: &[f64]| v[1..=p.n].iter().sum::<f64>();
    let steady = |intercept: f64, gain: f64| {
        if (1.0 - gain).abs() > 1e-9 {
            intercept / (1.0 - gain)
        } else {
            intercept
        }
    };
    let c0 = steady(p.a[0], lag_gain(&p.a));
    let r0 = steady(p.c[0], lag_gain(&p.c)).max(0.0);
    let warmup = p.max_lag();
    let mut intervals = vec![Interval::from_center_radius(c0, r0)?; warmup];

    for k in warmup..spec.length {
        let r = build_regressors(&intervals, &u, k, p.n, p.m)?;
        let center: f64 = p.a.iter().zip(&r.x).map(|(a, x)| a * x).sum::<f64>()
            + center_noise.sample(&mut rng);
        let radius = (p.c.iter().zip(&r.x_abs).map(|(c, x)| c * x).sum::<f64>()
            + radius_noise.sample(&mut rng).abs())
        .max(0.0);
        for value in [center, radius] {
            if !value.is_finite() || value.abs() > DIVERGENCE_LIMIT {
                return Err(Error::Diverged { step: k, value });
            }
        }
        intervals.push(Interval::from_center_radius(center, radius)?);
    }

    Ok(SyntheticData {
        data: intervals.iter().map(Interval::center).collect(),
        u,
        intervals,
        ground_truth: p.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_small_file() {
        let f = write_tmp("a,u\n1,2\n3,4\n5.5,-6e-1\n");
        let ds = load_csv(f.path()).unwrap();
        assert_eq!(ds.names, vec!["a", "u"]);
        assert_eq!(ds.column("a").unwrap(), &[1.0, 3.0, 5.5]);
        assert_eq!(ds.column("u").unwrap(), &[2.0, 4.0, -0.6]);
    }

    #[test]
    fn non_numeric_cell_names_row_and_column() {
        let f = write_tmp("a,u\n1,2\n3,4\n5,oops\n");
        match load_csv(f.path()) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 4);
                assert_eq!(column, "u");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_rows_rejected() {
        let f = write_tmp("a,u\n1,2\n3\n");
        assert!(matches!(load_csv(f.path()), Err(Error::Parse { row: 3, .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_csv(Path::new("/nonexistent/data.csv")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("/nonexistent/data.csv"));
    }

    #[test]
    fn normalize_population_std() {
        let (z, norm) = zero_mean_normalize(&[1.0, 2.0, 3.0]).unwrap();
        // Population std of {1,2,3} is sqrt(2/3).
        let s = (2.0f64 / 3.0).sqrt();
        assert_eq!(norm.mean, 2.0);
        assert!((norm.std - s).abs() < 1e-15);
        let expected = [-1.0 / s, 0.0, 1.0 / s];
        for (a, b) in z.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((z[2] - 1.224744871391589).abs() < 1e-12);

        let (again, _) = zero_mean_normalize(&z).unwrap();
        for (a, b) in again.iter().zip(&z) {
            assert!((a - b).abs() < 1e-12);
        }
        for (x, zi) in [1.0, 2.0, 3.0].iter().zip(&z) {
            assert!((norm.invert(*zi) - x).abs() < 1e-12);
        }
        assert!(matches!(zero_mean_normalize(&[4.0; 5]), Err(Error::ConstantColumn)));
    }

    #[test]
    fn pca_perfectly_correlated() {
        let (x, _) = zero_mean_normalize(&[1.0, 4.0, 2.0, 8.0, 5.0]).unwrap();
        let pca = pca_project(&[x.clone(), x.clone()]).unwrap();
        assert!((pca.explained - 1.0).abs() < 1e-12);
        for (s, v) in pca.scores.iter().zip(&x) {
            assert!((s - std::f64::consts::SQRT_2 * v).abs() < 1e-12);
        }
    }

    #[test]
    fn pca_isotropic_tie() {
        let a = vec![1.0, -1.0, 0.0, 0.0];
        let b = vec![0.0, 0.0, 1.0, -1.0];
        assert!(matches!(pca_project(&[a, b]), Err(Error::EigenTie { .. })));
    }

    #[test]
    fn pca_recovers_planted_direction() {
        let v = [0.6, -0.48, 0.64];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noise = Normal::new(0.0, 1e-9).unwrap();
        let rows = 400;
        let s: Vec<f64> = (0..rows).map(|_| rng.random_range(-2.0..2.0)).collect();
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|j| s.iter().map(|si| si * v[j] + noise.sample(&mut rng)).collect())
            .collect();
        let pca = pca_project(&cols).unwrap();
        for (a, b) in pca.loading.iter().zip(v) {
            assert!((a - b).abs() < 1e-6, "{:?}", pca.loading);
        }
        let mean = pca.scores.iter().sum::<f64>() / rows as f64;
        let var = pca.scores.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / rows as f64;
        assert!((var - pca.eigenvalue).abs() <= 1e-8 * pca.eigenvalue);
    }

    #[test]
    fn prepare_single_and_multi_column() {
        let ds = RawDataset::new(
            vec!["t1".into(), "u".into()],
            vec![vec![1.0, 2.0, 4.0, 3.0], vec![0.0, 1.0, 0.0, 1.0]],
        )
        .unwrap();
        let p = prepare(&ds, "u").unwrap();
        assert_eq!(p.input, vec![-1.0, 1.0, -1.0, 1.0]);
        assert_eq!(p.condition.len(), 4);

        let ds = RawDataset::new(
            vec!["t1".into(), "t2".into(), "t3".into(), "u".into()],
            vec![
                vec![1.0, 2.0, 4.0, 3.0, 0.0],
                vec![2.0, 2.5, 5.0, 2.0, 1.0],
                vec![0.0, 1.0, 3.0, 3.5, 0.5],
                vec![0.0, 1.0, 0.0, 1.0, 2.0],
            ],
        )
        .unwrap();
        assert_eq!(prepare(&ds, "u").unwrap().condition.len(), 5);
        assert!(prepare(&ds, "missing").is_err());
    }

    #[test]
    fn synthesize_is_deterministic_and_valid() {
        let spec = SyntheticSpec::default();
        let a = synthesize(&spec).unwrap();
        let b = synthesize(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.data.len(), 864);
        assert!(a.intervals.iter().all(|iv| iv.radius() >= 0.0));
        assert!(a.data.iter().chain(&a.u).all(|x| x.is_finite()));
    }

    #[test]
    fn synthesize_rejects_short_and_unstable() {
        let spec = SyntheticSpec {
            length: 49,
            ..SyntheticSpec::default()
        };
        assert!(matches!(synthesize(&spec), Err(Error::Config(_))));

        let mut spec = SyntheticSpec::default();
        spec.true_params.a = vec![0.0, 1.5, 0.0, 0.0, 1.0];
        assert!(matches!(synthesize(&spec), Err(Error::Diverged { .. })));
    }

    #[test]
    fn step_input_schedule() {
        let spec = SyntheticSpec {
            input: InputProcess::Steps {
                levels: vec![-1.0, 1.0],
                hold: 3,
            },
            ..SyntheticSpec::default()
        };
        let out = synthesize(&spec).unwrap();
        assert_eq!(&out.u[..7], &[-1.0, -1.0, -1.0, 1.0, 1.0, 1.0, -1.0]);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = SyntheticSpec::default();
        let text = serde_json::to_string_pretty(&spec).unwrap();
        assert!(text.contains("\"kind\": \"white_noise\""));
        let back: SyntheticSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
