//! Command-line front end.
//!
//! Every subcommand reads its settings from flags, then an optional JSON
//! config file (`--config`), then built-in defaults, in that order of
//! precedence. Outputs go under `--out` with fixed file names.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::data::{load_csv, prepare, synthesize, SyntheticSpec};
use crate::error::{Error, Result};
use crate::model::IarxParams;
use crate::pattern_space::{FcmConfig, PatternSpace};
use crate::pipeline::{
    evaluate, fit_model, robustness_experiment, sweep_cpms, write_rmse_csv, write_robust_csv,
    write_sweep_csv, write_trace_csv, EvalRange, MovingPatternModel,
};

pub const MODEL_FILE: &str = "model.json";
pub const SPACE_FILE: &str = "space.json";
pub const RMSE_FILE: &str = "rmse.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const ROBUST_FILE: &str = "robust.csv";
pub const SYNTH_FILE: &str = "synthetic.csv";
pub const INTERVALS_FILE: &str = "intervals.csv";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

pub const DEFAULT_CPMS: usize = 26;
pub const DEFAULT_CPMS_RANGE: (usize, usize) = (16, 36);
pub const DEFAULT_N: usize = 3;
pub const DEFAULT_M: usize = 1;
/// Below the classification threshold of the default synthetic dataset.
pub const DEFAULT_MAGNITUDE: f64 = 0.003;

#[derive(Debug, Parser)]
#[command(name = "iarx", version, about = "Interval ARX modeling over a pattern moving space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the pattern space, identify A and C, write model.json and space.json.
    Fit(CommonArgs),
    /// Score one-step forecasts of a fitted model, write rmse.csv and trace.csv.
    Eval(CommonArgs),
    /// Fit and score one model per CPMS value, write sweep.csv.
    Sweep(CommonArgs),
    /// Compare a fitted model with perturbed parameters, write robust.csv.
    Robust(CommonArgs),
    /// Simulate a dataset, write synthetic.csv, intervals.csv and ground_truth.json.
    Synth(CommonArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Name of the crisp input column.
    #[arg(long)]
    pub input_col: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory holding model.json and space.json (defaults to --out).
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub cpms: Option<usize>,
    /// Inclusive range `A..B`.
    #[arg(long, value_parser = parse_range)]
    pub cpms_range: Option<(usize, usize)>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Clustering seed for fit and sweep, perturbation seed for robust,
    /// simulation seed for synth.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Perturbation magnitude for robust.
    #[arg(long)]
    pub magnitude: Option<f64>,
    /// Also perturb A by Uniform[-magnitude, magnitude].
    #[arg(long)]
    pub perturb_a: bool,
    /// Held-out scoring range `A..B` (exclusive end) for eval.
    #[arg(long, value_parser = parse_range)]
    pub holdout: Option<(usize, usize)>,
    /// Synthetic dataset spec (JSON) for synth.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// JSON file with any of the settings above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Settings read from `--config`. Every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<PathBuf>,
    pub input_col: Option<String>,
    pub out: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub cpms: Option<usize>,
    pub cpms_range: Option<(usize, usize)>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub magnitude: Option<f64>,
    pub perturb_a: Option<bool>,
    pub holdout: Option<(usize, usize)>,
    pub fcm: Option<FcmConfig>,
    pub spec: Option<SyntheticSpec>,
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub input_col: String,
    pub out: PathBuf,
    pub model: PathBuf,
    pub cpms: usize,
    pub cpms_range: (usize, usize),
    pub n: usize,
    pub m: usize,
    pub seed: Option<u64>,
    pub magnitude: f64,
    pub perturb_a: bool,
    pub holdout: Option<(usize, usize)>,
    pub fcm: FcmConfig,
    pub spec: SyntheticSpec,
}

/// `model.json`: the IARX parameters plus the CPMS they were fitted with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpms: Option<usize>,
    #[serde(flatten)]
    pub params: IarxParams,
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let a = a.trim().parse().map_err(|e| format!("bad range start {a:?}: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("bad range end {b:?}: {e}"))?;
    Ok((a, b))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        })
    }
}

impl RunConfig {
    /// Merges flags over the config file over defaults and checks invariants.
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let file: FileConfig = match &args.config {
            Some(path) => {
                require_file(path)?;
                read_json(path)?
            }
            None => FileConfig::default(),
        };
        let out = args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("."));
        let spec = match &args.spec {
            Some(path) => {
                require_file(path)?;
                read_json(path)?
            }
            None => file.spec.unwrap_or_default(),
        };
        let config = Self {
            data: args.data.clone().or(file.data),
            input_col: args
                .input_col
                .clone()
                .or(file.input_col)
                .unwrap_or_else(|| "u".to_string()),
            model: args.model.clone().or(file.model).unwrap_or_else(|| out.clone()),
            out,
            cpms: args.cpms.or(file.cpms).unwrap_or(DEFAULT_CPMS),
            cpms_range: args.cpms_range.or(file.cpms_range).unwrap_or(DEFAULT_CPMS_RANGE),
            n: args.n.or(file.n).unwrap_or(DEFAULT_N),
            m: args.m.or(file.m).unwrap_or(DEFAULT_M),
            seed: args.seed.or(file.seed),
            magnitude: args.magnitude.or(file.magnitude).unwrap_or(DEFAULT_MAGNITUDE),
            perturb_a: args.perturb_a || file.perturb_a.unwrap_or(false),
            holdout: args.holdout.or(file.holdout),
            fcm: file.fcm.unwrap_or_default(),
            spec,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cpms < 2 {
            return Err(Error::Config(format!("cpms must be at least 2, got {}", self.cpms)));
        }
        let (lo, hi) = self.cpms_range;
        if lo < 2 || lo > hi {
            return Err(Error::Config(format!(
                "cpms range {lo}..{hi} must satisfy 2 <= A <= B"
            )));
        }
        if self.n < 1 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if !(self.magnitude >= 0.0) || !self.magnitude.is_finite() {
            return Err(Error::Config(format!(
                "magnitude must be a nonnegative number, got {}",
                self.magnitude
            )));
        }
        if let Some((a, b)) = self.holdout {
            if a >= b {
                return Err(Error::Config(format!("holdout range {a}..{b} is empty")));
            }
        }
        if let Some(path) = &self.data {
            require_file(path)?;
        }
        Ok(())
    }

    fn fcm(&self) -> FcmConfig {
        FcmConfig {
            seed: self.seed.unwrap_or(self.fcm.seed),
            ..self.fcm.clone()
        }
    }

    fn data_path(&self) -> Result<&Path> {
        self.data
            .as_deref()
            .ok_or_else(|| Error::Config("--data is required".into()))
    }

    fn output(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out).map_err(|source| Error::Io {
            path: self.out.clone(),
            source,
        })?;
        Ok(self.out.join(name))
    }
}

fn load_series(config: &RunConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let dataset = load_csv(config.data_path()?)?;
    let prepared = prepare(&dataset, &config.input_col)?;
    Ok((prepared.condition, prepared.input))
}

/// Reads `model.json` and `space.json` and checks they belong together.
pub fn load_model(dir: &Path) -> Result<MovingPatternModel> {
    let model_path = dir.join(MODEL_FILE);
    let space_path = dir.join(SPACE_FILE);
    require_file(&model_path)?;
    require_file(&space_path)?;
    let file: ModelFile = read_json(&model_path)?;
    let space: PatternSpace = read_json(&space_path)?;
    if let Some(cpms) = file.cpms {
        if cpms != space.cpms() {
            return Err(Error::Config(format!(
                "{} was fitted with cpms {cpms} but {} has {} classes",
                model_path.display(),
                space_path.display(),
                space.cpms()
            )));
        }
    }
    file.params
        .validate()
        .map_err(|e| Error::Config(format!("{}: {e}", model_path.display())))?;
    MovingPatternModel::new(space, file.params)
}

fn format_vector(v: &[f64]) -> String {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[ {} ]ᵀ", cells.join("  "))
}

pub fn cmd_fit(config: &RunConfig) -> Result<MovingPatternModel> {
    let (data, u) = load_series(config)?;
    let model = fit_model(&data, &u, config.cpms, config.n, config.m, &config.fcm())?;
    let file = ModelFile {
        cpms: Some(model.space.cpms()),
        params: model.params.clone(),
    };
    write_json(&config.output(MODEL_FILE)?, &file)?;
    write_json(&config.output(SPACE_FILE)?, &model.space)?;
    println!("cpms = {}, n = {}, m = {}", model.space.cpms(), model.n(), model.m());
    println!("A = {}", format_vector(&model.params.a));
    println!("C = {}", format_vector(&model.params.c));
    Ok(model)
}

pub fn cmd_eval(config: &RunConfig) -> Result<()> {
    let model = load_model(&config.model)?;
    let (data, u) = load_series(config)?;
    let range = match config.holdout {
        Some((start, end)) => EvalRange::HeldOut { start, end },
        None => EvalRange::InSample,
    };
    let eval = evaluate(&model, &data, &u, range)?;
    write_rmse_csv(&config.output(RMSE_FILE)?, model.space.cpms(), &eval.report)?;
    write_trace_csv(&config.output(TRACE_FILE)?, &eval.trace)?;
    let r = eval.report;
    println!(
        "prelim upper {:.4} lower {:.4}; final upper {:.4} lower {:.4} over {} steps",
        r.prelim_upper,
        r.prelim_lower,
        r.final_upper,
        r.final_lower,
        eval.trace.len()
    );
    Ok(())
}

pub fn cmd_sweep(config: &RunConfig) -> Result<()> {
    let (data, u) = load_series(config)?;
    let (lo, hi) = config.cpms_range;
    let values: Vec<usize> = (lo..=hi).collect();
    let rows = sweep_cpms(&data, &u, &values, config.n, config.m, &config.fcm());
    write_sweep_csv(&config.output(SWEEP_FILE)?, &rows)?;
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    println!("{} cells, {failed} failed", rows.len());
    Ok(())
}

pub fn cmd_robust(config: &RunConfig) -> Result<()> {
    let model = load_model(&config.model)?;
    let (data, u) = load_series(config)?;
    let seed = config.seed.unwrap_or(0);
    let report = robustness_experiment(&model, &data, &u, config.magnitude, seed, config.perturb_a)?;
    write_robust_csv(&config.output(ROBUST_FILE)?, model.space.cpms(), &model.params, &report)?;
    println!(
        "magnitude {}: {} of {} steps changed class",
        config.magnitude,
        report.changed_steps,
        data.len() - model.params.max_lag()
    );
    Ok(())
}

pub fn cmd_synth(config: &RunConfig) -> Result<()> {
    let mut spec = config.spec.clone();
    if let Some(seed) = config.seed {
        spec.seed = seed;
    }
    let synth = synthesize(&spec)?;
    let path = config.output(SYNTH_FILE)?;
    let csv_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Csv {
            path: path.clone(),
            source,
        }
    };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["condition", config.input_col.as_str()])
        .map_err(csv_err(&path))?;
    for (x, u) in synth.data.iter().zip(&synth.u) {
        w.write_record([x.to_string(), u.to_string()]).map_err(csv_err(&path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;

    let ipath = config.output(INTERVALS_FILE)?;
    let mut w = csv::Writer::from_path(&ipath).map_err(csv_err(&ipath))?;
    w.write_record(["lower", "upper", config.input_col.as_str()])
        .map_err(csv_err(&ipath))?;
    for (y, u) in synth.intervals.iter().zip(&synth.u) {
        w.write_record([y.lower().to_string(), y.upper().to_string(), u.to_string()])
            .map_err(csv_err(&ipath))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: ipath.clone(),
        source,
    })?;

    write_json(&config.output(GROUND_TRUTH_FILE)?, &synth.ground_truth)?;
    println!("{} samples written to {}", synth.data.len(), path.display());
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Fit(args) => cmd_fit(&RunConfig::resolve(args)?).map(|_| ()),
        Command::Eval(args) => cmd_eval(&RunConfig::resolve(args)?),
        Command::Sweep(args) => cmd_sweep(&RunConfig::resolve(args)?),
        Command::Robust(args) => cmd_robust(&RunConfig::resolve(args)?),
        Command::Synth(args) => cmd_synth(&RunConfig::resolve(args)?),
    }
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
