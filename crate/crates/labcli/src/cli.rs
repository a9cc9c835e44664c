//! Command-line interface.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use steincond::bounds::BoundReport;
use steincond::colored::{self, NoiseModel};
use steincond::ensemble::{EnsembleKind, EnsembleSpec};
use steincond::matrix::{CMat, ComplexMatrix, InputPair, Spectrum};
use steincond::stein::{self, SteinSolution};
use steincond::{canonical, linalg, normal_form, Complex64, Error};

use crate::quantile::{QuantileSummary, PROBES};
use crate::runner::{run_ensemble, AUX_LOG_KAPPA_L};
use crate::table::{build_table, Format, TableId};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if !e.is_input_error() => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        }
    }

    /// `{"error": code, "message": text}`
    pub fn to_json(&self) -> String {
        json!({ "error": self.code(), "message": self.to_string() }).to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "steinlab", version, about = "Grammian condition number experiments")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Samples per ensemble (tables default to 2500, or 1200 for table 5)
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output format for tables and ensembles; other commands emit JSON
    #[arg(long, global = true, default_value = "csv")]
    pub format: Format,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Common {
    fn workers(&self) -> usize {
        self.workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Direct,
    Doubling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    White,
    Ar1,
    Ma1,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the Stein equation for a pair file
    Solve {
        pair: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Doubling)]
        method: Method,
    },
    /// Evaluate lower bounds on ln κ(P)
    Bounds {
        /// Pair file
        pair: Option<PathBuf>,
        /// JSON list of [re, im] eigenvalues of a normal A
        #[arg(long, conflicts_with_all = ["pair", "jordan"])]
        spectrum: Option<PathBuf>,
        /// Eigenvalue of a single Jordan block (needs --n)
        #[arg(long, conflicts_with = "pair", requires = "n")]
        jordan: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        /// Input dimension for --spectrum
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Also solve and report ln κ(P) and its gap to the best bound
        #[arg(long)]
        solve: bool,
    },
    /// Transform a pair file to input-normal form
    Normalize { pair: PathBuf },
    /// Sample an ensemble and export per-sample ln κ
    Ensemble {
        #[arg(long)]
        kind: EnsembleKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Jordan eigenvalue
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Reproduce one of the quantile tables (1, 2, 3, 4a, 4b, 4c, 5)
    Table { id: TableId },
    /// State covariance conditioning under colored noise
    Colored {
        pair: PathBuf,
        #[arg(long, value_enum, default_value_t = NoiseArg::Ar1, conflicts_with = "noise_file")]
        noise: NoiseArg,
        /// φ₀ for white noise, the coefficient otherwise
        #[arg(long, default_value_t = 0.5)]
        param: f64,
        /// NoiseModel JSON
        #[arg(long)]
        noise_file: Option<PathBuf>,
    },
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::Format(format!("{}: {e}", path.display())).into())
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("document serializes");
    s.push('\n');
    s
}

pub fn solve_document(pair: &InputPair, method: Method) -> CliResult<SteinSolution> {
    Ok(match method {
        Method::Doubling => stein::solve(pair)?,
        Method::Direct => {
            pair.ensure_stable()?;
            let p = stein::solve_stein_direct(pair)?;
            let residual_rel = stein::stein_residual(pair, p.as_dmatrix());
            let l = p.into_dmatrix().cholesky().ok_or(Error::InfiniteCondition)?.l();
            SteinSolution {
                log_kappa: stein::cond_from_factor(&l)?,
                factor_l: ComplexMatrix::from_dmatrix(l)?,
                residual_rel,
                iterations: 0,
            }
        }
    })
}

fn ones(n: usize, d: usize) -> CMat {
    CMat::from_element(n, d, Complex64::new(1.0, 0.0))
}

pub fn bounds_document(pair: &InputPair, solve: bool) -> CliResult<Value> {
    let (sigma_n_in, log_kappa) = if solve {
        let tr = normal_form::to_input_normal(pair)?;
        let s = linalg::jacobi_singular_values(tr.a_tilde.as_dmatrix());
        (s.last().copied(), Some(stein::solve(pair)?.log_kappa))
    } else {
        (None, None)
    };
    let report = BoundReport::evaluate(pair, sigma_n_in)?;
    let mut doc = serde_json::to_value(&report).expect("report serializes");
    if let Some(lk) = log_kappa {
        doc["log_kappa"] = json!(lk);
        if let Some((name, best)) = report.best() {
            doc["best"] = json!(name);
            doc["gap"] = json!(lk - best);
        }
        let violations: Vec<String> = report.violations(lk, 1e-6).into_iter().map(|v| v.0).collect();
        doc["violations"] = json!(violations);
    }
    Ok(doc)
}

fn ensemble_document(spec: &EnsembleSpec, workers: usize, format: Format) -> CliResult<String> {
    let run = run_ensemble(spec, workers)?;
    let summary = QuantileSummary::from_values(spec.n, &run.log_kappas(), &PROBES).ok().map(|mut s| {
        s.excluded = run.exclusions.len();
        s.lambda = spec.jordan_lambda;
        s
    });
    Ok(match format {
        Format::Json => pretty(&json!({ "run": run, "summary": summary })),
        Format::Csv => {
            let mut out = String::from("index,log_kappa,bound,log_kappa_l,rejections\n");
            for r in &run.records {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.index,
                    r.log_kappa,
                    r.bound_log.map(|b| b.to_string()).unwrap_or_default(),
                    r.aux.get(AUX_LOG_KAPPA_L).map(|b| b.to_string()).unwrap_or_default(),
                    r.rejections
                ));
            }
            out.push_str(&format!("# ensemble {} n={} d={} seed {} samples {}\n", spec.kind, spec.n, spec.d, spec.seed, spec.count));
            out.push_str(&format!("# excluded {}\n", run.exclusions.len()));
            for e in &run.exclusions {
                out.push_str(&format!("# exclusion index {}: {}\n", e.index, e.code));
            }
            out
        }
        Format::Md => {
            let mut out = format!("{} ensemble, n = {}, d = {}\n\n", spec.kind, spec.n, spec.d);
            out.push_str("| probe | ln κ |\n|---|---|\n");
            if let Some(s) = &summary {
                for (p, v) in s.probes.iter().zip(&s.values) {
                    out.push_str(&format!("| {}% | {v:.2} |\n", (p * 100.0).round()));
                }
                out.push_str(&format!("\n- IQ distance {:.2}\n", s.iq_distance));
            }
            out.push_str(&format!("- seed {}, samples {}, excluded {}\n", spec.seed, spec.count, run.exclusions.len()));
            out
        }
    })
}

pub fn colored_document(pair: &InputPair, noise: &NoiseModel) -> CliResult<Value> {
    let (lhs, rhs) = colored::colored_condition_bound(pair, noise)?;
    Ok(json!({
        "noise": noise,
        "log_kappa_w": lhs,
        "log_kappa_p": rhs - noise.log_density_ratio(),
        "log_density_ratio": noise.log_density_ratio(),
        "bound": rhs,
        "holds": lhs <= rhs + 1e-6,
    }))
}

/// Run a parsed command and return the document it produces.
pub fn run(cli: &Cli) -> CliResult<String> {
    let common = &cli.common;
    match &cli.command {
        Command::Solve { pair, method } => Ok(pretty(&solve_document(&read_json(pair)?, *method)?)),
        Command::Bounds { pair, spectrum, jordan, n, d, solve } => {
            let input = if let Some(path) = pair {
                read_json::<InputPair>(path)?
            } else if let Some(path) = spectrum {
                let spec: Spectrum = read_json(path)?;
                let ev = spec.eigenvalues();
                let a = CMat::from_fn(ev.len(), ev.len(), |i, j| if i == j { ev[i] } else { Complex64::new(0.0, 0.0) });
                InputPair::from_dmatrices(a, ones(spec.len(), *d))?
            } else if let Some(lambda) = jordan {
                let n = n.ok_or_else(|| CliError::Usage("--jordan needs --n".into()))?;
                let a = canonical::build_jordan(Complex64::new(*lambda, 0.0), n)?;
                InputPair::new(a, ComplexMatrix::unit_vector(n, 0))?
            } else {
                return Err(CliError::Usage("bounds needs a pair file, --spectrum or --jordan".into()));
            };
            Ok(pretty(&bounds_document(&input, *solve)?))
        }
        Command::Normalize { pair } => {
            let tr = normal_form::to_input_normal(&read_json(pair)?)?;
            let mut doc = serde_json::to_value(&tr).expect("transform serializes");
            doc["residual"] = json!(tr.residual());
            Ok(pretty(&doc))
        }
        Command::Ensemble { kind, n, d, lambda } => {
            let count = common.samples.unwrap_or(2500);
            let mut spec = EnsembleSpec::new(*kind, *n, count, common.seed);
            spec.d = *d;
            spec.jordan_lambda = *lambda;
            ensemble_document(&spec, common.workers(), common.format)
        }
        Command::Table { id } => {
            let samples = common.samples.unwrap_or(id.default_samples());
            Ok(build_table(*id, common.seed, samples, common.workers())?.render(common.format))
        }
        Command::Colored { pair, noise, param, noise_file } => {
            let model = match noise_file {
                Some(path) => {
                    let m: NoiseModel = read_json(path)?;
                    m.validate()?;
                    m
                }
                None => match noise {
                    NoiseArg::White => NoiseModel::white(*param)?,
                    NoiseArg::Ar1 => NoiseModel::ar1(*param)?,
                    NoiseArg::Ma1 => NoiseModel::ma1(*param)?,
                },
            };
            Ok(pretty(&colored_document(&read_json(pair)?, &model)?))
        }
    }
}

/// Run and write the document to `--out` or stdout.
pub fn execute(cli: &Cli) -> CliResult<()> {
    let doc = run(cli)?;
    match &cli.common.out {
        Some(path) => fs::write(path, doc)
            .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() }),
        None => std::io::stdout()
            .write_all(doc.as_bytes())
            .map_err(|e| CliError::Io { path: "<stdout>".into(), message: e.to_string() }),
    }
}
