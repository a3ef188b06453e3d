//! Command-line front end for the fsmat verification suites and nuclearity sweeps.
//!
//! [`Args`] is the clap surface; it is merged with an optional JSON config file into a
//! [`RunConfig`], which [`run`] executes. All randomness comes from one ChaCha
//! generator seeded from the config, and suites run in a fixed order, so identical
//! configs give byte-identical output.

pub mod suites;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use fsmat::fock::FockSpace;
use fsmat::nuclearity::KernelDiscretization;
use fsmat::scatfn::parse_spec;
use fsmat::ScatteringFunction;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::suites::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Check,
    FockVerify,
    FormfactorVerify,
    Nuclearity,
    Smatrix,
    ReportAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] fsmat::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Core(
                fsmat::Error::InvalidParameter(_)
                | fsmat::Error::SizeMismatch { .. }
                | fsmat::Error::TruncationOverflow { .. }
                | fsmat::Error::Syntax { .. }
                | fsmat::Error::Semantic(_),
            ) => 2,
            CliError::Core(_) => 1,
        }
    }
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [d, lo, hi] = parts.as_slice() else {
        return Err(format!("expected d,min,max, got `{s}`"));
    };
    let d: usize = d.parse().map_err(|e| format!("grid size `{d}`: {e}"))?;
    let lo: f64 = lo.parse().map_err(|e| format!("grid min `{lo}`: {e}"))?;
    let hi: f64 = hi.parse().map_err(|e| format!("grid max `{hi}`: {e}"))?;
    if d == 0 || !(lo < hi) {
        return Err(format!("need d ≥ 1 and min < max, got `{s}`"));
    }
    Ok(GridSpec::new(d, lo, hi))
}

#[derive(Debug, Clone, Default, Parser, Deserialize)]
#[command(name = "fsmat", version, about = "Verification suites and nuclearity sweeps for factorizing S-matrix models")]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Args {
    /// Suite to run.
    #[arg(value_enum)]
    #[serde(skip)]
    pub command: Option<Command>,
    /// JSON file with defaults for any of the flags below.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Scattering-function spec file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Rapidity grid as `d,min,max`.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    #[serde(skip)]
    pub grid: Option<GridSpec>,
    /// Particle number (largest one checked).
    #[arg(long)]
    pub n: Option<usize>,
    /// Split position; every `k < n` when absent.
    #[arg(long)]
    pub k: Option<usize>,
    /// Mass.
    #[arg(long)]
    pub m: Option<f64>,
    /// Splitting distances, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub s: Option<Vec<f64>>,
    /// Values of κ, comma separated; the optimal κ when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub kappa: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random tensors or operators per configuration.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Number of κ lattice points in the `s_min` search.
    #[arg(long)]
    pub lattice: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Grid as `"d,min,max"` in config files.
    #[arg(skip)]
    #[serde(rename = "grid")]
    pub grid_text: Option<String>,
}

impl Args {
    /// Fills every unset field from `other`.
    fn or(self, other: Args) -> Args {
        Args {
            command: self.command.or(other.command),
            config: self.config.or(other.config),
            spec: self.spec.or(other.spec),
            grid: self.grid.or(other.grid),
            n: self.n.or(other.n),
            k: self.k.or(other.k),
            m: self.m.or(other.m),
            s: self.s.or(other.s),
            kappa: self.kappa.or(other.kappa),
            seed: self.seed.or(other.seed),
            trials: self.trials.or(other.trials),
            lattice: self.lattice.or(other.lattice),
            out: self.out.or(other.out),
            format: self.format.or(other.format),
            grid_text: self.grid_text.or(other.grid_text),
        }
    }
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub spec_path: Option<PathBuf>,
    /// Families under test: the spec file, or the shipped families.
    #[serde(skip)]
    pub families: Vec<ScatteringFunction>,
    pub grid: Option<GridSpec>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub mass: f64,
    pub s_list: Vec<f64>,
    pub kappa_list: Vec<f64>,
    pub seed: u64,
    pub trials: Option<usize>,
    pub lattice: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_S_LIST: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
pub const DEFAULT_LATTICE: usize = 32;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl RunConfig {
    pub fn from_args(args: Args) -> Result<Self, CliError> {
        let args = match &args.config {
            Some(path) => {
                let text = read(path)?;
                let file: Args = serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                args.or(file)
            }
            None => args,
        };
        let command = args
            .command
            .ok_or_else(|| CliError::Usage("missing command".into()))?;
        let grid = match (args.grid, &args.grid_text) {
            (Some(g), _) => Some(g),
            (None, Some(text)) => Some(parse_grid(text).map_err(CliError::Usage)?),
            (None, None) => None,
        };
        let families = match &args.spec {
            Some(path) => vec![parse_spec(&read(path)?).map_err(|e| {
                CliError::Usage(format!("{}: {e}", path.display()))
            })?],
            None => Vec::new(),
        };
        let mass = args.m.unwrap_or(1.0);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(CliError::Usage(format!("mass must be positive, got {mass}")));
        }
        let s_list = args.s.unwrap_or_else(|| DEFAULT_S_LIST.to_vec());
        if s_list.is_empty() || s_list.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(CliError::Usage(format!("s-list entries must be positive, got {s_list:?}")));
        }
        let lattice = args.lattice.unwrap_or(DEFAULT_LATTICE);
        if lattice < 2 {
            return Err(CliError::Usage(format!("lattice needs at least 2 points, got {lattice}")));
        }
        Ok(Self {
            command,
            spec_path: args.spec,
            families,
            grid,
            n: args.n,
            k: args.k,
            mass,
            s_list,
            kappa_list: args.kappa.unwrap_or_default(),
            seed: args.seed.unwrap_or(DEFAULT_SEED),
            trials: args.trials,
            lattice,
            format: args.format.unwrap_or_default(),
            out: args.out,
        })
    }

    /// The spec family, or `fallback` when no spec was given.
    fn family_or(&self, fallback: ScatteringFunction) -> ScatteringFunction {
        self.families.first().cloned().unwrap_or(fallback)
    }
}

/// Rendered output and overall verdict of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub text: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

fn sinh_gordon() -> ScatteringFunction {
    ScatteringFunction::sinh_gordon(1.0).unwrap()
}

fn pole_family() -> ScatteringFunction {
    suites::shipped_families().swap_remove(1)
}

const FOCK_GRID: GridSpec = GridSpec {
    d: 4,
    min: -1.0,
    max: 1.2,
    rule: fsmat::grid::WeightRule::Unit,
};
const SMATRIX_GRID: GridSpec = GridSpec {
    d: 6,
    min: -1.5,
    max: 2.0,
    rule: fsmat::grid::WeightRule::Unit,
};

/// Flattens nested JSON into `key,value` lines with dotted keys.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), "na".into())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn key_value_csv(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    let mut text = String::from("key,value\n");
    for (k, v) in rows {
        text.push_str(&format!("{k},{v}\n"));
    }
    text
}

fn render<T: Serialize>(report: &T, format: Format) -> String {
    let value = serde_json::to_value(report).expect("reports serialize");
    match format {
        Format::Json => serde_json::to_string_pretty(&value).expect("values serialize") + "\n",
        Format::Csv => key_value_csv(&value),
    }
}

#[derive(Serialize)]
struct FamilyReport {
    family: String,
    check: suites::CheckReport,
    fock: suites::FockReport,
    formfactor: suites::FormfactorReport,
    smatrix: suites::SmatrixReport,
    nuclearity: suites::NuclearityReport,
}

#[derive(Serialize)]
struct FullReport {
    seed: u64,
    families: Vec<FamilyReport>,
    passed: bool,
}

/// Executes the configured suite and renders its report.
pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let disc = KernelDiscretization::default();
    let mass = config.mass;
    let grid = |default: GridSpec| config.grid.unwrap_or(default).build(mass);
    let fock_space = |s2: &ScatteringFunction| -> Result<FockSpace, CliError> {
        Ok(FockSpace::new(s2.clone(), grid(FOCK_GRID)?, config.n.unwrap_or(4))?)
    };
    let outcome = match config.command {
        Command::Check => {
            let s2 = config.family_or(sinh_gordon());
            let r = suites::check(&s2, config.trials.unwrap_or(1000))?;
            Outcome {
                passed: r.passed,
                text: render(&r, config.format),
            }
        }
        Command::FockVerify => {
            let s2 = config.family_or(sinh_gordon());
            let r = suites::fock_verify(&fock_space(&s2)?, config.trials.unwrap_or(100), &mut rng)?;
            Outcome {
                passed: r.passed,
                text: render(&r, config.format),
            }
        }
        Command::FormfactorVerify => {
            let s2 = config.family_or(sinh_gordon());
            let r = suites::formfactor_verify(
                &s2,
                &grid(FOCK_GRID)?,
                config.n.unwrap_or(4),
                config.k,
                config.trials.unwrap_or(20),
                &mut rng,
            )?;
            Outcome {
                passed: r.passed,
                text: render(&r, config.format),
            }
        }
        Command::Smatrix => {
            let s2 = config.family_or(sinh_gordon());
            let r = suites::smatrix(
                &s2,
                &grid(SMATRIX_GRID)?,
                config.n.unwrap_or(3),
                config.trials.unwrap_or(20),
                &mut rng,
            )?;
            Outcome {
                passed: r.passed,
                text: render(&r, config.format),
            }
        }
        Command::Nuclearity => {
            let s2 = config.family_or(pole_family());
            let r = suites::nuclearity(&s2, mass, &config.s_list, &config.kappa_list, config.lattice, &disc)?;
            let text = match config.format {
                Format::Json => render(&r, Format::Json),
                Format::Csv => r.rows_csv(),
            };
            Outcome {
                passed: r.passed,
                text,
            }
        }
        Command::ReportAll => {
            let families = if config.families.is_empty() {
                suites::shipped_families()
            } else {
                config.families.clone()
            };
            let mut reports = Vec::with_capacity(families.len());
            for s2 in &families {
                let check = suites::check(s2, 1000)?;
                let fock = suites::fock_verify(&fock_space(s2)?, config.trials.unwrap_or(100), &mut rng)?;
                let formfactor = suites::formfactor_verify(
                    s2,
                    &grid(FOCK_GRID)?,
                    config.n.unwrap_or(4),
                    config.k,
                    config.trials.unwrap_or(20),
                    &mut rng,
                )?;
                let smatrix = suites::smatrix(
                    s2,
                    &grid(SMATRIX_GRID)?,
                    config.n.unwrap_or(3),
                    config.trials.unwrap_or(20),
                    &mut rng,
                )?;
                let nuclearity =
                    suites::nuclearity(s2, mass, &config.s_list, &config.kappa_list, config.lattice, &disc)?;
                reports.push(FamilyReport {
                    family: s2.label(),
                    check,
                    fock,
                    formfactor,
                    smatrix,
                    nuclearity,
                });
            }
            let passed = reports.iter().all(|r| {
                r.check.passed && r.fock.passed && r.formfactor.passed && r.smatrix.passed && r.nuclearity.passed
            });
            let full = FullReport {
                seed: config.seed,
                families: reports,
                passed,
            };
            Outcome {
                passed,
                text: render(&full, config.format),
            }
        }
    };
    Ok(outcome)
}

/// Runs and writes the output; returns the process exit code.
pub fn execute(config: &RunConfig) -> i32 {
    let outcome = match run(config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("fsmat: {e}");
            return e.exit_code();
        }
    };
    let written = match &config.out {
        Some(path) => fs::write(path, &outcome.text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => std::io::stdout()
            .write_all(outcome.text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    };
    match written {
        Ok(()) => outcome.exit_code(),
        Err(e) => {
            eprintln!("fsmat: {e}");
            e.exit_code()
        }
    }
}
