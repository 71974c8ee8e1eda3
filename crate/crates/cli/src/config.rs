//! Command-line grammar, the optional `key = value` config file, and the
//! resolved [`RunConfig`].
//!
//! Each setting is taken from the command line if given, else from the
//! config file, else from the per-command default.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Nearest-neighbour correlators and their derivatives.
    Correlators,
    /// Susceptibility with block contributions, optionally checked by the oracle.
    Rfs,
    /// χ(λ) on a size × coupling grid.
    Sweep,
    /// Location and height of the susceptibility peak per size.
    Peak,
    /// Peaks plus the √χ_m vs ln N fit.
    Scaling,
    /// Data collapse of √χ_m − √χ(λ) against N^ν(λ − λ_m).
    Collapse,
    /// Thermodynamic-limit correlators and susceptibility, with the
    /// χ vs ln(1/|1−λ|) fit on both sides of λ = 1.
    Thermo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Correlators => "correlators",
            Command::Rfs => "rfs",
            Command::Sweep => "sweep",
            Command::Peak => "peak",
            Command::Scaling => "scaling",
            Command::Collapse => "collapse",
            Command::Thermo => "thermo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Exact susceptibility of the transverse-field Ising chain's two-site
/// reduced density matrix.
#[derive(Debug, Clone, Parser)]
#[command(name = "tfim-rfs", version)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,

    /// Comma-separated even chain lengths.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,

    /// Lower end of the coupling range. For `collapse`, the lower end of
    /// the window in units of N(λ − λ_m).
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_min: Option<f64>,

    /// Upper end of the coupling range (or collapse window).
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_max: Option<f64>,

    /// Number of evenly spaced couplings (samples per size for `collapse`).
    #[arg(long)]
    pub steps: Option<usize>,

    /// Base step of the fidelity oracle.
    #[arg(long)]
    pub delta: Option<f64>,

    /// Collapse exponent.
    #[arg(long)]
    pub nu: Option<f64>,

    /// Also evaluate the fidelity oracle and report its discrepancy.
    #[arg(long)]
    pub verify: bool,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// File of `key = value` lines supplying defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl LambdaRange {
    /// The grid points, min first; `steps == 1` yields just `min`.
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let span = self.max - self.min;
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == last {
                    self.max
                } else {
                    self.min + span * i as f64 / last as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub sizes: Vec<usize>,
    pub lambda_range: LambdaRange,
    pub delta: f64,
    pub nu: f64,
    pub output_format: Format,
    pub output_path: Option<PathBuf>,
    pub verify: bool,
}

pub const DEFAULT_DELTA: f64 = 1e-4;
pub const DEFAULT_NU: f64 = 1.0;
pub const MIN_SCALING_SIZES: usize = 5;
pub const MIN_COLLAPSE_SIZES: usize = 3;

struct Defaults {
    sizes: Vec<usize>,
    range: LambdaRange,
}

fn defaults(command: Command) -> Defaults {
    let range = |min, max, steps| LambdaRange { min, max, steps };
    match command {
        Command::Correlators | Command::Rfs => Defaults {
            sizes: vec![1024],
            range: range(0.5, 1.5, 11),
        },
        Command::Sweep => Defaults {
            sizes: vec![12, 52, 252],
            range: range(0.8, 1.1, 301),
        },
        Command::Peak => Defaults {
            sizes: vec![12, 52, 252, 1024, 4096],
            range: range(0.8, 1.1, 41),
        },
        Command::Scaling => Defaults {
            sizes: (9..=14).map(|p| 1 << p).collect(),
            range: range(0.8, 1.1, 41),
        },
        Command::Collapse => Defaults {
            sizes: vec![512, 1024, 2048, 4096],
            range: range(-10.0, 10.0, 201),
        },
        Command::Thermo => Defaults {
            sizes: Vec::new(),
            range: range(0.5, 1.5, 11),
        },
    }
}

/// Parses a flat config file: one `key = value` per line, `#` starts a
/// comment, blank lines are ignored.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut entries = BTreeMap::new();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config line {}: expected `key = value`",
                number + 1
            ))
        })?;
        let key = key.trim().replace('-', "_");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key `{key}`",
                number + 1
            )));
        }
        entries.insert(key, value.trim().to_string());
    }
    Ok(entries)
}

const KNOWN_KEYS: [&str; 9] = [
    "sizes",
    "lambda_min",
    "lambda_max",
    "steps",
    "delta",
    "nu",
    "verify",
    "format",
    "out",
];

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("config: cannot parse `{value}` for `{key}`")))
}

fn parse_sizes(value: &str) -> Result<Vec<usize>, CliError> {
    value
        .split(',')
        .map(|s| parse_value("sizes", s.trim()))
        .collect()
}

impl RunConfig {
    /// Merges flags, the config file named by `--config` (if any) and the
    /// command defaults, then validates the result.
    pub fn resolve(args: &Args) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };
        Self::resolve_with(args, &file)
    }

    pub fn resolve_with(args: &Args, file: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let d = defaults(args.command);
        let from_file = |key: &str| file.get(key).map(String::as_str);

        let sizes = match (&args.sizes, from_file("sizes")) {
            (Some(s), _) => s.clone(),
            (None, Some(v)) => parse_sizes(v)?,
            (None, None) => d.sizes,
        };
        let pick = |flag: Option<f64>, key: &str, default: f64| -> Result<f64, CliError> {
            match (flag, from_file(key)) {
                (Some(v), _) => Ok(v),
                (None, Some(v)) => parse_value(key, v),
                (None, None) => Ok(default),
            }
        };
        let lambda_range = LambdaRange {
            min: pick(args.lambda_min, "lambda_min", d.range.min)?,
            max: pick(args.lambda_max, "lambda_max", d.range.max)?,
            steps: match (args.steps, from_file("steps")) {
                (Some(v), _) => v,
                (None, Some(v)) => parse_value("steps", v)?,
                (None, None) => d.range.steps,
            },
        };
        let delta = pick(args.delta, "delta", DEFAULT_DELTA)?;
        let nu = pick(args.nu, "nu", DEFAULT_NU)?;
        let verify = args.verify
            || match from_file("verify") {
                Some(v) => parse_value::<bool>("verify", v)?,
                None => false,
            };
        let output_format = match (args.format, from_file("format")) {
            (Some(f), _) => f,
            (None, Some(v)) => Format::from_str(v, true)
                .map_err(|_| CliError::Usage(format!("config: unknown format `{v}`")))?,
            (None, None) => Format::Csv,
        };
        let output_path = args
            .out
            .clone()
            .or_else(|| from_file("out").map(PathBuf::from));

        let cfg = RunConfig {
            command: args.command,
            sizes,
            lambda_range,
            delta,
            nu,
            output_format,
            output_path,
            verify,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if let Some(n) = self.sizes.iter().find(|n| **n < 4 || **n % 2 != 0) {
            return usage(format!("sizes must be even and at least 4, got {n}"));
        }
        if self.command != Command::Thermo && self.sizes.is_empty() {
            return usage("at least one size is required".into());
        }
        let r = self.lambda_range;
        if !(r.min.is_finite() && r.max.is_finite() && r.min < r.max) {
            return usage(format!(
                "need lambda-min < lambda-max, got {} and {}",
                r.min, r.max
            ));
        }
        if r.steps < 1 {
            return usage("steps must be at least 1".into());
        }
        if self.command != Command::Collapse && r.min < 0.0 {
            return usage(format!("couplings must be non-negative, got {}", r.min));
        }
        let (lo, hi) = tfim_rfs_core::rfs::ORACLE_DELTA_RANGE;
        if !(self.delta >= lo && self.delta <= hi) {
            return usage(format!(
                "delta must lie in [{lo:e}, {hi:e}], got {}",
                self.delta
            ));
        }
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return usage(format!("nu must be positive, got {}", self.nu));
        }
        let distinct = {
            let mut s = self.sizes.clone();
            s.sort_unstable();
            s.dedup();
            s.len()
        };
        match self.command {
            Command::Scaling if distinct < MIN_SCALING_SIZES => usage(format!(
                "scaling needs at least {MIN_SCALING_SIZES} distinct sizes, got {distinct}"
            )),
            Command::Collapse if distinct < MIN_COLLAPSE_SIZES => usage(format!(
                "collapse needs at least {MIN_COLLAPSE_SIZES} distinct sizes, got {distinct}"
            )),
            Command::Collapse if r.steps < 2 => usage("collapse needs at least 2 samples".into()),
            Command::Peak | Command::Scaling if !(r.min > 0.0 && r.max <= 2.0) => usage(format!(
                "peak bracket must satisfy 0 < lo < hi <= 2, got ({}, {})",
                r.min, r.max
            )),
            _ => Ok(()),
        }
    }

    /// The resolved settings as ordered key/value pairs, for output headers.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        let sizes = self
            .sizes
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",");
        vec![
            ("command", self.command.name().to_string()),
            ("sizes", sizes),
            ("lambda_min", format!("{:?}", self.lambda_range.min)),
            ("lambda_max", format!("{:?}", self.lambda_range.max)),
            ("steps", self.lambda_range.steps.to_string()),
            ("delta", format!("{:?}", self.delta)),
            ("nu", format!("{:?}", self.nu)),
            ("verify", self.verify.to_string()),
            ("format", self.output_format.to_string()),
        ]
    }

    pub fn output_path(&self) -> Option<&Path> {
        self.output_path.as_deref()
    }
}
