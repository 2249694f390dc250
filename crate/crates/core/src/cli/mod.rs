// Copyright 2026 The kraus_landscape Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line harness: `range`, `topology`, `kinematic`, `dynamic` and
//! `validate`.
//!
//! Exit codes are 0 on success, 1 when `validate` finds a failing invariant
//! and 2 for configuration or runtime errors.

pub mod config;
pub mod experiments;
pub mod validate;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use config::{ConfigError, Experiment, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kraus-landscape", version, about = "Control landscapes of open quantum systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; overrides `output_path` from the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for stochastic experiments; overrides `seed` from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the number of logical CPUs.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Dynamical range versus temperature (CSV).
    Range,
    /// Critical-submanifold counts for a marginal structure (JSON).
    Topology,
    /// Multi-start gradient search on the kinematic landscape (JSON).
    Kinematic,
    /// Conjugate-gradient field optimization (JSON plus trace and field CSV).
    Dynamic,
    /// Seeded invariant suite (JSON report).
    Validate,
}

impl Command {
    fn experiment(self) -> Experiment {
        match self {
            Self::Range => Experiment::RangeSweep,
            Self::Topology => Experiment::TopologyReport,
            Self::Kinematic => Experiment::KinematicSearch,
            Self::Dynamic => Experiment::DynamicOptimize,
            Self::Validate => Experiment::Validate,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Compute(#[from] crate::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// `%.12g`-style formatting used for every CSV number.
pub fn format_g12(x: f64) -> String {
    const SIG: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG).contains(&exp) {
        let decimals = (SIG - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|source| CliError::Io { path: p.to_owned(), source })?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let io_err = |source| CliError::Io { path: path.map_or_else(|| "stdout".into(), Path::to_owned), source };
    let mut w = open_output(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dynamic".into());
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| ConfigError::Invalid(format!("{what} is stochastic and needs --seed or a `seed` key")).into())
}

/// Executes one command and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return EXIT_CONFIG;
        }
        // Only fails when a global pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match execute(cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VALIDATION,
        // a closed pipe (`| head`) is the reader's choice, not a failure
        Err(CliError::Io { ref source, .. }) if source.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

/// Returns `Ok(false)` when validation ran but found failures.
fn execute(cli: &Cli) -> Result<bool, CliError> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(exp) = cfg.experiment {
        if exp != cli.command.experiment() {
            return Err(ConfigError::Invalid(format!(
                "config is for {exp:?} but the command runs {:?}",
                cli.command.experiment()
            ))
            .into());
        }
    }
    let out = cli.out.clone().or_else(|| cfg.output_path.clone());
    let out = out.as_deref();
    let seed = cli.seed.or(cfg.seed);

    match cli.command {
        Command::Range => {
            let rows = experiments::range_sweep(&cfg.range_sweep)?;
            let w = open_output(out)?;
            experiments::write_range_csv(&rows, w)
                .map_err(|source| CliError::Io { path: out.map_or_else(|| "stdout".into(), Path::to_owned), source })?;
        }
        Command::Topology => write_json(&experiments::topology_report(&cfg.topology_report)?, out)?,
        Command::Kinematic => {
            let k = &cfg.kinematic_search;
            let seed = if k.start_from_optimum { seed.unwrap_or(0) } else { require_seed(seed, "kinematic")? };
            write_json(&experiments::kinematic_search(k, seed)?, out)?;
        }
        Command::Dynamic => {
            let seed = require_seed(seed, "dynamic")?;
            let path = out.ok_or_else(|| ConfigError::Invalid("dynamic writes several files and needs --out".into()))?;
            let report = experiments::dynamic_optimize(&cfg.dynamic_optimize, seed)?;
            for (suffix, write) in [
                ("trace", experiments::write_trace_csv as fn(&_, Box<dyn Write>) -> std::io::Result<()>),
                ("field", experiments::write_field_csv),
            ] {
                let p = sibling(path, suffix);
                write(&report, open_output(Some(&p))?).map_err(|source| CliError::Io { path: p.clone(), source })?;
            }
            write_json(&report, Some(path))?;
        }
        Command::Validate => {
            let report = validate::run_validation(cfg.validate.trials);
            write_json(&report, out)?;
            for inv in report.invariants.iter().filter(|i| !i.passed) {
                eprintln!("invariant failed: {}", inv.name);
            }
            return Ok(report.passed);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_g12(0.4), "0.4");
        assert_eq!(format_g12(1.0), "1");
        assert_eq!(format_g12(-0.2), "-0.2");
        assert_eq!(format_g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_g12(123456.789), "123456.789");
        assert_eq!(format_g12(1e-7), "1e-07");
        assert_eq!(format_g12(2.5e15), "2.5e+15");
        assert_eq!(format_g12(0.0001234), "0.0001234");
        assert_eq!(format_g12(f64::INFINITY), "inf");
        assert_eq!(format_g12(999999999999.7), "1e+12");
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("/tmp/run.json"), "trace"), PathBuf::from("/tmp/run_trace.csv"));
    }
}
