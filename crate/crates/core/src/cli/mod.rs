//! Command-line front end.
//!
//! Exit codes: 0 when every empirical check passes, 2 when one fails
//! (reports are still written), 1 on usage or configuration errors.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::{Error, Result};
use commands::Outcome;
use config::{parse_config, to_json, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "dirac-floquet", version, about = "Spectral toolkit for periodic Dirac operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for JSON/CSV reports.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Fourier cutoff; overrides the config value.
    #[arg(long, global = true)]
    pub cutoff: Option<f64>,
    /// RNG seed; overrides the config value.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Band functions along a line and a flat-band diagnostic.
    Bands,
    /// Bracket the averaged-potential smallness condition.
    CheckCondition,
    /// Select a period vector for an atomic sphere measure.
    FindGamma,
    /// Lower bound on the complexified fiber operator.
    VerifyThomas,
    /// Weighted lower bound and its corollary constant.
    VerifyWeighted,
    /// Gauge functions against their sup-norm bound.
    Lemma1,
    /// L1 norm of the radial Bessel kernel.
    KernelConstant,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bands => "bands",
            Command::CheckCondition => "check-condition",
            Command::FindGamma => "find-gamma",
            Command::VerifyThomas => "verify-thomas",
            Command::VerifyWeighted => "verify-weighted",
            Command::Lemma1 => "lemma1",
            Command::KernelConstant => "kernel-constant",
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// Runs one subcommand against an already-loaded configuration.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::Bands => commands::bands(cfg),
        Command::CheckCondition => commands::check_condition(cfg),
        Command::FindGamma => commands::find_gamma_cmd(cfg),
        Command::VerifyThomas => commands::verify_thomas(cfg),
        Command::VerifyWeighted => commands::verify_weighted(cfg),
        Command::Lemma1 => commands::lemma1(cfg),
        Command::KernelConstant => commands::kernel_constant_cmd(cfg),
    }
}

/// Writes `<command>.json`, one `<command>_<table>.csv` per table and the
/// effective configuration.
pub fn write_reports(dir: &Path, command: Command, cfg: &RunConfig, outcome: &Outcome) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let name = command.name();
    std::fs::write(dir.join(format!("{name}.json")), report_json(outcome))?;
    for (t, table) in &outcome.tables {
        std::fs::write(dir.join(format!("{name}_{t}.csv")), table.to_csv())?;
    }
    std::fs::write(dir.join("config.json"), to_json(cfg))?;
    Ok(())
}

pub fn report_json(outcome: &Outcome) -> String {
    let mut s = serde_json::to_string_pretty(&outcome.report).expect("json");
    s.push('\n');
    s
}

fn resolve(common: &Common, command: Command) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => load_config(p)?,
        None if command == Command::KernelConstant => parse_config(r#"{"lattice":{"basis":[[1,0],[0,1]]}}"#)?,
        None => return Err(Error::Config { pointer: "/".into(), message: "--config is required for this command".into() }),
    };
    if let Some(c) = common.cutoff {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Config { pointer: "/cutoff".into(), message: "--cutoff must be positive".into() });
        }
        cfg.cutoff = Some(c);
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn set_threads(threads: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(t) = threads {
        // A second initialisation (tests calling `main_with` repeatedly) is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

/// Full CLI entry point; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    set_threads(cli.common.threads);
    let cfg = match resolve(&cli.common, cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let outcome = match execute(cli.command, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Some(dir) = &cli.common.out {
        if let Err(e) = write_reports(dir, cli.command, &cfg, &outcome) {
            eprintln!("error: {e}");
            return 1;
        }
    }
    print!("{}", report_json(&outcome));
    if outcome.pass {
        0
    } else {
        eprintln!("{}: check failed", cli.command.name());
        2
    }
}
