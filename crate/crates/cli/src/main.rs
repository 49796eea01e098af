//! `overhang`: batch scenario analysis for liquidating or retiring a large
//! dormant bitcoin position.
//!
//! Exit codes: 0 success, 2 validation, 3 unknown entity, 4 computation error.

mod commands;
mod render;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use overhang_core::config::{OutputFormat, RunConfig};
use overhang_core::supply_ledger::ShareBasis;
use overhang_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "overhang",
    version,
    about = "Supply-shock, execution and disposition scenarios for a dormant BTC position"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Emit JSON (full precision, includes the effective config).
    #[arg(long, global = true, group = "format")]
    pub json: bool,
    /// Emit CSV (RFC 4180 quoting, gnuplot-ready blocks).
    #[arg(long, global = true, group = "format")]
    pub csv: bool,
    /// Emit markdown tables (the default).
    #[arg(long, global = true, group = "format")]
    pub markdown: bool,
    /// Run configuration, text or JSON.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// RNG seed; falls back to OVERHANG_SEED, then the config, then 0.
    #[arg(long, global = true, env = "OVERHANG_SEED")]
    pub seed: Option<u64>,
    /// Reference daily spot volume in USD.
    #[arg(long, global = true)]
    pub volume: Option<f64>,
    /// Use the nominal rather than the effective-float share.
    #[arg(long, global = true)]
    pub nominal: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Permanent impact, friction band and total for one supply shift.
    Impact(commands::ImpactArgs),
    /// Run named scenarios, or `scenario sweep` for the sensitivity grid.
    Scenario(commands::ScenarioArgs),
    /// Uniform liquidation schedule and its tranche program.
    Schedule(commands::ScheduleArgs),
    /// Optimal execution trajectories along the mean-variance frontier.
    Frontier(commands::FrontierArgs),
    /// Terminal-state ranking, consistency matrix and supply effects.
    DecisionMap,
    /// Secret sharing, dead-man's switch and disposition replay.
    Mechanism {
        #[command(subcommand)]
        command: commands::MechanismCommand,
    },
    /// Historical anchor events and the friction-gap check.
    Anchors,
}

fn load_config(g: &Global) -> Result<RunConfig, Error> {
    let mut cfg = match &g.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::load(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(v) = g.volume {
        cfg.volume = v;
    }
    if g.nominal {
        cfg.basis = ShareBasis::Nominal;
    }
    if g.json {
        cfg.format = OutputFormat::Json;
    } else if g.csv {
        cfg.format = OutputFormat::Csv;
    } else if g.markdown {
        cfg.format = OutputFormat::Markdown;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = load_config(&cli.global)?;
    let report = commands::dispatch(&cli.command, &cli.global, &cfg)?;
    let mut out = io::stdout().lock();
    // A closed pipe is not an error worth reporting.
    let _ = report.write(&cfg, &mut out).and_then(|_| out.flush());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
