use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use treelink_cli::{run, CliError, Command, ExperimentSpec};

#[derive(Debug, Parser)]
#[command(name = "treelink", version, about = "Tree-encoded all-photonic repeater models")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment file (TOML). Defaults apply to anything it leaves out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV destination; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Companion matplotlib script for bsm-curve and rate-envelope.
    #[arg(long, global = true)]
    plot: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo samples per oracle estimate.
    #[arg(long, global = true)]
    samples: Option<u64>,
    #[arg(long, global = true, value_enum)]
    variant: Option<Variant>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// Logical BSM success probability against loss.
    BsmCurve,
    /// Rate envelopes over the number of repeaters, with fitted exponents.
    RateEnvelope,
    /// Exhaustive search for the best trees and chain settings.
    Optimize,
    /// Check the adaptive closed forms against exact enumeration.
    Validate,
    /// Direct-transmission rate against distance.
    Repeaterless,
    /// List configurations matching target repeater-graph-state sizes.
    CalibrateFig4,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Variant {
    AsPrinted,
    Symmetrized,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::BsmCurve => Command::BsmCurve,
            Cmd::RateEnvelope => Command::RateEnvelope,
            Cmd::Optimize => Command::Optimize,
            Cmd::Validate => Command::Validate,
            Cmd::Repeaterless => Command::Repeaterless,
            Cmd::CalibrateFig4 => Command::CalibrateFig4,
        }
    }
}

fn resolve(args: &Args) -> Result<ExperimentSpec, CliError> {
    let mut spec = match &args.config {
        Some(path) => ExperimentSpec::load(path)?,
        None => ExperimentSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.oracle.seed = seed;
    }
    if let Some(samples) = args.samples {
        if samples == 0 {
            return Err(CliError::Input("--samples must be positive".into()));
        }
        spec.oracle.samples = samples;
    }
    if let Some(v) = args.variant {
        let name = match v {
            Variant::AsPrinted => "as-printed",
            Variant::Symmetrized => "symmetrized",
        };
        spec.variant = Some(name.into());
    }
    if let Some(out) = &args.out {
        spec.output.csv = Some(out.clone());
    }
    if let Some(plot) = &args.plot {
        spec.output.plot_script = Some(plot.clone());
    }
    Ok(spec)
}

fn execute(args: &Args) -> Result<Option<String>, CliError> {
    let spec = resolve(args)?;
    let report = run(args.command.into(), &spec)?;
    let body = report.table.render();
    match &spec.output.csv {
        Some(path) => std::fs::write(path, body)?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    if let (Some(path), Some(script)) = (&spec.output.plot_script, &report.plot_script) {
        std::fs::write(path, script)?;
    }
    Ok(report.failure)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) => {
            eprintln!("treelink: {}", CliError::Validation(failure));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("treelink: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
