use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cellfree::harness::{emit_results, load_config, run_experiment, ExperimentKind, PrecoderChoice, RunConfig, RunOptions};

#[derive(Parser)]
#[command(version, about = "Cell-free massive MIMO sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; omitted tables and keys take desk defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding `system.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// CSV destination.
    #[arg(long, global = true, default_value = "results.csv")]
    out: PathBuf,
    /// `mrt`, `zf` or `both`, overriding `experiment.precoder`.
    #[arg(long, global = true, value_parser = parse_precoder)]
    precoder: Option<PrecoderChoice>,
    /// Worker threads; 0 uses every core. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Analytic channel-estimation NMSE over fronthaul capacity and ADC resolution.
    NmseSweep,
    /// Per-block max-min SINR and rate.
    Maxmin,
    /// Energy efficiency over converter resolution.
    EeSweep,
    /// Monte Carlo check of the additive quantization-noise model.
    ValidateAqnm,
}

fn parse_precoder(s: &str) -> Result<PrecoderChoice, String> {
    s.parse().map_err(|e: cellfree::Error| e.to_string())
}

fn run(cli: &Cli) -> cellfree::Result<usize> {
    let kind = match cli.command {
        Command::NmseSweep => ExperimentKind::NmseSweep,
        Command::Maxmin => ExperimentKind::Maxmin,
        Command::EeSweep => ExperimentKind::EeSweep,
        Command::ValidateAqnm => ExperimentKind::ValidateAqnm,
    };
    let mut config = match &cli.config {
        Some(path) => load_config(path).map_err(|e| e.at("config"))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.system.seed = seed;
    }
    if let Some(p) = cli.precoder {
        config.experiment.precoder = p;
    }
    let opts = RunOptions { threads: cli.threads, ..Default::default() };
    let rows = run_experiment(kind, &config, &opts).map_err(|e| e.at(kind.name()))?;
    emit_results(&rows, &cli.out).map_err(|e| e.at("output"))?;
    Ok(rows.len())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(n) => {
            eprintln!("wrote {n} rows to {}", cli.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
