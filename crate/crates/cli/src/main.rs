use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use wpt_relay_cli::sweep::OUT_DIR_ENV;
use wpt_relay_cli::{load_config, parse_config, run_sweep, CliError, Mode, SweepSpec};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Sweep,
    SelectionFreq,
}

/// Monte Carlo sweeps of relay selection with power-transfer incentives.
#[derive(Debug, Parser)]
#[command(name = "wpt-relay", version)]
struct Args {
    /// Configuration file; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trials per cell.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

fn resolve(args: &Args) -> Result<SweepSpec, CliError> {
    let mut spec = match &args.config {
        Some(path) => load_config(path)?,
        None => parse_config("")?,
    };
    if let Some(t) = args.trials {
        spec.base.n_trials = t;
    }
    if let Some(s) = args.seed {
        spec.base.seed = s;
    }
    if let Some(m) = args.mode {
        spec.mode = match m {
            ModeArg::Sweep => Mode::Sweep,
            ModeArg::SelectionFreq => Mode::SelectionFreq,
        };
    }
    match &args.out {
        Some(out) => spec.output_path = out.clone(),
        None => {
            if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
                if spec.output_path.is_relative() {
                    spec.output_path = PathBuf::from(dir).join(&spec.output_path);
                }
            }
        }
    }
    spec.validate()?;
    Ok(spec)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = resolve(&args).and_then(|spec| run_sweep(&spec, !args.quiet));
    match result {
        Ok(out) => {
            if !args.quiet {
                eprintln!("wrote {} rows to {}", out.rows, out.csv_path.display());
                eprintln!("manifest: {}", out.manifest_path.display());
                if let Some(p) = out.selection_path {
                    eprintln!("selection frequencies: {}", p.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
