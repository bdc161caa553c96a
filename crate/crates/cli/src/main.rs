use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Solve,
    Sweep,
    Regimes,
    Elliptic,
    Check,
}

impl ModeArg {
    fn name(self) -> &'static str {
        match self {
            ModeArg::Solve => "solve",
            ModeArg::Sweep => "sweep",
            ModeArg::Regimes => "regimes",
            ModeArg::Elliptic => "elliptic",
            ModeArg::Check => "check",
        }
    }
}

/// Stationary one-dimensional first-order mean-field games.
#[derive(Debug, Parser)]
#[command(name = "mfg1d", version)]
struct Args {
    mode: ModeArg,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; overrides `output` in the configuration. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match mfg1d_cli::run(args.mode.name(), &args.config, args.out.as_deref()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
