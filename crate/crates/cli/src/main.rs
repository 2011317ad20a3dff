use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use scatter_cli::{run_file, CliError, Format, Overrides, Subcommand};

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Born-series scattering amplitudes, propagators and S-matrix checks.
#[derive(Debug, Parser)]
#[command(name = "scatter", version)]
struct Args {
    #[arg(value_enum)]
    command: Subcommand,
    /// Scenario file.
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when neither this nor `[output] path` is set.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Resolvent regulator (replaces the epsilon schedule in greens-check).
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    let overrides = Overrides {
        epsilon: args.epsilon,
        order: args.order,
        horizon: args.horizon,
        seed: args.seed,
        format: args.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }),
    };
    let (scenario, table) = run_file(args.command, &args.config, &overrides)?;
    let text = table.render(scenario.output.format);
    let target = args.out.clone().or_else(|| scenario.output.path.as_ref().map(PathBuf::from));
    match target {
        Some(path) => std::fs::write(&path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e)),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| CliError::io("writing stdout", e)),
    }
}
