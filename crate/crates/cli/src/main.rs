use std::path::PathBuf;
use std::process::ExitCode;

use cdgreen_cli::svg::Scale;
use cdgreen_cli::{run, CliError, Command, Format, Options, RunConfig};
use clap::error::ErrorKind;
use clap::Parser;

/// Green's functions of singularly perturbed convection-diffusion: field
/// exports, L1 norm studies, finite-difference checks.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 for usage
/// or configuration errors, 3 for I/O errors, 4 for numerical failures.
#[derive(Debug, Parser)]
#[command(name = "cdgreen", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration; the default anisotropic setup when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for the data-parallel core.
    #[arg(long)]
    threads: Option<usize>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write SVG heatmaps / charts.
    #[arg(long)]
    svg: bool,
    /// Linear instead of logarithmic heatmap colours.
    #[arg(long)]
    linear: bool,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

fn fail(err: CliError) -> ExitCode {
    eprintln!("{}", err.to_json());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(CliError::Usage(e.kind().to_string() + ": " + e.to_string().lines().next().unwrap_or(""))),
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail(CliError::Usage("--threads must be at least 1".into()));
        }
        if let Err(e) = cdgreen::par::configure_threads(n) {
            return fail(CliError::Usage(format!("--threads: {e}")));
        }
    }
    let config = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => return fail(e),
        },
        None => RunConfig::fig1(),
    };
    let opts = Options {
        out: cli.out,
        tol: cli.tol,
        format: cli.format,
        svg: cli.svg,
        scale: if cli.linear { Scale::Linear } else { Scale::Log },
        exec: if cli.sequential { cdgreen::Execution::Sequential } else { cdgreen::Execution::Parallel },
    };
    match run(cli.command, &config, &opts) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            if summary.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail(e),
    }
}
