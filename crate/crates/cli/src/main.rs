use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use zeno_cli::output::write_output;
use zeno_cli::{dispatch, parse_config, CliError, Command, Format};

#[derive(Debug, Parser)]
#[command(
    name = "zeno",
    version,
    about = "Zeno dynamics of a noisy, continuously measured qubit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; overrides `output` in the config. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    format: Option<Format>,

    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweeps and ensembles.
    #[arg(long, global = true, env = "ZENO_THREADS")]
    threads: Option<usize>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => return Err(CliError::Validation("--config <path> is required".into())),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(format) = cli.format {
        cfg.format = format;
    }
    let out = cli.out.or_else(|| cfg.output.clone());
    let rendered = dispatch(cli.command, &cfg)?;
    write_output(out.as_deref(), &rendered)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zeno: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
