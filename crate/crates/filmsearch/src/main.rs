use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use filmsearch::commands::{self, CommandError};
use filmsearch::config::RunConfig;

#[derive(Parser)]
#[command(name = "filmsearch", version, about = "Multilayer thin-film design by material-space search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of search workers.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// -v for progress, -vv for debug output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a catalog directory and summarize it.
    Ingest {
        /// Catalog directory; defaults to the configured catalog.
        dir: Option<PathBuf>,
    },
    /// Train the encoder and write the material map.
    Embed,
    /// Search for the best design and write a result bundle.
    Design,
    /// Score a fixed design.
    Evaluate {
        /// Comma-separated material names, incident side first.
        #[arg(long, value_delimiter = ',', required = true)]
        materials: Vec<String>,
        /// Comma-separated thicknesses in nm.
        #[arg(long, value_delimiter = ',', required = true)]
        thicknesses: Vec<f64>,
    },
    /// Render spectrum and trace plots from a bundle.
    Plot {
        /// Bundle directory; defaults to --out.
        bundle: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, CommandError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(w) = cli.workers {
        cfg.a3c.workers = w;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<String, CommandError> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Ingest { dir } => {
            let dir = match dir {
                Some(d) => d.clone(),
                None => load_config(cli)?.catalog,
            };
            commands::ingest(&dir)
        }
        Command::Embed => commands::embed(&load_config(cli)?, out).map(|o| o.report),
        Command::Design => {
            if cli.config.is_none() {
                return Err(CommandError::Input("design needs --config".into()));
            }
            commands::design(&load_config(cli)?, out.unwrap_or(Path::new("results")))
        }
        Command::Evaluate { materials, thicknesses } => {
            commands::evaluate(&load_config(cli)?, materials, thicknesses, out.unwrap_or(Path::new(".")))
        }
        Command::Plot { bundle } => {
            let dir = bundle.as_deref().or(out).ok_or_else(|| CommandError::Input("plot needs a bundle directory".into()))?;
            commands::plot(dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
