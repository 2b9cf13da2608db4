//! `squeezekit`: protocol runs, sweeps and scaling fits from the command line.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Failure;
use config::Settings;

#[derive(Parser)]
#[command(
    name = "squeezekit",
    version,
    about = "Multipass spin squeezing simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Subcommand)]
enum Command {
    /// One protocol run.
    Run(Common),
    /// Squeezing against γ⊥τ at fixed optical density.
    Sweep(Common),
    /// Peak squeezing against optical density, with fits.
    Scaling(Common),
    /// Closed-form ζ of every protocol against ξ.
    Formulas(Common),
    /// Exact finite-N evolution against the linearized model.
    Oracle(Common),
}

type Handler = fn(&config::RunConfig) -> Result<output::Table, Failure>;

fn execute(command: Command) -> Result<(), Failure> {
    let (name, common, f): (&str, Common, Handler) = match command {
        Command::Run(c) => ("run", c, commands::run),
        Command::Sweep(c) => ("sweep", c, commands::sweep),
        Command::Scaling(c) => ("scaling", c, commands::scaling),
        Command::Formulas(c) => ("formulas", c, commands::formulas),
        Command::Oracle(c) => ("oracle", c, commands::oracle),
    };
    let file = match &common.config {
        Some(path) => config::read_file(path)?,
        None => Settings::default(),
    };
    let cfg = config::validate(common.settings.over(file))?;
    if let Some(threads) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Config(format!("invalid `threads`: {e}")))?;
    }
    let table = f(&cfg)?;
    let text = output::render(name, &cfg, &table);
    output::write(&cfg, &text).map_err(|e| {
        let target = cfg
            .out
            .as_ref()
            .map_or("stdout".into(), |p| p.display().to_string());
        Failure::Config(format!("invalid `out`: cannot write {target}: {e}"))
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
