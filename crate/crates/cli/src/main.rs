use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use orchard_duo_cli::output::ERROR_FILE;
use orchard_duo_cli::{dispatch, CliError, Command, RunConfig};

#[derive(Parser)]
#[command(name = "orchard-duo", version, about = "Two-orchard citrus greening model runner")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// JSON configuration; omitted fields take baseline values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Seed for sensitivity and optimize (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "ORCHARD_DUO_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the model and write the trajectory and its summary.
    Simulate(Common),
    /// Local and global reproduction numbers and the NGM.
    R0(Common),
    /// LHS sweep of the global reproduction number with PRCC.
    Sensitivity(Common),
    /// Genetic-algorithm search for the controls.
    Optimize(Common),
}

fn run(command: Command, args: &Common) -> Result<(), CliError> {
    let config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let manifest = dispatch(command, config, &args.out, args.seed, args.threads)?;
    for f in &manifest.outputs {
        println!("{}", args.out.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::R0(a) => (Command::R0, a),
        Cmd::Sensitivity(a) => (Command::Sensitivity, a),
        Cmd::Optimize(a) => (Command::Optimize, a),
    };
    match run(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let report = serde_json::to_string(&err.report()).expect("report serializes");
            eprintln!("{report}");
            if std::fs::create_dir_all(&args.out).is_ok() {
                let _ = std::fs::write(args.out.join(ERROR_FILE), format!("{report}\n"));
            }
            ExitCode::FAILURE
        }
    }
}
