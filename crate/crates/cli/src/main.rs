use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phonodrift::SchemeRegistry;
use phonodrift_cli::commands::{self, IngestFormat};
use phonodrift_cli::config::parse_config;
use phonodrift_cli::CliError;

/// Stochastic phoneme-frequency sound-change simulator.
#[derive(Parser)]
#[command(name = "phonodrift", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble and write trajectories, final distributions and a manifest.
    Simulate {
        /// `key = value` config file. Without one the preset (or sim1) is used as is.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Named preset: sim1, sim2 or sim3.
        #[arg(long)]
        preset: Option<String>,
        /// Overrides `master_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads. Output does not depend on this.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank-frequency, entropy, correlation and regression for a directory
    /// holding final_distributions.csv.
    Analyze {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert an empirical inventory file to final_distributions.csv.
    Ingest {
        /// freq-csv or wordlist-tsv.
        #[arg(long)]
        format: IngestFormat,
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two analysis directories.
    Compare {
        simulated: PathBuf,
        empirical: PathBuf,
        /// Also write comparison.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            config,
            preset,
            seed,
            workers,
            out,
        } => {
            let text = match &config {
                Some(path) => std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
                None => String::new(),
            };
            let registry = SchemeRegistry::builtin();
            let mut loaded = parse_config(&text, preset.as_deref(), seed, &registry)?;
            if let Some(w) = workers {
                if w == 0 {
                    return Err(CliError::Usage("--workers must be at least 1".into()));
                }
                loaded.workers = Some(w);
            }
            let s = commands::simulate(&loaded, &out)?;
            eprintln!(
                "simulated {} languages ({} trajectory rows) into {}",
                s.languages,
                s.trajectory_rows,
                out.display()
            );
        }
        Command::Analyze { input, out } => {
            let s = commands::analyze(&input, &out)?;
            match s.correlation {
                Some((r, p)) => eprintln!("{} languages, r = {r:.4}, p = {p:.3e}", s.languages),
                None => eprintln!("{} languages, correlation undefined", s.languages),
            }
        }
        Command::Ingest { format, input, out } => {
            let s = commands::ingest(format, &input, &out)?;
            eprintln!(
                "{} languages accepted, {} rejected",
                s.accepted,
                s.rejected.len()
            );
        }
        Command::Compare {
            simulated,
            empirical,
            out,
        } => {
            let report = commands::compare(&simulated, &empirical, out.as_deref())?;
            print!("{report}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
