use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tma::{ingest_function_specs, run_experiment, CliError, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "tma", version, about = "Twisted Monge-Ampere verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the suite named in a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to the config's `out`, then `tma-out`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "TMA_WORKERS")]
        workers: Option<usize>,
    },
    /// Check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check a function specification file (one spec or an array).
    Spec {
        #[arg(long)]
        check: PathBuf,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, seed, out, workers } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if seed.is_some() {
                cfg.seed = seed;
            }
            let dir = out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("tma-out"));
            let workers = workers.unwrap_or_else(rayon::current_num_threads);
            let outcome = run_experiment(&cfg, &dir, workers)?;
            for a in &outcome.manifest.assertions {
                println!(
                    "{} {} {:e} {} {:e}",
                    if a.pass { "PASS" } else { "FAIL" },
                    a.name,
                    a.value,
                    a.relation,
                    a.bound
                );
            }
            println!(
                "{}: {} rows in {:.2}s, report in {}",
                outcome.manifest.suite,
                outcome.manifest.rows,
                outcome.manifest.wall_seconds,
                dir.display()
            );
            Ok(outcome.exit_code())
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            cfg.validate()?;
            println!("{}: ok ({})", config.display(), cfg.suite.name());
            Ok(0)
        }
        Command::Spec { check } => {
            let specs = ingest_function_specs(&check)?;
            for (i, s) in specs.iter().enumerate() {
                println!("{i}: k={} l={} {:?} dim={} time_dependent={}", s.k, s.l, s.flavor, s.dim(), s.time_dependent);
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("tma: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
