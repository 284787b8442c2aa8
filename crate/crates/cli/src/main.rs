use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cbwlc_cli::{emit_results, load_config, prepare};

const CONFIG_ERROR: u8 = 2;
const RUNTIME_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cbwlc",
    version,
    about = "Primal-dual contextual bandits with linear constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every replication of an experiment and write the result files.
    Run {
        config: PathBuf,
        /// Output directory (default: the config's `output.dir`, else `results`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the per-round trace.
        #[arg(long)]
        trace: bool,
        /// Replications run concurrently (default: available cores).
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Print the LP benchmark, Slater margin and pacing benchmark.
    BenchLp { config: PathBuf },
    /// Check a config and list every problem found.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Validate { config } => match load_config(&config) {
            Ok(_) => {
                println!("{}: ok", config.display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(CONFIG_ERROR)
            }
        },
        Command::BenchLp { config } => {
            let prepared = match load_config(&config).and_then(prepare) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(CONFIG_ERROR);
                }
            };
            let b = &prepared.benchmarks;
            println!("OPT_LP  {}", b.opt_lp);
            println!("zeta    {}", b.zeta);
            println!("OPT     {}", b.opt);
            println!("OPT_pac {}", b.opt_pac);
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            out,
            trace,
            parallel,
        } => {
            let prepared = match load_config(&config).and_then(prepare) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(CONFIG_ERROR);
                }
            };
            let dir = out
                .or_else(|| prepared.config.output.dir.clone())
                .unwrap_or_else(|| PathBuf::from("results"));
            let trace = trace || prepared.config.output.trace;
            let parallel = parallel.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let bundle = match prepared.run_all(parallel, trace) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("cannot start worker pool: {e}");
                    return ExitCode::from(RUNTIME_ERROR);
                }
            };
            match emit_results(&bundle, &dir) {
                Ok(files) => {
                    for f in files {
                        println!("wrote {}", f.display());
                    }
                }
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(RUNTIME_ERROR);
                }
            }
            let failed = bundle.failures().count();
            if failed > 0 {
                eprintln!("{failed} of {} replications failed", bundle.replications.len());
                return ExitCode::from(RUNTIME_ERROR);
            }
            ExitCode::SUCCESS
        }
    }
}
