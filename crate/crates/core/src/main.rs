use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spectral_xai::experiment::{
    cmd_bench_samples, cmd_evaluate, cmd_explain, cmd_reproduce_appendix_f, write_outputs, ExperimentConfig,
};
use spectral_xai::Error;

#[derive(Parser)]
#[command(name = "spectral-xai", version, about = "Spectral surrogate explanations for Boolean-input black boxes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit every configured method and write explanation records.
    Explain(RunArgs),
    /// Compute metric tables (CSV and JSON).
    Evaluate(RunArgs),
    /// Recompute the three reference tables and diff them against the printed values.
    ReproduceAppendixF {
        /// Emit the per-cell report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Harmonica vs Low-degree spectrum error across sample sizes.
    BenchSamples {
        #[command(flatten)]
        run: RunArgs,
        /// Overrides the number of repetitions.
        #[arg(long)]
        repetitions: Option<usize>,
    },
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_ORACLE: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

fn load(run: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(&run.config)?;
    if let Some(seed) = run.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &run.output {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

fn emit(cfg: &ExperimentConfig, files: &[(String, String)]) -> Result<(), Error> {
    match &cfg.output {
        Some(dir) => {
            write_outputs(dir, files)?;
            for (name, _) in files {
                eprintln!("wrote {}", dir.join(name).display());
            }
        }
        None => {
            for (_, contents) in files {
                print!("{contents}");
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Explain(args) => {
            let cfg = load(&args)?;
            let files = cmd_explain(&cfg)?;
            emit(&cfg, &files)?;
        }
        Command::Evaluate(args) => {
            let cfg = load(&args)?;
            let out = cmd_evaluate(&cfg)?;
            if cfg.output.is_some() {
                emit(&cfg, &[("metrics.csv".into(), out.csv), ("metrics.json".into(), out.json)])?;
            } else {
                print!("{}", out.csv);
            }
        }
        Command::ReproduceAppendixF { json } => {
            let report = cmd_reproduce_appendix_f()?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                print!("{}", report.text);
            }
            if report.mismatches() > 0 {
                return Ok(EXIT_MISMATCH);
            }
        }
        Command::BenchSamples { run, repetitions } => {
            let mut cfg = load(&run)?;
            if let (Some(r), Some(b)) = (repetitions, cfg.bench.as_mut()) {
                b.repetitions = r;
            }
            let out = cmd_bench_samples(&cfg)?;
            if cfg.output.is_some() {
                emit(&cfg, &[("bench.csv".into(), out.csv), ("bench.json".into(), out.json)])?;
            } else {
                print!("{}", out.csv);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Oracle { .. } => EXIT_ORACLE,
                _ => EXIT_VALIDATION,
            })
        }
    }
}
