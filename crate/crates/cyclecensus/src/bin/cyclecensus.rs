use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use cyclecensus::{
    emit_report, run_experiment, ExperimentConfig, ExperimentKind, Format, HarnessError, RunOptions,
};

/// Run a seeded limit-cycle experiment and write its aggregate report.
#[derive(Debug, Parser)]
#[command(name = "cyclecensus", version)]
struct Cli {
    /// Must match the `experiment` field of the config.
    experiment: ExperimentKind,

    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,

    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,

    /// Overrides `trials`.
    #[arg(long)]
    trials: Option<usize>,

    /// Worker threads.
    #[arg(long, env = "CYCLECENSUS_WORKERS")]
    workers: Option<usize>,

    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = ExperimentConfig::from_path(&cli.config).map_err(|e| match e {
        HarnessError::Io { path, source } => {
            HarnessError::Config(format!("cannot read {}: {source}", path.display()))
        }
        other => other,
    })?;
    if cfg.experiment != cli.experiment {
        return Err(HarnessError::Config(format!(
            "command line asks for {} but the config describes {}",
            cli.experiment, cfg.experiment
        )));
    }
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    let cfg = load(cli)?;
    let start = Instant::now();
    let report = run_experiment(
        &cfg,
        &RunOptions {
            workers: cli.workers,
        },
    )?;
    emit_report(&report, cli.format, cli.out.as_deref())?;
    // kept out of the report so that reruns are byte-identical
    eprintln!(
        "cyclecensus: {} finished in {:.3} s",
        cfg.experiment,
        start.elapsed().as_secs_f64()
    );
    report.check_exclusions()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cyclecensus: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
