use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qkernel::experiments::{emit_outputs, run_study, ExperimentConfig, Study};
use qkernel::{Error, Parallelism};

const EXIT_CONFIG: u8 = 2;
const EXIT_PARTIAL: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

/// Fidelity quantum kernel experiments on an exact statevector simulator.
#[derive(Parser, Debug)]
#[command(name = "qkernel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Accuracy and kernel magnitude over a grid of scaling factors.
    BandwidthSweep(RunArgs),
    /// Accuracy over a grid of data dimensions (qubit counts).
    QubitSweep(RunArgs),
    /// Exact versus shot-noise kernels with PSD repair.
    NoiseStudy(RunArgs),
    /// Accuracy with circuit inputs rounded to a few decimals.
    PrecisionStudy(RunArgs),
    /// Parse a config and print it with all defaults filled in.
    ValidateConfig(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Config file (`key = value` lines) or a previous run's manifest.json.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Qubit cap; overrides `max_qubits` in the config.
    #[arg(long, value_name = "Q")]
    max_qubits: Option<usize>,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(q) = self.max_qubits {
            cfg.max_qubits = q;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parallelism(threads: Option<usize>) -> Result<Parallelism, Error> {
    if threads == Some(0) {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    if threads == Some(1) || !cfg!(feature = "parallel") {
        return Ok(Parallelism::Sequential);
    }
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?;
    }
    Ok(Parallelism::Rayon)
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if matches!(e, Error::Config(_)) { EXIT_CONFIG } else { EXIT_RUNTIME })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (study, args) = match &cli.command {
        Command::BandwidthSweep(a) => (Study::Bandwidth, a),
        Command::QubitSweep(a) => (Study::Qubit, a),
        Command::NoiseStudy(a) => (Study::Noise, a),
        Command::PrecisionStudy(a) => (Study::Precision, a),
        Command::ValidateConfig(a) => {
            return match a.resolve() {
                Ok(cfg) => {
                    print!("{}", cfg.to_text());
                    ExitCode::SUCCESS
                }
                Err(e) => exit_for(&e),
            };
        }
    };
    let cfg = match args.resolve() {
        Ok(cfg) => cfg,
        Err(e) => return exit_for(&e),
    };
    let mode = match parallelism(args.threads) {
        Ok(m) => m,
        Err(e) => return exit_for(&e),
    };
    let run = match run_study(&cfg, study, mode) {
        Ok(run) => run,
        Err(e) => return exit_for(&e),
    };
    if let Err(e) = emit_outputs(&cfg.out, &cfg, &run) {
        return exit_for(&e);
    }
    for row in run.rows.iter().filter(|r| !r.note.is_empty()) {
        eprintln!(
            "{} dim={} scaling={}: {}",
            row.status.as_str(),
            row.dim,
            row.scaling_factor,
            row.note
        );
    }
    println!(
        "{}: {} rows ({} skipped, {} failed) written to {}",
        study.name(),
        run.rows.len(),
        run.n_skipped(),
        run.n_errors(),
        cfg.out.display()
    );
    if run.n_errors() > 0 {
        ExitCode::from(EXIT_RUNTIME)
    } else if run.n_skipped() > 0 {
        ExitCode::from(EXIT_PARTIAL)
    } else {
        ExitCode::SUCCESS
    }
}
