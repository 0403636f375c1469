use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use revfrf_cli::commands::{self, BenchOptions};
use revfrf_cli::config::ExperimentConfig;
use revfrf_cli::metrics::{MetricsOptions, MetricsReport};
use revfrf_cli::synth::SynthConfig;
use revfrf_cli::{CliError, Result};
use revfrf_federation::RevocationLevel;
use revfrf_forest::Task;

#[derive(Parser)]
#[command(name = "revfrf", version, about = "Federated random forests with participant revocation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Experiment configuration (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Classification,
    Regression,
}

#[derive(Subcommand)]
enum Command {
    /// Generate keys and write the public parameters.
    Keygen(ConfigArgs),
    /// Train a forest across the participants.
    Train(ConfigArgs),
    /// Predict one row supplied by a participant.
    Predict {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long)]
        requester: u16,
        /// Comma-separated feature values, in column order.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        row: Vec<f64>,
    },
    /// Score the forest on the held-out rows via the distributed test protocol.
    Test {
        #[command(flatten)]
        args: ConfigArgs,
        /// Also report R² around the mean truth.
        #[arg(long)]
        standard_r2: bool,
    },
    /// Revoke a participant and rebuild its subtrees.
    Revoke {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long)]
        party: u16,
        /// 1: rebuild only; 2: also refresh destroyed splits.
        #[arg(long)]
        level: Option<u8>,
    },
    /// Train, then revoke the scheduled participants, scoring after each.
    Run {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long)]
        standard_r2: bool,
    },
    /// Measure prediction and revocation costs.
    Bench {
        #[arg(long, default_value_t = 128)]
        prime_bits: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long, default_value = "revfrf-bench")]
        out: PathBuf,
    },
    /// Write a synthetic dataset as CSV (label column `y`).
    Synth {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        features: usize,
        #[arg(long, default_value_t = 1)]
        informative: usize,
        #[arg(long, value_enum)]
        task: TaskArg,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn print_metrics(run: &str, m: &MetricsReport) {
    for (name, value) in m.rows() {
        println!("{run}\t{name}\t{value}");
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Keygen(args) => {
            let s = commands::keygen(&args.load()?)?;
            println!("modulus {} bits; plaintexts within ±2^{}", s.modulus_bits, s.r1_bits);
        }
        Command::Train(args) => {
            let s = commands::train(&args.load()?)?;
            println!("trained {} trees: {} nodes, {} splits", s.trees, s.nodes, s.splits);
        }
        Command::Predict { args, requester, row } => {
            let p = commands::predict(&args.load()?, requester, &row)?;
            println!("{}", p.value);
        }
        Command::Test { args, standard_r2 } => {
            let m = commands::test(&args.load()?, MetricsOptions { standard_r2 })?;
            print_metrics("test", &m);
        }
        Command::Revoke { args, party, level } => {
            let level = level
                .map(|l| RevocationLevel::from_number(l).ok_or_else(|| CliError::Validation(format!("level {l} is not 1 or 2"))))
                .transpose()?;
            let r = commands::revoke(&args.load()?, party, level)?;
            println!(
                "revoked {}: destroyed {} nodes ({} splits) in {} trees, rebuilt {} nodes, refreshed {}",
                r.party,
                r.destroyed_nodes,
                r.destroyed_splits,
                r.trees.len(),
                r.rebuilt_nodes,
                r.refreshed
            );
        }
        Command::Run { args, standard_r2 } => {
            let report = commands::experiment(&args.load()?, MetricsOptions { standard_r2 })?;
            for run in &report.runs {
                print_metrics(&run.run_id, &run.metrics);
            }
        }
        Command::Bench { prime_bits, seed, out } => {
            let s = commands::bench(&BenchOptions { prime_bits, seed, out, ..BenchOptions::default() })?;
            println!("prediction bytes vs t·d: R² = {:.4}", s.prediction_r2);
            println!("simulated destroyed fraction: {:.3}", s.destroyed_fraction);
            println!("retrain / revocation cost: {:.2}× bytes, {:.2}× ops", s.mean_byte_ratio, s.mean_op_ratio);
        }
        Command::Synth { rows, features, informative, task, noise, seed, out } => {
            let task = match task {
                TaskArg::Classification => Task::Classification,
                TaskArg::Regression => Task::Regression,
            };
            let n = commands::synth(SynthConfig { rows, features, informative, task, noise, seed }, &out)?;
            println!("wrote {n} rows to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
