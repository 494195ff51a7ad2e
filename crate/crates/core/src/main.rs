use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rimsa::harness::{self, ExperimentConfig, Scenario};

#[derive(Parser)]
#[command(name = "rimsa", version, about = "Metasurface-antenna transceiver optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write CSV + JSON summary.
    Run(RunArgs),
    /// Write the convergence trace of the proposed algorithm on one channel.
    Trace {
        #[command(flatten)]
        common: RunArgs,
        /// SNR of the traced run in dB (defaults to the first grid point).
        #[arg(long, allow_negative_numbers = true)]
        at_snr: Option<f64>,
        /// Trial index whose channel is used.
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Print a configuration file with every field set.
    Config {
        #[arg(long, default_value = "miso")]
        scenario: Scenario,
        #[arg(long)]
        small: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<Scenario>,
    /// Comma-separated SNR grid in dB, e.g. `-10,-5,0`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Quarter-scale arrays and 10 trials (ignored with --config).
    #[arg(long)]
    small: bool,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Record wall-clock time per run (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
}

impl RunArgs {
    fn resolve(&self) -> rimsa::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => {
                let scenario = self.scenario.unwrap_or(Scenario::Miso);
                if self.small {
                    ExperimentConfig::small(scenario)
                } else {
                    ExperimentConfig::paper(scenario)
                }
            }
        };
        if let (Some(s), Some(_)) = (self.scenario, &self.config) {
            cfg.scenario = s;
        }
        if let Some(snr) = &self.snr {
            cfg.snr_db = snr.clone();
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output = o.clone();
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
        cfg.record_timing |= self.timing;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> rimsa::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let records = harness::run_experiment(&cfg)?;
            harness::emit_results(&records, &cfg.output)?;
            for s in harness::summarize(&records) {
                println!(
                    "{:<6} {}={:<6} snr={:>6} {:<13} {:>8.4} ± {:.4} bits/s/Hz  iters={:.1}",
                    s.scenario,
                    s.sweep_name,
                    s.sweep_value,
                    s.snr_db,
                    s.algorithm,
                    s.mean_sum_rate_bits,
                    s.stderr_sum_rate_bits,
                    s.mean_outer_iterations
                );
            }
            eprintln!(
                "wrote {} and {}",
                cfg.output.display(),
                harness::summary_path(&cfg.output).display()
            );
        }
        Command::Trace { common, at_snr, trial } => {
            let cfg = common.resolve()?;
            let snr = at_snr.unwrap_or(cfg.snr_db[0]);
            let trace = harness::convergence_trace(&cfg, snr, trial)?;
            harness::emit_convergence_trace(&trace, &cfg.output)?;
            eprintln!("wrote {} ({} iterations)", cfg.output.display(), trace.len() - 1);
        }
        Command::Config { scenario, small } => {
            let cfg = if small {
                ExperimentConfig::small(scenario)
            } else {
                ExperimentConfig::paper(scenario)
            };
            print!("{}", cfg.to_toml()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
