//! Monte Carlo experiment runner.
//!
//! Every work unit is one `(sweep point, SNR, trial)` triple. It draws one
//! channel and runs all requested algorithms on it, so comparisons between
//! algorithms are paired. Units run on a rayon pool; results come back in
//! unit order, which makes the output independent of scheduling.

mod config;
mod output;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    Baseline, ExperimentConfig, MimoDims, MisoDims, Scenario, SolverConfig, Sweep, SweepKind, System, SystemPoint,
};
pub use output::{
    emit_convergence_trace, emit_results, read_results, summarize, summary_path, SummaryEntry, CSV_HEADER,
};

use crate::channel::{perturb_csi, ArrayGeometry, ChannelRealization, CsiErrorModel};
use crate::manifold::PhaseMatrix;
use crate::mimo::{self, MimoConfig, MimoState, WmmsePmoOptions};
use crate::miso::{self, AnalogMode, FpPmoOptions, MisoConfig, MisoState};
use crate::{Error, Result};

/// Random streams carved out of each trial seed.
pub mod streams {
    pub const CHANNEL: u64 = 0;
    pub const PROPOSED: u64 = 1;
    pub const RANDOM_PHASE: u64 = 2;
    pub const CSI_ERROR: u64 = 3;
    pub const FD_OPT: u64 = 4;
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub scenario: String,
    pub sweep_name: String,
    pub sweep_value: f64,
    pub snr_db: f64,
    pub trial: usize,
    pub algorithm: String,
    pub sum_rate_bits: f64,
    pub outer_iterations: usize,
    pub wall_time_ms: f64,
    pub converged: bool,
}

/// Result of one algorithm on one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Sum rate on the true channel (bits/s/Hz).
    pub sum_rate_bits: f64,
    pub outer_iterations: usize,
    pub converged: bool,
    /// Sum rate per outer iteration on the design channel.
    pub trace: Vec<f64>,
}

/// Trial seed: the four indices laid out as a 256-bit ChaCha key.
pub fn trial_seed(master: u64, sweep_index: usize, snr_index: usize, trial: usize) -> [u8; 32] {
    let mut seed = [0u8; 32];
    for (k, word) in [master, sweep_index as u64, snr_index as u64, trial as u64].into_iter().enumerate() {
        seed[8 * k..8 * k + 8].copy_from_slice(&word.to_le_bytes());
    }
    seed
}

/// Independent generator for one purpose within a trial.
pub fn trial_rng(seed: [u8; 32], stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(stream);
    rng
}

/// Draws the true channel of a system point.
pub fn draw_channel(point: &SystemPoint, spacing: f64, rng: &mut ChaCha8Rng) -> Result<ChannelRealization> {
    let tx = ArrayGeometry::near_square(point.system.n_tx(), spacing)?;
    let rx = ArrayGeometry::near_square(point.system.n_rx(), spacing)?;
    ChannelRealization::draw(rng, &tx, &rx, point.system.n_users(), point.n_paths)
}

fn miso_options(solver: &SolverConfig, analog: AnalogMode) -> FpPmoOptions {
    FpPmoOptions {
        outer_iters: solver.outer_iters,
        rcg: solver.rcg,
        analog,
        inner_rounds: solver.inner_rounds,
        inner_tol: solver.inner_tol,
        outer_tol: solver.outer_tol,
    }
}

fn mimo_options(solver: &SolverConfig, analog: AnalogMode) -> WmmsePmoOptions {
    WmmsePmoOptions {
        outer_iters: solver.outer_iters,
        rcg: solver.rcg,
        analog,
        tol: solver.mse_tol,
    }
}

fn run_miso(
    design: &ChannelRealization,
    truth: &ChannelRealization,
    cfg: &MisoConfig,
    init: MisoState,
    opts: &FpPmoOptions,
) -> Result<Outcome> {
    let run = miso::fp_pmo_from(design, cfg, init, opts)?;
    Ok(Outcome {
        sum_rate_bits: miso::sum_rate(&run.state, truth, cfg)?,
        outer_iterations: run.outer_iterations,
        converged: run.converged,
        trace: run.trace,
    })
}

fn run_mimo(
    design: &ChannelRealization,
    truth: &ChannelRealization,
    cfg: &MimoConfig,
    init: MimoState,
    opts: &WmmsePmoOptions,
) -> Result<Outcome> {
    let run = mimo::wmmse_pmo_from(design, cfg, init, opts)?;
    Ok(Outcome {
        sum_rate_bits: mimo::sum_rate(&run.state, truth, cfg)?,
        outer_iterations: run.outer_iterations,
        converged: run.converged,
        trace: run.rate_trace,
    })
}

/// FP-PMO or WMMSE-PMO designed on `design` and evaluated on `truth`.
pub fn run_proposed(
    design: &ChannelRealization,
    truth: &ChannelRealization,
    system: &System,
    solver: &SolverConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Outcome> {
    match system {
        System::Miso(cfg) => {
            let init = MisoState::initial(cfg, rng);
            run_miso(design, truth, cfg, init, &miso_options(solver, AnalogMode::Joint))
        }
        System::Mimo(cfg) => {
            let init = MimoState::initial(cfg, rng);
            run_mimo(design, truth, cfg, init, &mimo_options(solver, AnalogMode::Joint))
        }
    }
}

/// Fully digital reference: one element per BS RF chain with its phases
/// fixed to zero. MISO UEs keep their single RIMSA and optimize it on the
/// manifold; MIMO UEs get one RF chain per element.
pub fn fd_baseline(
    design: &ChannelRealization,
    truth: &ChannelRealization,
    system: &System,
    solver: &SolverConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Outcome> {
    match system {
        System::Miso(cfg) => {
            let fd = MisoConfig {
                n_rf: cfg.n_tx(),
                n_per_rimsa: 1,
                ..cfg.clone()
            };
            let v = PhaseMatrix::zero_phase(fd.v_pattern());
            let f = PhaseMatrix::random(fd.f_pattern(), rng);
            let init = MisoState::new(&fd, v, f, miso::initial_precoder(&fd))?;
            run_miso(design, truth, &fd, init, &miso_options(solver, AnalogMode::ReceiveOnly))
        }
        System::Mimo(cfg) => {
            let fd = MimoConfig {
                n_rf_tx: cfg.n_tx(),
                n_per_rimsa_tx: 1,
                n_rf_rx: cfg.n_rx(),
                n_per_rimsa_rx: 1,
                ..cfg.clone()
            };
            let v = PhaseMatrix::zero_phase(fd.v_pattern());
            let w_rf = PhaseMatrix::zero_phase(fd.w_rf_pattern());
            let init = MimoState::new(&fd, v, w_rf, mimo::initial_digital_precoder(&fd))?;
            run_mimo(design, truth, &fd, init, &mimo_options(solver, AnalogMode::Fixed))
        }
    }
}

/// Lower reference: uniformly random phases, digital stage optimized.
pub fn random_phase_baseline(
    design: &ChannelRealization,
    truth: &ChannelRealization,
    system: &System,
    solver: &SolverConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Outcome> {
    if system.power() == 0.0 {
        return Ok(Outcome {
            sum_rate_bits: 0.0,
            outer_iterations: 0,
            converged: true,
            trace: vec![0.0],
        });
    }
    match system {
        System::Miso(cfg) => {
            let init = MisoState::initial(cfg, rng);
            run_miso(design, truth, cfg, init, &miso_options(solver, AnalogMode::Fixed))
        }
        System::Mimo(cfg) => {
            let init = MimoState::initial(cfg, rng);
            run_mimo(design, truth, cfg, init, &mimo_options(solver, AnalogMode::Fixed))
        }
    }
}

struct Unit {
    sweep_index: usize,
    sweep_value: f64,
    snr_index: usize,
    snr_db: f64,
    trial: usize,
}

/// Algorithm names in output order.
pub fn algorithm_names(cfg: &ExperimentConfig) -> Vec<&'static str> {
    let mut names = vec![cfg.scenario.proposed_name()];
    names.extend(cfg.baselines.iter().map(|b| b.as_str()));
    names
}

fn run_unit(cfg: &ExperimentConfig, sweep_name: &str, unit: &Unit) -> Result<Vec<ResultRecord>> {
    let point = cfg.point(unit.sweep_value, cfg.power(unit.snr_db))?;
    // a CSI-error sweep reuses one channel (and error direction) per trial
    // across all error levels
    let channel_index = if cfg.sweep.as_ref().map(|s| s.kind) == Some(SweepKind::CsiError) {
        0
    } else {
        unit.sweep_index
    };
    let seed = trial_seed(cfg.seed, channel_index, unit.snr_index, unit.trial);
    let truth = draw_channel(&point, cfg.spacing, &mut trial_rng(seed, streams::CHANNEL))?;
    let design = perturb_csi(
        &truth,
        &CsiErrorModel::new(point.sigma_e)?,
        &mut trial_rng(seed, streams::CSI_ERROR),
    );

    let mut records = Vec::new();
    for name in algorithm_names(cfg) {
        let start = Instant::now();
        let result = match name {
            "fd_opt" => fd_baseline(&design, &truth, &point.system, &cfg.solver, &mut trial_rng(seed, streams::FD_OPT)),
            "random_phase" => random_phase_baseline(
                &design,
                &truth,
                &point.system,
                &cfg.solver,
                &mut trial_rng(seed, streams::RANDOM_PHASE),
            ),
            _ => run_proposed(&design, &truth, &point.system, &cfg.solver, &mut trial_rng(seed, streams::PROPOSED)),
        };
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        let (rate, iters, converged) = match result {
            Ok(o) => (o.sum_rate_bits, o.outer_iterations, o.converged),
            Err(e) => {
                eprintln!(
                    "warning: {name} failed at {sweep_name}={} snr={} trial={}: {e}",
                    unit.sweep_value, unit.snr_db, unit.trial
                );
                (0.0, 0, false)
            }
        };
        records.push(ResultRecord {
            scenario: cfg.scenario.as_str().to_string(),
            sweep_name: sweep_name.to_string(),
            sweep_value: unit.sweep_value,
            snr_db: unit.snr_db,
            trial: unit.trial,
            algorithm: name.to_string(),
            sum_rate_bits: rate,
            outer_iterations: iters,
            wall_time_ms: if cfg.record_timing { elapsed } else { 0.0 },
            converged,
        });
    }
    Ok(records)
}

/// Runs every `(sweep point, SNR, trial)` unit and returns the records in
/// unit order, algorithms in [`algorithm_names`] order within a unit.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let (sweep_name, values) = cfg.sweep_points();
    let mut units = Vec::new();
    for (sweep_index, &sweep_value) in values.iter().enumerate() {
        for (snr_index, &snr_db) in cfg.snr_db.iter().enumerate() {
            for trial in 0..cfg.trials {
                units.push(Unit {
                    sweep_index,
                    sweep_value,
                    snr_index,
                    snr_db,
                    trial,
                });
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let per_unit: Vec<Vec<ResultRecord>> = pool.install(|| {
        units
            .par_iter()
            .map(|u| run_unit(cfg, sweep_name, u))
            .collect::<Result<_>>()
    })?;
    Ok(per_unit.into_iter().flatten().collect())
}

/// Sum-rate trace of the proposed algorithm on the channel of one trial.
pub fn convergence_trace(cfg: &ExperimentConfig, snr_db: f64, trial: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    let (_, values) = cfg.sweep_points();
    let point = cfg.point(values[0], cfg.power(snr_db))?;
    let seed = trial_seed(cfg.seed, 0, 0, trial);
    let truth = draw_channel(&point, cfg.spacing, &mut trial_rng(seed, streams::CHANNEL))?;
    let out = run_proposed(&truth, &truth, &point.system, &cfg.solver, &mut trial_rng(seed, streams::PROPOSED))?;
    Ok(out.trace)
}
