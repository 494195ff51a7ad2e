//! End-to-end acceptance suite.
//!
//! Runs as a plain binary so every criterion prints its verdict even when
//! output capture would hide it. Pass criterion numbers as arguments to run
//! a subset, e.g. `cargo test --release --test acceptance -- 2 3`.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rimsa::channel::{standard_complex_normal, ArrayGeometry, ChannelRealization};
use rimsa::harness::{
    self, Baseline, ExperimentConfig, MimoDims, MisoDims, ResultRecord, Scenario, Sweep, SweepKind,
};
use rimsa::manifold::{PhaseMatrix, RcgParams};
use rimsa::mimo::{self, MimoConfig, MimoState};
use rimsa::miso::{self, MisoConfig, MisoState};
use rimsa::{settled_at, CMatrix, C64};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| standard_complex_normal(rng))
}

fn draw(rng: &mut ChaCha8Rng, n_tx: usize, n_rx: usize, users: usize, paths: usize) -> ChannelRealization {
    let tx = ArrayGeometry::near_square(n_tx, 0.5).unwrap();
    let rx = ArrayGeometry::near_square(n_rx, 0.5).unwrap();
    ChannelRealization::draw(rng, &tx, &rx, users, paths).unwrap()
}

fn fd_gradient(x: &PhaseMatrix, f: impl Fn(&PhaseMatrix) -> f64) -> CMatrix {
    let h = 1e-6;
    let mut g = CMatrix::zeros(x.shape().0, x.shape().1);
    for (r, c) in x.pattern().support().collect::<Vec<_>>() {
        let mut parts = [0.0; 2];
        for (k, dir) in [C64::new(h, 0.0), C64::new(0.0, h)].into_iter().enumerate() {
            let mut plus = x.values().clone();
            plus[(r, c)] += dir;
            let mut minus = x.values().clone();
            minus[(r, c)] -= dir;
            let fp = f(&PhaseMatrix::new_unchecked(x.shared_pattern(), plus));
            let fm = f(&PhaseMatrix::new_unchecked(x.shared_pattern(), minus));
            parts[k] = (fp - fm) / (2.0 * h);
        }
        g[(r, c)] = C64::new(parts[0], parts[1]);
    }
    g
}

fn rel_err(analytic: &CMatrix, numeric: &CMatrix) -> f64 {
    (analytic - numeric).norm() / numeric.norm().max(1e-300)
}

/// Random feasible MISO state with its precoder on the power sphere.
fn random_miso(rng: &mut ChaCha8Rng, cfg: &MisoConfig) -> MisoState {
    let mut state = MisoState::initial(cfg, rng);
    state.w = random_matrix(rng, cfg.n_rf, cfg.n_users);
    let scale = (cfg.power / state.transmit_power()).sqrt();
    state.w *= C64::new(scale, 0.0);
    state
}

/// Random MIMO state with MMSE combiners and `Λ = E⁻¹`.
fn random_mimo(rng: &mut ChaCha8Rng, cfg: &MimoConfig, ch: &ChannelRealization) -> MimoState {
    let mut state = MimoState::initial(cfg, rng);
    state.w_d = random_matrix(rng, cfg.n_rf_tx, cfg.n_users * cfg.n_streams);
    let scale = (cfg.power / state.transmit_power()).sqrt();
    state.w_d *= C64::new(scale, 0.0);
    for i in 0..cfg.n_users {
        state.u[i] = mimo::update_combiner(i, &state, ch, cfg).unwrap();
    }
    for i in 0..cfg.n_users {
        state.weights[i] = mimo::update_weights(&mimo::mse_matrix(i, &state, ch, cfg).unwrap()).0;
    }
    state
}

fn gradient_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = [0.0_f64; 4];
    for _ in 0..20 {
        let cfg = MisoConfig::new(
            rng.gen_range(1..=2),
            rng.gen_range(1..=4),
            rng.gen_range(1..=3),
            rng.gen_range(1..=3),
            rng.gen_range(0.5..20.0),
            rng.gen_range(0.2..2.0),
        )
        .unwrap();
        let ch = draw(&mut rng, cfg.n_tx(), cfg.n_rx, cfg.n_users, 3);
        let state = random_miso(&mut rng, &cfg);
        let gf = miso::euclid_grad_f(&state, &ch, &cfg).unwrap();
        let nf = fd_gradient(&state.f, |f| {
            let s = MisoState { f: f.clone(), ..state.clone() };
            miso::g2(&s, &ch, &cfg).unwrap()
        });
        let gv = miso::euclid_grad_v(&state, &ch, &cfg).unwrap();
        let nv = fd_gradient(&state.v, |v| {
            let s = MisoState { v: v.clone(), ..state.clone() };
            miso::g2(&s, &ch, &cfg).unwrap()
        });
        worst[0] = worst[0].max(rel_err(&gf, &nf));
        worst[1] = worst[1].max(rel_err(&gv, &nv));
    }
    for _ in 0..20 {
        let n_rf_rx = rng.gen_range(1..=2);
        let cfg = MimoConfig::new(
            rng.gen_range(1..=3),
            rng.gen_range(1..=3),
            rng.gen_range(1..=3),
            n_rf_rx,
            rng.gen_range(1..=3),
            rng.gen_range(1..=n_rf_rx),
            rng.gen_range(0.5..20.0),
            rng.gen_range(0.2..2.0),
        )
        .unwrap();
        let ch = draw(&mut rng, cfg.n_tx(), cfg.n_rx(), cfg.n_users, 3);
        let state = random_mimo(&mut rng, &cfg, &ch);
        let gv = mimo::euclid_grad_v_mimo(&state, &ch, &cfg).unwrap();
        let nv = fd_gradient(&state.v, |v| {
            let s = MimoState { v: v.clone(), ..state.clone() };
            mimo::f1(&s, &ch, &cfg).unwrap()
        });
        let gw = mimo::euclid_grad_wrf(&state, &ch, &cfg).unwrap();
        let nw = fd_gradient(&state.w_rf, |w| {
            let s = MimoState { w_rf: w.clone(), ..state.clone() };
            mimo::f1(&s, &ch, &cfg).unwrap()
        });
        worst[2] = worst[2].max(rel_err(&gv, &nv));
        worst[3] = worst[3].max(rel_err(&gw, &nw));
    }
    let max = worst.iter().cloned().fold(0.0, f64::max);
    verdict(
        max <= 1e-5,
        format!(
            "worst relative error F {:.1e}, V {:.1e}, V_mimo {:.1e}, W_RF {:.1e} (limit 1e-5)",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn reformulation_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0_f64;
    for k in 0..100 {
        let cfg = if k % 2 == 0 {
            MisoConfig::new(8, 8, 4, 4, 10f64.powf(rng.gen_range(-1.0..1.0)), 1.0).unwrap()
        } else {
            MisoConfig::new(
                rng.gen_range(1..=4),
                rng.gen_range(1..=4),
                rng.gen_range(1..=4),
                rng.gen_range(1..=4),
                rng.gen_range(0.1..50.0),
                rng.gen_range(0.1..2.0),
            )
            .unwrap()
        };
        let ch = draw(&mut rng, cfg.n_tx(), cfg.n_rx, cfg.n_users, 4);
        let state = random_miso(&mut rng, &cfg);
        let r = miso::sum_rate(&state, &ch, &cfg).unwrap();
        let g = miso::g2(&state, &ch, &cfg).unwrap();
        worst = worst.max((r + g).abs());
    }
    verdict(worst <= 1e-9, format!("max |sum_rate + g2| = {worst:.1e} (limit 1e-9)"))
}

fn rate_mse_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let cfg = if k % 2 == 0 {
            MimoConfig::new(16, 2, 4, 4, 4, 4, 10f64.powf(rng.gen_range(-2.0..0.5)), 1.0).unwrap()
        } else {
            let n_rf_rx = rng.gen_range(1..=3);
            MimoConfig::new(
                rng.gen_range(1..=4),
                rng.gen_range(1..=3),
                rng.gen_range(1..=3),
                n_rf_rx,
                rng.gen_range(1..=3),
                n_rf_rx,
                rng.gen_range(0.1..20.0),
                rng.gen_range(0.2..2.0),
            )
            .unwrap()
        };
        let ch = draw(&mut rng, cfg.n_tx(), cfg.n_rx(), cfg.n_users, 5);
        let state = random_mimo(&mut rng, &cfg, &ch);
        worst = worst.max(mimo::verify_rate_mse_equivalence(&state, &ch, &cfg).unwrap());
    }
    verdict(worst <= 1e-8, format!("max |r_i - log2 det E_i^-1| = {worst:.1e} (limit 1e-8)"))
}

fn monotonicity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst_rate_drop = 0.0_f64;
    let mut worst_mse_rise = 0.0_f64;
    for _ in 0..20 {
        let snr = rng.gen_range(-10.0..10.0_f64);
        let cfg = MisoConfig::new(8, 8, 4, 4, 10f64.powf(snr / 10.0), 1.0).unwrap();
        let ch = draw(&mut rng, 64, 4, 4, 4);
        let run = miso::fp_pmo(&ch, &cfg, 100, &RcgParams::default(), &mut rng).unwrap();
        for w in run.trace.windows(2) {
            worst_rate_drop = worst_rate_drop.max(w[0] - w[1]);
        }
    }
    for _ in 0..20 {
        let snr = rng.gen_range(-20.0..5.0_f64);
        let cfg = MimoConfig::new(8, 2, 3, 2, 2, 2, 10f64.powf(snr / 10.0), 1.0).unwrap();
        let ch = draw(&mut rng, 16, 4, 3, 5);
        let run = mimo::wmmse_pmo(&ch, &cfg, 100, &RcgParams::default(), &mut rng).unwrap();
        for w in run.mse_trace.windows(2) {
            worst_mse_rise = worst_mse_rise.max(w[1] - w[0]);
        }
    }
    verdict(
        worst_rate_drop <= 1e-8 && worst_mse_rise <= 1e-8,
        format!(
            "largest fp_pmo rate drop {worst_rate_drop:.1e}, largest wmmse_pmo MSE rise {worst_mse_rise:.1e} (slack 1e-8)"
        ),
    )
}

fn convergence() -> Verdict {
    // fp_pmo at full size: converged within 60 outer iterations
    let mut cfg = ExperimentConfig::paper(Scenario::Miso);
    cfg.seed = 105;
    cfg.trials = 50;
    cfg.snr_db = vec![-5.0, 0.0, 5.0, 10.0];
    cfg.baselines.clear();
    cfg.solver.outer_iters = 60;
    let records = harness::run_experiment(&cfg).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for snr in &cfg.snr_db {
        let rows: Vec<_> = records.iter().filter(|r| r.snr_db == *snr).collect();
        let frac = rows.iter().filter(|r| r.converged).count() as f64 / rows.len() as f64;
        pass &= frac >= 0.95;
        parts.push(format!("{snr} dB {:.0}%", 100.0 * frac));
    }
    let mut detail = format!("fp_pmo settled <= 60 its: {}", parts.join(", "));

    // wmmse_pmo at −15 dB: sum rate settled within 30 outer iterations
    parts.clear();
    for (n_per_tx, n_per_rx) in [(2, 4), (4, 6)] {
        let mut cfg = ExperimentConfig::paper(Scenario::Mimo);
        cfg.seed = 205;
        cfg.mimo = MimoDims {
            n_per_rimsa_tx: n_per_tx,
            n_per_rimsa_rx: n_per_rx,
            ..MimoDims::default()
        };
        cfg.solver.outer_iters = 31;
        let trials = 50;
        let settled = (0..trials)
            .filter(|&t| {
                let trace = harness::convergence_trace(&cfg, -15.0, t).unwrap();
                settled_at(&trace, 1e-4).is_some_and(|k| k <= 30)
            })
            .count();
        let frac = settled as f64 / trials as f64;
        pass &= frac >= 0.95;
        parts.push(format!(
            "({},{}) {:.0}%",
            16 * n_per_tx,
            4 * n_per_rx,
            100.0 * frac
        ));
    }
    detail += &format!("; wmmse_pmo settled <= 30 its: {} (need >= 95%)", parts.join(", "));
    verdict(pass, detail)
}

fn means(records: &[ResultRecord]) -> BTreeMap<(String, String), f64> {
    harness::summarize(records)
        .into_iter()
        .map(|s| ((format!("{}", s.sweep_value), s.algorithm), s.mean_sum_rate_bits))
        .collect()
}

fn ordering() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for scenario in [Scenario::Miso, Scenario::Mimo] {
        let mut cfg = match scenario {
            Scenario::Miso => ExperimentConfig::paper(scenario),
            Scenario::Mimo => ExperimentConfig::small(scenario),
        };
        cfg.seed = 106;
        cfg.trials = 50;
        cfg.snr_db = vec![5.0];
        let m = means(&harness::run_experiment(&cfg).unwrap());
        let get = |alg: &str| m[&("0".to_string(), alg.to_string())];
        let (fd, prop, rp) = (get("fd_opt"), get(scenario.proposed_name()), get("random_phase"));
        pass &= fd >= prop && prop >= rp;
        parts.push(format!(
            "{scenario}: fd_opt {fd:.3} >= {} {prop:.3} >= random_phase {rp:.3}",
            scenario.proposed_name()
        ));
    }
    verdict(pass, parts.join("; "))
}

fn rf_chain_limit() -> Verdict {
    let mut cfg = ExperimentConfig::small(Scenario::Miso);
    cfg.seed = 107;
    cfg.trials = 100;
    cfg.snr_db = vec![5.0];
    cfg.baselines = vec![Baseline::FdOpt];
    let n_tx = cfg.miso.n_rf * cfg.miso.n_per_rimsa;
    cfg.sweep = Some(Sweep {
        kind: SweepKind::RfChains,
        values: vec![n_tx as f64],
    });
    let m = means(&harness::run_experiment(&cfg).unwrap());
    let key = |alg: &str| (format!("{n_tx}"), alg.to_string());
    let (fd, prop) = (m[&key("fd_opt")], m[&key("fp_pmo")]);
    let gap = (fd - prop).abs() / fd;
    verdict(
        gap <= 0.03,
        format!(
            "N_RF = N_t = {n_tx}: fp_pmo {prop:.3}, fd_opt {fd:.3}, gap {:.2}% (limit 3%)",
            100.0 * gap
        ),
    )
}

fn imperfect_csi() -> Verdict {
    let levels = [0.0, 0.02, 0.04, 0.06, 0.08, 0.1];
    let mut cfg = ExperimentConfig::paper(Scenario::Miso);
    cfg.seed = 108;
    cfg.trials = 200;
    cfg.snr_db = vec![5.0];
    cfg.baselines.clear();
    cfg.sweep = Some(Sweep {
        kind: SweepKind::CsiError,
        values: levels.to_vec(),
    });
    let m = means(&harness::run_experiment(&cfg).unwrap());
    let rate = |s: f64| m[&(format!("{s}"), "fp_pmo".to_string())];
    let perfect = rate(0.0);
    let losses: Vec<f64> = levels.iter().map(|&s| 1.0 - rate(s) / perfect).collect();
    let monotone = losses.windows(2).all(|w| w[1] >= w[0]);
    let pass = monotone && losses[2] <= 0.03 && losses[5] <= 0.08;
    let shown: Vec<String> = levels
        .iter()
        .zip(&losses)
        .map(|(s, l)| format!("{s}: {:.2}%", 100.0 * l))
        .collect();
    verdict(
        pass,
        format!(
            "loss vs perfect CSI ({perfect:.3} bits) {}; monotone {monotone} (limits 3% at 0.04, 8% at 0.1)",
            shown.join(", ")
        ),
    )
}

fn users_sweep() -> Verdict {
    let mut cfg = ExperimentConfig::paper(Scenario::Miso);
    cfg.seed = 109;
    cfg.trials = 20;
    cfg.snr_db = vec![5.0];
    cfg.baselines.clear();
    cfg.sweep = Some(Sweep {
        kind: SweepKind::Users,
        values: vec![2.0, 4.0, 6.0, 8.0],
    });
    let m = means(&harness::run_experiment(&cfg).unwrap());
    let per_ue: Vec<f64> = [2, 4, 6, 8]
        .iter()
        .map(|&u| m[&(format!("{u}"), "fp_pmo".to_string())] / u as f64)
        .collect();
    let pass = per_ue.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = per_ue
        .iter()
        .zip([2, 4, 6, 8])
        .map(|(r, u)| format!("M={u}: {r:.3}"))
        .collect();
    verdict(pass, format!("mean rate per UE {}", shown.join(", ")))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut identical = true;
    for scenario in [Scenario::Miso, Scenario::Mimo] {
        let mut cfg = ExperimentConfig::small(scenario);
        cfg.seed = 110;
        cfg.trials = 4;
        cfg.snr_db = vec![-5.0, 5.0];
        cfg.miso = MisoDims {
            n_users: 3,
            ..cfg.miso.clone()
        };
        let mut bytes = Vec::new();
        for (k, threads) in [1, 3].into_iter().enumerate() {
            cfg.threads = threads;
            cfg.output = dir.path().join(format!("{scenario}_{k}.csv"));
            let records = harness::run_experiment(&cfg).unwrap();
            harness::emit_results(&records, &cfg.output).unwrap();
            bytes.push(std::fs::read(&cfg.output).unwrap());
        }
        identical &= bytes[0] == bytes[1] && !bytes[0].is_empty();
    }
    verdict(identical, "repeated runs (1 and 3 worker threads) write byte-identical CSV")
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn() -> Verdict); 10] = [
        (1, "gradient suite", gradient_suite),
        (2, "reformulation identity", reformulation_identity),
        (3, "rate/MSE equivalence", rate_mse_equivalence),
        (4, "monotonicity", monotonicity),
        (5, "convergence", convergence),
        (6, "ordering", ordering),
        (7, "RF-chain limit", rf_chain_limit),
        (8, "imperfect CSI", imperfect_csi),
        (9, "users sweep", users_sweep),
        (10, "determinism", determinism),
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failures = 0;
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {status} {name} [{:.1}s]: {}",
            start.elapsed().as_secs_f64(),
            v.detail
        );
        failures += usize::from(!v.pass);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
