use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rimsa::channel::{ArrayGeometry, ChannelRealization};
use rimsa::harness::{
    self, Baseline, ExperimentConfig, ResultRecord, Scenario, SolverConfig, Sweep, SweepKind, System,
};
use rimsa::miso::MisoConfig;
use rimsa::settled_at;

fn tiny(scenario: Scenario) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::small(scenario);
    cfg.trials = 1;
    cfg.snr_db = vec![0.0];
    cfg.baselines.clear();
    cfg
}

fn record(trial: usize, rate: f64) -> ResultRecord {
    ResultRecord {
        scenario: "miso".into(),
        sweep_name: "none".into(),
        sweep_value: 0.0,
        snr_db: -2.5,
        trial,
        algorithm: "fp_pmo".into(),
        sum_rate_bits: rate,
        outer_iterations: 7,
        wall_time_ms: 0.0,
        converged: true,
    }
}

#[test]
fn one_trial_one_snr_one_algorithm_gives_one_record() {
    for scenario in [Scenario::Miso, Scenario::Mimo] {
        let records = harness::run_experiment(&tiny(scenario)).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].algorithm, scenario.proposed_name());
        assert!(records[0].sum_rate_bits > 0.0);
    }
}

#[test]
fn records_cover_every_unit_in_order() {
    let mut cfg = tiny(Scenario::Miso);
    cfg.trials = 2;
    cfg.snr_db = vec![-5.0, 5.0];
    cfg.baselines = vec![Baseline::FdOpt, Baseline::RandomPhase];
    let records = harness::run_experiment(&cfg).unwrap();
    assert_eq!(records.len(), 12);
    let algs: Vec<_> = records[..3].iter().map(|r| r.algorithm.as_str()).collect();
    assert_eq!(algs, ["fp_pmo", "fd_opt", "random_phase"]);
    assert!(records.iter().all(|r| r.sum_rate_bits >= 0.0));
    assert_eq!((records[3].snr_db, records[3].trial), (-5.0, 1));
    assert_eq!(records[6].snr_db, 5.0);
}

#[test]
fn same_config_gives_identical_records() {
    let mut cfg = tiny(Scenario::Mimo);
    cfg.trials = 3;
    cfg.baselines = vec![Baseline::RandomPhase];
    let a = harness::run_experiment(&cfg).unwrap();
    cfg.threads = 2;
    let b = harness::run_experiment(&cfg).unwrap();
    assert_eq!(a, b);
    cfg.seed += 1;
    assert_ne!(a, harness::run_experiment(&cfg).unwrap());
}

#[test]
fn invalid_config_is_rejected_before_work() {
    let mut cfg = tiny(Scenario::Miso);
    cfg.trials = 0;
    assert!(harness::run_experiment(&cfg).is_err());
    let mut cfg = tiny(Scenario::Miso);
    cfg.snr_db.clear();
    assert!(harness::run_experiment(&cfg).is_err());
    let mut cfg = tiny(Scenario::Miso);
    cfg.sweep = Some(Sweep {
        kind: SweepKind::RfChains,
        values: vec![3.0],
    });
    assert!(harness::run_experiment(&cfg).is_err());
    let mut cfg = tiny(Scenario::Mimo);
    cfg.mimo.n_streams = cfg.mimo.n_rf_rx + 1;
    assert!(harness::run_experiment(&cfg).is_err());
}

#[test]
fn config_toml_round_trip_and_strictness() {
    let cfg = ExperimentConfig::small(Scenario::Mimo);
    let text = cfg.to_toml().unwrap();
    assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    assert!(ExperimentConfig::from_toml_str("scenario = \"miso\"\nbogus = 1\n").is_err());
    let partial = ExperimentConfig::from_toml_str("scenario = \"mimo\"\ntrials = 3\n").unwrap();
    assert_eq!(partial.trials, 3);
    assert_eq!(partial.scenario, Scenario::Mimo);
}

#[test]
fn csv_round_trip_and_line_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");

    harness::emit_results(&[], &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, format!("{}\n", harness::CSV_HEADER.join(",")));

    harness::emit_results(&[record(0, 1.25)], &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);

    let records = vec![record(0, 3.0 / 7.0), record(1, 1e-17), record(2, 12.5)];
    harness::emit_results(&records, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(harness::read_results(&path).unwrap(), records);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(harness::summary_path(&path)).unwrap()).unwrap();
    let entry = &summary[0];
    assert_eq!(entry["trials"], 3);
    let mean = (3.0 / 7.0 + 1e-17 + 12.5) / 3.0;
    assert!((entry["mean_sum_rate_bits"].as_f64().unwrap() - mean).abs() < 1e-12);
}

#[test]
fn summary_statistics() {
    let s = harness::summarize(&[record(0, 1.0), record(1, 3.0)]);
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].mean_sum_rate_bits, 2.0);
    // sample std √2 over √2 samples
    assert!((s[0].stderr_sum_rate_bits - 1.0).abs() < 1e-15);
    assert_eq!(s[0].converged_fraction, 1.0);
}

#[test]
fn unwritable_path_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    assert!(harness::emit_results(&[], &path).is_err());
    assert!(harness::emit_convergence_trace(&[1.0], &path).is_err());
}

#[test]
fn convergence_trace_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    harness::emit_convergence_trace(&[4.5], &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "iteration,objective\n0,4.5\n");

    let trace = [1.0, 2.5, 2.75, 2.8, 2.8];
    harness::emit_convergence_trace(&trace, &path).unwrap();
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    let col: Vec<f64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(col, trace);
}

#[test]
fn proposed_trace_plateaus_at_small_scale() {
    let cfg = ExperimentConfig::small(Scenario::Miso);
    for trial in 0..5 {
        let trace = harness::convergence_trace(&cfg, 5.0, trial).unwrap();
        assert!(trace.windows(2).all(|w| w[1] >= w[0] - 1e-8));
        let k = settled_at(&trace, 1e-4).expect("trace should settle");
        assert!(k <= 50, "trial {trial} settled only at {k}");
    }
}

fn single_user_channel(seed: u64, n_tx: usize) -> ChannelRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tx = ArrayGeometry::near_square(n_tx, 0.5).unwrap();
    let rx = ArrayGeometry::near_square(1, 0.5).unwrap();
    ChannelRealization::draw(&mut rng, &tx, &rx, 1, 4).unwrap()
}

#[test]
fn fully_digital_single_user_matches_closed_form() {
    let (power, noise) = (2.0, 0.5);
    let cfg = MisoConfig::new(4, 2, 1, 1, power, noise).unwrap();
    let system = System::Miso(cfg);
    for seed in 0..5 {
        let ch = single_user_channel(seed, 8);
        let out = harness::fd_baseline(
            &ch,
            &ch,
            &system,
            &SolverConfig::default(),
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
        .unwrap();
        let expect = (1.0 + power * ch.user(0).norm_squared() / noise).log2();
        assert!(
            (out.sum_rate_bits - expect).abs() < 1e-6 * expect,
            "{} vs {expect}",
            out.sum_rate_bits
        );
    }
}

#[test]
fn random_phase_baseline_examples() {
    let ch = single_user_channel(9, 8);
    let solver = SolverConfig::default();
    let cfg = MisoConfig::new(4, 2, 1, 1, 1.0, 1.0).unwrap();
    let zero = System::Miso(MisoConfig { power: 0.0, ..cfg.clone() });
    let out = harness::random_phase_baseline(&ch, &ch, &zero, &solver, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(out.sum_rate_bits, 0.0);

    let system = System::Miso(cfg);
    let run = |seed| {
        harness::random_phase_baseline(&ch, &ch, &system, &solver, &mut ChaCha8Rng::seed_from_u64(seed))
            .unwrap()
            .sum_rate_bits
    };
    assert_eq!(run(3), run(3));
    assert_ne!(run(3), run(4));
}

fn paired(scenario: Scenario, trials: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut cfg = ExperimentConfig::small(scenario);
    cfg.trials = trials;
    cfg.snr_db = vec![5.0];
    cfg.seed = 31;
    let records = harness::run_experiment(&cfg).unwrap();
    let pick = |alg: &str| -> Vec<f64> {
        records
            .iter()
            .filter(|r| r.algorithm == alg)
            .map(|r| r.sum_rate_bits)
            .collect()
    };
    (pick(scenario.proposed_name()), pick("fd_opt"), pick("random_phase"))
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

#[test]
fn baselines_bracket_the_proposed_designs() {
    for scenario in [Scenario::Miso, Scenario::Mimo] {
        let (prop, fd, rp) = paired(scenario, 50);
        let wins = prop.iter().zip(&fd).filter(|(p, f)| f >= p).count();
        assert!(wins >= 45, "{scenario}: fd_opt won only {wins}/50");
        assert!(mean(&fd) >= mean(&prop), "{scenario}");
        assert!(mean(&prop) >= mean(&rp), "{scenario}");
    }
}

#[test]
fn mean_rate_grows_with_snr() {
    for scenario in [Scenario::Miso, Scenario::Mimo] {
        let mut cfg = ExperimentConfig::small(scenario);
        cfg.trials = 20;
        cfg.snr_db = vec![-10.0, -5.0, 0.0, 5.0, 10.0];
        cfg.baselines = vec![Baseline::FdOpt, Baseline::RandomPhase];
        let summary = harness::summarize(&harness::run_experiment(&cfg).unwrap());
        for alg in [scenario.proposed_name(), "fd_opt", "random_phase"] {
            let curve: Vec<f64> = summary
                .iter()
                .filter(|s| s.algorithm == alg)
                .map(|s| s.mean_sum_rate_bits)
                .collect();
            assert_eq!(curve.len(), 5);
            assert!(
                curve.windows(2).all(|w| w[1] >= 0.99 * w[0]),
                "{scenario} {alg}: {curve:?}"
            );
        }
    }
}

#[test]
fn csi_error_sweep_shares_the_channel_across_levels() {
    let mut cfg = tiny(Scenario::Miso);
    cfg.trials = 2;
    cfg.sweep = Some(Sweep {
        kind: SweepKind::CsiError,
        values: vec![0.0, 0.0, 0.3],
    });
    let records = harness::run_experiment(&cfg).unwrap();
    assert_eq!(records.len(), 6);
    assert_eq!(records[0].sum_rate_bits, records[2].sum_rate_bits);
    assert_eq!(records[1].sum_rate_bits, records[3].sum_rate_bits);
    assert_ne!(records[0].sum_rate_bits, records[4].sum_rate_bits);
}

#[test]
fn rf_chain_sweep_keeps_the_aperture() {
    let mut cfg = tiny(Scenario::Miso);
    cfg.sweep = Some(Sweep {
        kind: SweepKind::RfChains,
        values: vec![2.0, 4.0, 8.0, 16.0],
    });
    for &n_rf in &[2.0, 4.0, 8.0, 16.0] {
        let point = cfg.point(n_rf, 1.0).unwrap();
        assert_eq!(point.system.n_tx(), 16);
    }
    assert_eq!(harness::run_experiment(&cfg).unwrap().len(), 4);
}
