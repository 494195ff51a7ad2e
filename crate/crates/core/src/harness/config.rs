//! Experiment configuration, loaded from TOML and overridable from the CLI.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::manifold::RcgParams;
use crate::mimo::MimoConfig;
use crate::miso::MisoConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Miso,
    Mimo,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Miso => "miso",
            Scenario::Mimo => "mimo",
        }
    }

    /// Name of the proposed algorithm for this scenario.
    pub fn proposed_name(self) -> &'static str {
        match self {
            Scenario::Miso => "fp_pmo",
            Scenario::Mimo => "wmmse_pmo",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "miso" => Ok(Scenario::Miso),
            "mimo" => Ok(Scenario::Mimo),
            other => Err(Error::Config(format!("unknown scenario `{other}` (expected miso or mimo)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    FdOpt,
    RandomPhase,
}

impl Baseline {
    pub fn as_str(self) -> &'static str {
        match self {
            Baseline::FdOpt => "fd_opt",
            Baseline::RandomPhase => "random_phase",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// BS RF chains at a fixed BS aperture (`N = N_t / N_RF`).
    RfChains,
    Users,
    /// Standard deviation of the CSI error.
    CsiError,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::RfChains => "rf_chains",
            SweepKind::Users => "users",
            SweepKind::CsiError => "csi_error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub kind: SweepKind,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MisoDims {
    pub n_rf: usize,
    pub n_per_rimsa: usize,
    pub n_users: usize,
    pub n_rx: usize,
    pub n_paths: usize,
}

impl Default for MisoDims {
    fn default() -> Self {
        Self {
            n_rf: 8,
            n_per_rimsa: 8,
            n_users: 4,
            n_rx: 4,
            n_paths: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MimoDims {
    pub n_rf_tx: usize,
    pub n_per_rimsa_tx: usize,
    pub n_users: usize,
    pub n_rf_rx: usize,
    pub n_per_rimsa_rx: usize,
    pub n_streams: usize,
    pub n_paths: usize,
}

impl Default for MimoDims {
    fn default() -> Self {
        Self {
            n_rf_tx: 16,
            n_per_rimsa_tx: 2,
            n_users: 4,
            n_rf_rx: 4,
            n_per_rimsa_rx: 4,
            n_streams: 4,
            n_paths: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub outer_iters: usize,
    /// FP rounds per outer iteration (MISO).
    pub inner_rounds: usize,
    /// FP surrogate change that ends the inner loop (nats).
    pub inner_tol: f64,
    /// Sum-rate improvement that ends the MISO outer loop (bits).
    pub outer_tol: f64,
    /// Weighted-MSE change that ends the MIMO outer loop (nats).
    pub mse_tol: f64,
    pub rcg: RcgParams,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            outer_iters: 100,
            inner_rounds: 50,
            inner_tol: 1e-6,
            outer_tol: 1e-4,
            mse_tol: 1e-6,
            rcg: RcgParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub trials: usize,
    pub seed: u64,
    pub snr_db: Vec<f64>,
    /// Element noise variance; the transmit power is `noise_var·10^(SNR/10)`.
    pub noise_var: f64,
    /// Element spacing in wavelengths for both arrays.
    pub spacing: f64,
    pub baselines: Vec<Baseline>,
    pub sweep: Option<Sweep>,
    /// Store measured wall time; off by default so that repeated runs give
    /// byte-identical output.
    pub record_timing: bool,
    /// Worker threads, 0 for one per core.
    pub threads: usize,
    pub output: PathBuf,
    pub miso: MisoDims,
    pub mimo: MimoDims,
    pub solver: SolverConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::paper(Scenario::Miso)
    }
}

impl ExperimentConfig {
    /// Full-size setup with 100 trials.
    pub fn paper(scenario: Scenario) -> Self {
        let snr_db = match scenario {
            Scenario::Miso => vec![-10.0, -5.0, 0.0, 5.0, 10.0],
            Scenario::Mimo => vec![-20.0, -15.0, -10.0, -5.0, 0.0, 5.0],
        };
        Self {
            scenario,
            trials: 100,
            seed: 1,
            snr_db,
            noise_var: 1.0,
            spacing: 0.5,
            baselines: vec![Baseline::FdOpt, Baseline::RandomPhase],
            sweep: None,
            record_timing: false,
            threads: 0,
            output: PathBuf::from(format!("{}_results.csv", scenario.as_str())),
            miso: MisoDims::default(),
            mimo: MimoDims::default(),
            solver: SolverConfig::default(),
        }
    }

    /// Quarter-scale arrays and 10 trials.
    pub fn small(scenario: Scenario) -> Self {
        let mut cfg = Self::paper(scenario);
        cfg.trials = 10;
        cfg.miso = MisoDims {
            n_rf: 4,
            n_per_rimsa: 4,
            n_users: 2,
            n_rx: 2,
            n_paths: 4,
        };
        cfg.mimo = MimoDims {
            n_rf_tx: 4,
            n_per_rimsa_tx: 2,
            n_users: 2,
            n_rf_rx: 2,
            n_per_rimsa_rx: 2,
            n_streams: 2,
            n_paths: 5,
        };
        cfg
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Total transmit power for an SNR point.
    pub fn power(&self, snr_db: f64) -> f64 {
        self.noise_var * 10f64.powf(snr_db / 10.0)
    }

    /// Sweep axis as `(name, values)`; a run without a sweep has the single
    /// point `("none", [0])`.
    pub fn sweep_points(&self) -> (&'static str, Vec<f64>) {
        match &self.sweep {
            Some(s) => (s.kind.as_str(), s.values.clone()),
            None => ("none", vec![0.0]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.snr_db.is_empty() {
            return bad("snr_db must not be empty".into());
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("snr_db values must be finite".into());
        }
        if !(self.noise_var > 0.0) || !self.noise_var.is_finite() {
            return bad(format!("noise_var must be positive, got {}", self.noise_var));
        }
        if !(self.spacing > 0.0) {
            return bad(format!("spacing must be positive, got {}", self.spacing));
        }
        self.solver.rcg.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.solver.inner_rounds == 0 {
            return bad("solver.inner_rounds must be positive".into());
        }
        let (_, values) = self.sweep_points();
        if values.is_empty() {
            return bad("sweep values must not be empty".into());
        }
        for &v in &values {
            self.point(v, self.power(self.snr_db[0]))?;
        }
        Ok(())
    }

    /// System dimensions at one sweep value and transmit power.
    pub fn point(&self, sweep_value: f64, power: f64) -> Result<SystemPoint> {
        let kind = self.sweep.as_ref().map(|s| s.kind);
        let count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 && v < 1e9 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("sweep value {v} is not a positive integer")))
            }
        };
        let mut sigma_e = 0.0;
        let system = match self.scenario {
            Scenario::Miso => {
                let mut d = self.miso.clone();
                match kind {
                    Some(SweepKind::RfChains) => {
                        let n_tx = d.n_rf * d.n_per_rimsa;
                        let n_rf = count(sweep_value)?;
                        if n_tx % n_rf != 0 {
                            return Err(Error::Config(format!("{n_rf} RF chains do not divide {n_tx} BS elements")));
                        }
                        d.n_rf = n_rf;
                        d.n_per_rimsa = n_tx / n_rf;
                    }
                    Some(SweepKind::Users) => d.n_users = count(sweep_value)?,
                    Some(SweepKind::CsiError) => sigma_e = sweep_value,
                    None => {}
                }
                let cfg = MisoConfig::new(d.n_rf, d.n_per_rimsa, d.n_users, d.n_rx, power, self.noise_var)
                    .map_err(|e| Error::Config(e.to_string()))?;
                System::Miso(cfg)
            }
            Scenario::Mimo => {
                let mut d = self.mimo.clone();
                match kind {
                    Some(SweepKind::RfChains) => {
                        let n_tx = d.n_rf_tx * d.n_per_rimsa_tx;
                        let n_rf = count(sweep_value)?;
                        if n_tx % n_rf != 0 {
                            return Err(Error::Config(format!("{n_rf} RF chains do not divide {n_tx} BS elements")));
                        }
                        d.n_rf_tx = n_rf;
                        d.n_per_rimsa_tx = n_tx / n_rf;
                    }
                    Some(SweepKind::Users) => d.n_users = count(sweep_value)?,
                    Some(SweepKind::CsiError) => sigma_e = sweep_value,
                    None => {}
                }
                let cfg = MimoConfig::new(
                    d.n_rf_tx,
                    d.n_per_rimsa_tx,
                    d.n_users,
                    d.n_rf_rx,
                    d.n_per_rimsa_rx,
                    d.n_streams,
                    power,
                    self.noise_var,
                )
                .map_err(|e| Error::Config(e.to_string()))?;
                System::Mimo(cfg)
            }
        };
        if !(sigma_e >= 0.0) || !sigma_e.is_finite() {
            return Err(Error::Config(format!("CSI error must be nonnegative, got {sigma_e}")));
        }
        let n_paths = match self.scenario {
            Scenario::Miso => self.miso.n_paths,
            Scenario::Mimo => self.mimo.n_paths,
        };
        if n_paths == 0 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        Ok(SystemPoint {
            system,
            n_paths,
            sigma_e,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum System {
    Miso(MisoConfig),
    Mimo(MimoConfig),
}

impl System {
    pub fn n_tx(&self) -> usize {
        match self {
            System::Miso(c) => c.n_tx(),
            System::Mimo(c) => c.n_tx(),
        }
    }

    pub fn n_rx(&self) -> usize {
        match self {
            System::Miso(c) => c.n_rx,
            System::Mimo(c) => c.n_rx(),
        }
    }

    pub fn n_users(&self) -> usize {
        match self {
            System::Miso(c) => c.n_users,
            System::Mimo(c) => c.n_users,
        }
    }

    pub fn power(&self) -> f64 {
        match self {
            System::Miso(c) => c.power,
            System::Mimo(c) => c.power,
        }
    }
}

/// Everything needed to simulate one sweep point at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemPoint {
    pub system: System,
    pub n_paths: usize,
    /// CSI error standard deviation used for the design channel.
    pub sigma_e: f64,
}
