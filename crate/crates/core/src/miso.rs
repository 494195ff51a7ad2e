//! MU-MISO sum-rate maximization (FP-PMO).
//!
//! The BS has `n_rf` RF chains, each feeding a RIMSA of `n_per_rimsa`
//! elements, so the analog beamformer `V` is `N_t × N_RF` block diagonal with
//! `N × 1` blocks. Every UE combines its `N_r` elements through one RIMSA;
//! the combiners are stored as `F = blkdiag(f_1ᴴ, …, f_Mᴴ)` (`M × M·N_r`,
//! `1 × N_r` blocks) so the received-signal matrix is `Φ = F·H·V·W`.
//!
//! The digital precoder `W` is updated by fractional programming with a
//! quadratic transform; `(V, F)` are updated jointly by Riemannian conjugate
//! gradient on the determinant form of the negative sum rate, `g₂`.

use std::f64::consts::LN_2;
use std::sync::Arc;

use rand::Rng;

use crate::channel::ChannelRealization;
use crate::linalg::{fro2, RegularizedSolve};
use crate::manifold::{rcg_minimize, BlockDiagPattern, PhaseMatrix, ProductObjective, RcgParams};
use crate::{CMatrix, Error, Result, C64};

/// Relative power accuracy of the λ search.
const POWER_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct MisoConfig {
    /// RF chains (RIMSAs) at the BS.
    pub n_rf: usize,
    /// Elements per BS RIMSA.
    pub n_per_rimsa: usize,
    pub n_users: usize,
    /// Elements of each UE RIMSA.
    pub n_rx: usize,
    /// Total transmit power (linear).
    pub power: f64,
    /// Per-user element noise variance σ_m².
    pub noise_vars: Vec<f64>,
}

impl MisoConfig {
    /// Configuration with a common noise variance at every user.
    pub fn new(
        n_rf: usize,
        n_per_rimsa: usize,
        n_users: usize,
        n_rx: usize,
        power: f64,
        noise_var: f64,
    ) -> Result<Self> {
        let cfg = Self {
            n_rf,
            n_per_rimsa,
            n_users,
            n_rx,
            power,
            noise_vars: vec![noise_var; n_users],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rf == 0 || self.n_per_rimsa == 0 || self.n_users == 0 || self.n_rx == 0 {
            return Err(Error::InvalidArgument(format!("MISO dimensions must be positive: {self:?}")));
        }
        if !(self.power > 0.0) || !self.power.is_finite() {
            return Err(Error::InvalidArgument(format!("power must be positive, got {}", self.power)));
        }
        if self.noise_vars.len() != self.n_users {
            return Err(Error::InvalidArgument(format!(
                "expected {} noise variances, got {}",
                self.n_users,
                self.noise_vars.len()
            )));
        }
        if self.noise_vars.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidArgument("noise variances must be positive".into()));
        }
        Ok(())
    }

    /// Total BS elements `N_t = N_RF·N`.
    pub fn n_tx(&self) -> usize {
        self.n_rf * self.n_per_rimsa
    }

    pub fn v_pattern(&self) -> Arc<BlockDiagPattern> {
        Arc::new(BlockDiagPattern::uniform(self.n_rf, self.n_per_rimsa, 1).expect("validated dims"))
    }

    pub fn f_pattern(&self) -> Arc<BlockDiagPattern> {
        Arc::new(BlockDiagPattern::uniform(self.n_users, 1, self.n_rx).expect("validated dims"))
    }

    /// Diagonal of `R_n = N_r·diag(σ_m²)`.
    pub fn noise_floor(&self, m: usize) -> f64 {
        self.noise_vars[m] * self.n_rx as f64
    }

    fn check_channels(&self, ch: &ChannelRealization) -> Result<()> {
        if ch.n_users() != self.n_users || ch.n_rx() != self.n_rx || ch.n_tx() != self.n_tx() {
            return Err(Error::InvalidArgument(format!(
                "channel has {} users of shape {}x{}, config expects {} users of shape {}x{}",
                ch.n_users(),
                ch.n_rx(),
                ch.n_tx(),
                self.n_users,
                self.n_rx,
                self.n_tx()
            )));
        }
        Ok(())
    }
}

/// All iterates of the MISO alternating optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct MisoState {
    pub v: PhaseMatrix,
    pub f: PhaseMatrix,
    /// Digital precoder, `N_RF × M`.
    pub w: CMatrix,
    pub eta: Vec<f64>,
    pub alpha: Vec<C64>,
    pub lambda: f64,
}

impl MisoState {
    pub fn new(cfg: &MisoConfig, v: PhaseMatrix, f: PhaseMatrix, w: CMatrix) -> Result<Self> {
        if v.pattern() != &*cfg.v_pattern() {
            return Err(Error::InvalidArgument("V does not match the configured block pattern".into()));
        }
        if f.pattern() != &*cfg.f_pattern() {
            return Err(Error::InvalidArgument("F does not match the configured block pattern".into()));
        }
        if w.shape() != (cfg.n_rf, cfg.n_users) {
            return Err(Error::shape((cfg.n_rf, cfg.n_users), w.shape()));
        }
        Ok(Self {
            v,
            f,
            w,
            eta: vec![0.0; cfg.n_users],
            alpha: vec![C64::new(0.0, 0.0); cfg.n_users],
            lambda: 0.0,
        })
    }

    /// Random phases for `V` and `F`; `W` puts user `m` on RF chain
    /// `m mod N_RF` with the power budget met with equality.
    pub fn initial<R: Rng + ?Sized>(cfg: &MisoConfig, rng: &mut R) -> Self {
        let v = PhaseMatrix::random(cfg.v_pattern(), rng);
        let f = PhaseMatrix::random(cfg.f_pattern(), rng);
        Self::new(cfg, v, f, initial_precoder(cfg)).expect("shapes follow the config")
    }

    /// Power actually radiated, `Tr(V W Wᴴ Vᴴ)`.
    pub fn transmit_power(&self) -> f64 {
        fro2(&(self.v.values() * &self.w))
    }
}

/// Cyclic identity-padded precoder scaled to `Tr(VWWᴴVᴴ) = P`.
pub fn initial_precoder(cfg: &MisoConfig) -> CMatrix {
    let scale = (cfg.power / (cfg.n_per_rimsa * cfg.n_users) as f64).sqrt();
    let mut w = CMatrix::zeros(cfg.n_rf, cfg.n_users);
    for m in 0..cfg.n_users {
        w[(m % cfg.n_rf, m)] = C64::new(scale, 0.0);
    }
    w
}

/// `f_mᴴ`, the `m`-th block row of `F`, as a `1 × N_r` matrix.
pub fn combiner_row(f: &PhaseMatrix, m: usize) -> CMatrix {
    let n_rx = f.pattern().blocks()[m].1;
    f.values().view((m, m * n_rx), (1, n_rx)).clone_owned()
}

/// `h̃_mᴴ = f_mᴴ H_m V` as a `1 × N_RF` row.
pub fn effective_channel(f_row: &CMatrix, h_m: &CMatrix, v: &CMatrix) -> Result<CMatrix> {
    if f_row.nrows() != 1 || f_row.ncols() != h_m.nrows() {
        return Err(Error::shape((1, h_m.nrows()), f_row.shape()));
    }
    if v.nrows() != h_m.ncols() {
        return Err(Error::shape((h_m.ncols(), v.ncols()), v.shape()));
    }
    Ok(f_row * h_m * v)
}

/// All effective channels as rows of an `M × N_RF` matrix, `F·H·V`.
fn effective_channels(state: &MisoState, ch: &ChannelRealization) -> CMatrix {
    state.v.right_of(&state.f.left_of(ch.stacked()))
}

/// `Φ = F H V W`; entry `(m, i)` is `f_mᴴ H_m V w_i`.
pub fn build_phi(state: &MisoState, ch: &ChannelRealization, cfg: &MisoConfig) -> Result<CMatrix> {
    cfg.check_channels(ch)?;
    Ok(effective_channels(state, ch) * &state.w)
}

/// Per-user `(signal, total received power incl. noise)` from `Φ`.
fn signal_and_total(phi: &CMatrix, cfg: &MisoConfig) -> Vec<(f64, f64)> {
    (0..cfg.n_users)
        .map(|m| {
            let total: f64 = phi.row(m).iter().map(|z| z.norm_sqr()).sum::<f64>() + cfg.noise_floor(m);
            (phi[(m, m)].norm_sqr(), total)
        })
        .collect()
}

fn sinrs_from_phi(phi: &CMatrix, cfg: &MisoConfig) -> Vec<f64> {
    signal_and_total(phi, cfg)
        .into_iter()
        .map(|(s, t)| s / (t - s))
        .collect()
}

/// `|h̃_mᴴ w_m|² / (Σ_{i≠m} |h̃_mᴴ w_i|² + σ_m² N_r)`.
pub fn sinr(m: usize, state: &MisoState, ch: &ChannelRealization, cfg: &MisoConfig) -> Result<f64> {
    cfg.check_channels(ch)?;
    let h = effective_channel(&combiner_row(&state.f, m), ch.user(m), state.v.values())?;
    let row = h * &state.w;
    let signal = row[(0, m)].norm_sqr();
    let interference: f64 = (0..cfg.n_users).filter(|&i| i != m).map(|i| row[(0, i)].norm_sqr()).sum();
    Ok(signal / (interference + cfg.noise_floor(m)))
}

/// `Σ_m log₂(1 + SINR_m)` in bits/s/Hz.
pub fn sum_rate(state: &MisoState, ch: &ChannelRealization, cfg: &MisoConfig) -> Result<f64> {
    let phi = build_phi(state, ch, cfg)?;
    Ok(sinrs_from_phi(&phi, cfg).iter().map(|s| (1.0 + s).log2()).sum())
}

/// Optimal FP auxiliary `η_m = SINR_m` for the current precoder.
pub fn update_eta(state: &MisoState, ch: &ChannelRealization, cfg: &MisoConfig) -> Result<Vec<f64>> {
    Ok(sinrs_from_phi(&build_phi(state, ch, cfg)?, cfg))
}

/// Quadratic-transform auxiliary
/// `α_m = √(1+η_m)·h̃_mᴴ w_m / (Σ_i |h̃_mᴴ w_i|² + σ_m² N_r)`, using `state.eta`.
pub fn update_alpha(state: &MisoState, ch: &ChannelRealization, cfg: &MisoConfig) -> Result<Vec<C64>> {
    let phi = build_phi(state, ch, cfg)?;
    Ok(signal_and_total(&phi, cfg)
        .into_iter()
        .enumerate()
        .map(|(m, (_, total))| phi[(m, m)] * ((1.0 + state.eta[m]).sqrt() / total))
        .collect())
}

/// Gram matrix `Σ_m |α_m|² h̃_m h̃_mᴴ` and right-hand side with columns
/// `√(1+η_m)·α_m·h̃_m`.
fn precoder_system(state: &MisoState, ch: &ChannelRealization) -> (CMatrix, CMatrix) {
    let h_tilde = effective_channels(state, ch).adjoint(); // N_RF × M, columns h̃_m
    let m_users = h_tilde.ncols();
    let mut weighted = h_tilde.clone();
    let mut rhs = h_tilde.clone();
    for m in 0..m_users {
        weighted.column_mut(m).scale_mut(state.alpha[m].norm());
        let s = state.alpha[m] * (1.0 + state.eta[m]).sqrt();
        rhs.column_mut(m).iter_mut().for_each(|z| *z *= s);
    }
    (&weighted * weighted.adjoint(), rhs)
}

/// Closed-form precoder for a fixed multiplier,
/// `w_m = √(1+η_m)·α_m·(Σ_i |α_i|² h̃_i h̃_iᴴ + λ·VᴴV)⁻¹ h̃_m`.
pub fn update_precoder(
    state: &MisoState,
    ch: &ChannelRealization,
    cfg: &MisoConfig,
    lambda: f64,
) -> Result<CMatrix> {
    cfg.check_channels(ch)?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be nonnegative, got {lambda}")));
    }
    let (gram, rhs) = precoder_system(state, ch);
    let vhv = state.v.values().adjoint() * state.v.values();
    let system = gram + vhv * C64::new(lambda, 0.0);
    let inv = system.try_inverse().ok_or_else(|| {
        Error::Numeric("precoder system is singular; use a positive multiplier".into())
    })?;
    let w = inv * rhs;
    if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("precoder system is singular; use a positive multiplier".into()));
    }
    Ok(w)
}

/// Smallest `λ ≥ 0` whose precoder meets `Tr(V W Wᴴ Vᴴ) ≤ P`, with that
/// precoder. Uses `VᴴV = N·I`, valid for every feasible `V`.
pub fn solve_lambda(state: &MisoState, ch: &ChannelRealization, cfg: &MisoConfig) -> Result<(f64, CMatrix)> {
    cfg.check_channels(ch)?;
    let (gram, rhs) = precoder_system(state, ch);
    let n = cfg.n_per_rimsa as f64;
    let solver = RegularizedSolve::new(&gram, &rhs, n);
    let sol = solver.min_multiplier(cfg.power, POWER_REL_TOL);
    Ok((sol.multiplier / n, sol.solution))
}

/// FP surrogate in nats:
/// `Σ_m ln(1+η_m) − η_m + 2√(1+η_m)·Re(α_m* h̃_mᴴ w_m) − |α_m|²·(Σ_i |h̃_mᴴ w_i|² + σ_m² N_r)`.
pub fn fp_surrogate(state: &MisoState, ch: &ChannelRealization, cfg: &MisoConfig) -> Result<f64> {
    let phi = build_phi(state, ch, cfg)?;
    Ok(signal_and_total(&phi, cfg)
        .into_iter()
        .enumerate()
        .map(|(m, (_, total))| {
            let eta = state.eta[m];
            let a = state.alpha[m];
            (1.0 + eta).ln() - eta + 2.0 * (1.0 + eta).sqrt() * (a.conj() * phi[(m, m)]).re
                - a.norm_sqr() * total
        })
        .sum())
}

/// Diagonals of `(Φ(Φᴴ⊙I⁻))⊙I + R_n` and `(ΦΦᴴ)⊙I + R_n`.
fn g2_diagonals(phi: &CMatrix, cfg: &MisoConfig) -> (Vec<f64>, Vec<f64>) {
    signal_and_total(phi, cfg)
        .into_iter()
        .map(|(s, t)| (t - s, t))
        .unzip()
}

fn g2_from_phi(phi: &CMatrix, cfg: &MisoConfig) -> Result<f64> {
    let (interf, total) = g2_diagonals(phi, cfg);
    let mut acc = 0.0;
    for (a, b) in interf.iter().zip(&total) {
        if !(*a > 0.0 && *b > 0.0) {
            return Err(Error::Numeric(format!("nonpositive diagonal in g2 ({a}, {b})")));
        }
        acc += a.log2() - b.log2();
    }
    Ok(acc)
}

/// `g₂ = log₂det{(Φ(Φᴴ⊙I⁻))⊙I + R_n} − log₂det{(ΦΦᴴ)⊙I + R_n}`, which equals
/// the negative sum rate. Both arguments are diagonal.
pub fn g2(state: &MisoState, ch: &ChannelRealization, cfg: &MisoConfig) -> Result<f64> {
    g2_from_phi(&build_phi(state, ch, cfg)?, cfg)
}

/// `Φᴴ ⊙ I⁻ · D₁⁻¹ − Φᴴ · D₂⁻¹`, the `M × M` core shared by `A_k` and `B_k`.
fn g2_core(phi: &CMatrix, cfg: &MisoConfig) -> CMatrix {
    let (interf, total) = g2_diagonals(phi, cfg);
    let m_users = phi.nrows();
    let phi_h = phi.adjoint();
    CMatrix::from_fn(m_users, m_users, |r, c| {
        let off = if r == c { 0.0 } else { 1.0 / interf[c] };
        phi_h[(r, c)] * (off - 1.0 / total[c])
    })
}

/// Euclidean gradient of `g₂` with respect to `F` (`∂/∂Re + j∂/∂Im`):
/// `(2/ln2)·A_kᴴ ⊙ P₁` with
/// `A_k = HVW(Φᴴ⊙I⁻)(D₁⁻¹⊙I) − HVWΦᴴ(D₂⁻¹⊙I)`.
pub fn euclid_grad_f(state: &MisoState, ch: &ChannelRealization, cfg: &MisoConfig) -> Result<CMatrix> {
    let phi = build_phi(state, ch, cfg)?;
    let hvw = state.v.right_of(ch.stacked()) * &state.w;
    grad_f_from_parts(&hvw, &phi, state, cfg)
}

fn grad_f_from_parts(hvw: &CMatrix, phi: &CMatrix, state: &MisoState, cfg: &MisoConfig) -> Result<CMatrix> {
    let a_k = hvw * g2_core(phi, cfg);
    let g = state.f.pattern().mask(&a_k.adjoint())?;
    Ok(g * C64::new(2.0 / LN_2, 0.0))
}

/// Euclidean gradient of `g₂` with respect to `V`: `(2/ln2)·B_kᴴ ⊙ P₂` with
/// `B_k = W(Φᴴ⊙I⁻)(D₁⁻¹⊙I)FH − WΦᴴ(D₂⁻¹⊙I)FH`.
pub fn euclid_grad_v(state: &MisoState, ch: &ChannelRealization, cfg: &MisoConfig) -> Result<CMatrix> {
    let phi = build_phi(state, ch, cfg)?;
    let fh = state.f.left_of(ch.stacked());
    grad_v_from_parts(&fh, &phi, state, cfg)
}

fn grad_v_from_parts(fh: &CMatrix, phi: &CMatrix, state: &MisoState, cfg: &MisoConfig) -> Result<CMatrix> {
    let b_k = &state.w * g2_core(phi, cfg) * fh;
    let g = state.v.pattern().mask(&b_k.adjoint())?;
    Ok(g * C64::new(2.0 / LN_2, 0.0))
}

/// Which analog stages the manifold step may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalogMode {
    /// Optimize `(V, F)` jointly.
    Joint,
    /// Keep `V` fixed and optimize `F` only.
    ReceiveOnly,
    /// Keep both analog stages at their initial values.
    Fixed,
}

/// `g₂` as a function of the analog stages with `W` held fixed.
pub struct G2Objective<'a> {
    pub channels: &'a ChannelRealization,
    pub cfg: &'a MisoConfig,
    pub w: &'a CMatrix,
    /// `Some(V)` optimizes only `F` (points = `[F]`); `None` optimizes
    /// `(V, F)` (points = `[V, F]`).
    pub fixed_v: Option<&'a PhaseMatrix>,
}

impl<'a> G2Objective<'a> {
    fn split<'p>(&'p self, points: &'p [PhaseMatrix]) -> Result<(&'p PhaseMatrix, &'p PhaseMatrix)> {
        match (self.fixed_v, points) {
            (Some(v), [f]) => Ok((v, f)),
            (None, [v, f]) => Ok((v, f)),
            _ => Err(Error::InvalidArgument(format!(
                "g2 objective got {} points",
                points.len()
            ))),
        }
    }

    fn state_for(&self, v: &PhaseMatrix, f: &PhaseMatrix) -> MisoState {
        MisoState {
            v: v.clone(),
            f: f.clone(),
            w: self.w.clone(),
            eta: Vec::new(),
            alpha: Vec::new(),
            lambda: 0.0,
        }
    }
}

impl ProductObjective for G2Objective<'_> {
    fn value(&self, points: &[PhaseMatrix]) -> Result<f64> {
        let (v, f) = self.split(points)?;
        let phi = v.right_of(&f.left_of(self.channels.stacked())) * self.w;
        g2_from_phi(&phi, self.cfg)
    }

    fn euclidean_gradient(&self, points: &[PhaseMatrix]) -> Result<Vec<CMatrix>> {
        let (v, f) = self.split(points)?;
        let state = self.state_for(v, f);
        let h = self.channels.stacked();
        let hv = v.right_of(h);
        let hvw = &hv * self.w;
        let phi = f.left_of(&hvw);
        let grad_f = grad_f_from_parts(&hvw, &phi, &state, self.cfg)?;
        if self.fixed_v.is_some() {
            return Ok(vec![grad_f]);
        }
        let fh = f.left_of(h);
        let grad_v = grad_v_from_parts(&fh, &phi, &state, self.cfg)?;
        Ok(vec![grad_v, grad_f])
    }
}

/// Loop controls for [`fp_pmo_from`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpPmoOptions {
    pub outer_iters: usize,
    pub rcg: RcgParams,
    pub analog: AnalogMode,
    /// Inner FP rounds per outer iteration.
    pub inner_rounds: usize,
    /// Inner stop: change of the FP surrogate (nats).
    pub inner_tol: f64,
    /// Outer stop: sum-rate improvement (bits).
    pub outer_tol: f64,
}

impl FpPmoOptions {
    pub fn new(outer_iters: usize, rcg: RcgParams) -> Self {
        Self {
            outer_iters,
            rcg,
            analog: AnalogMode::Joint,
            inner_rounds: 50,
            inner_tol: 1e-6,
            outer_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MisoRun {
    pub state: MisoState,
    /// Sum rate (bits) at the start and after every outer iteration.
    pub trace: Vec<f64>,
    pub outer_iterations: usize,
    /// True when the outer loop stopped on the improvement tolerance.
    pub converged: bool,
}

/// Runs the FP inner loop (η, α, λ/W updates) on `state` in place.
pub fn fp_precoder_update(
    state: &mut MisoState,
    ch: &ChannelRealization,
    cfg: &MisoConfig,
    rounds: usize,
    tol: f64,
) -> Result<()> {
    let mut previous: Option<f64> = None;
    for _ in 0..rounds {
        state.eta = update_eta(state, ch, cfg)?;
        state.alpha = update_alpha(state, ch, cfg)?;
        let (lambda, w) = solve_lambda(state, ch, cfg)?;
        state.lambda = lambda;
        state.w = w;
        let value = fp_surrogate(state, ch, cfg)?;
        if previous.is_some_and(|p| (value - p).abs() < tol) {
            break;
        }
        previous = Some(value);
    }
    Ok(())
}

/// FP-PMO from a given initial state.
pub fn fp_pmo_from(
    ch: &ChannelRealization,
    cfg: &MisoConfig,
    init: MisoState,
    opts: &FpPmoOptions,
) -> Result<MisoRun> {
    cfg.validate()?;
    cfg.check_channels(ch)?;
    opts.rcg.validate()?;
    let mut state = init;
    let mut rate = sum_rate(&state, ch, cfg)?;
    let mut trace = vec![rate];
    let mut converged = false;
    let mut outer = 0;

    while outer < opts.outer_iters {
        outer += 1;

        let mut candidate = state.clone();
        fp_precoder_update(&mut candidate, ch, cfg, opts.inner_rounds, opts.inner_tol)?;
        // FP steps cannot lower the rate in exact arithmetic; a loss here is
        // rounding in the λ search, so keep the previous precoder.
        if sum_rate(&candidate, ch, cfg)? >= rate {
            state = candidate;
        }

        match opts.analog {
            AnalogMode::Joint => {
                let obj = G2Objective { channels: ch, cfg, w: &state.w, fixed_v: None };
                let out = rcg_minimize(&obj, vec![state.v.clone(), state.f.clone()], &opts.rcg)?;
                let mut pts = out.points.into_iter();
                state.v = pts.next().expect("two members");
                state.f = pts.next().expect("two members");
            }
            AnalogMode::ReceiveOnly => {
                let obj = G2Objective { channels: ch, cfg, w: &state.w, fixed_v: Some(&state.v) };
                let out = rcg_minimize(&obj, vec![state.f.clone()], &opts.rcg)?;
                state.f = out.points.into_iter().next().expect("one member");
            }
            AnalogMode::Fixed => {}
        }

        let new_rate = sum_rate(&state, ch, cfg)?;
        trace.push(new_rate);
        let gain = new_rate - rate;
        rate = new_rate;
        if gain < opts.outer_tol {
            converged = true;
            break;
        }
    }

    Ok(MisoRun {
        state,
        trace,
        outer_iterations: outer,
        converged,
    })
}

/// FP-PMO (alternating FP precoding and joint `(V, F)` manifold steps) from
/// a random initial point.
pub fn fp_pmo<R: Rng + ?Sized>(
    ch: &ChannelRealization,
    cfg: &MisoConfig,
    outer_iters: usize,
    rcg_params: &RcgParams,
    rng: &mut R,
) -> Result<MisoRun> {
    cfg.validate()?;
    let init = MisoState::initial(cfg, rng);
    fp_pmo_from(ch, cfg, init, &FpPmoOptions::new(outer_iters, *rcg_params))
}
