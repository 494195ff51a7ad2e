//! MU-MIMO sum-rate maximization (WMMSE-PMO).
//!
//! The BS side matches the MISO module (`V`, `N_t × N_t^RF`, `N × 1`
//! blocks). UE `i` has `N_r^RF` RIMSAs of `K` elements each, so its analog
//! combiner `W_RF^(i)` is `N_r^RF × N_r` with `1 × K` blocks; the per-user
//! combiners are kept stacked as one block-diagonal phase matrix
//! `W_RF = blkdiag(W_RF^(1), …, W_RF^(M))`. The digital precoder
//! `W_D = [W_1 … W_M]` carries `N_s` streams per user and `U_i` is the
//! `N_s × N_r^RF` digital combiner.
//!
//! With `G_i = W_RF^(i) H_i V`, the weighted-MSE objective is
//! `Σ_i Tr(Λ_i E_i) − ln det Λ_i`, minimized by block coordinate descent over
//! `U`, `Λ`, `W_D` (closed form) and `(V, W_RF)` (manifold step on `f₁`).

use std::f64::consts::LN_2;
use std::sync::Arc;

use rand::Rng;

use crate::channel::ChannelRealization;
use crate::linalg::{fro2, hermitian_part, inv_hpd_regularized, ln_det_hpd, solve_hpd, RegularizedSolve};
use crate::manifold::{rcg_minimize, BlockDiagPattern, PhaseMatrix, ProductObjective, RcgParams};
use crate::miso::AnalogMode;
use crate::{CMatrix, Error, Result, C64};

const POWER_REL_TOL: f64 = 1e-13;
/// Relative singular-value cutoff for the row space of `U`.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MimoConfig {
    /// BS RF chains `N_t^RF`.
    pub n_rf_tx: usize,
    /// Elements per BS RIMSA `N`.
    pub n_per_rimsa_tx: usize,
    pub n_users: usize,
    /// UE RF chains `N_r^RF`.
    pub n_rf_rx: usize,
    /// Elements per UE RIMSA `K`.
    pub n_per_rimsa_rx: usize,
    /// Streams per user `N_s`.
    pub n_streams: usize,
    pub power: f64,
    pub noise_var: f64,
}

impl MimoConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_rf_tx: usize,
        n_per_rimsa_tx: usize,
        n_users: usize,
        n_rf_rx: usize,
        n_per_rimsa_rx: usize,
        n_streams: usize,
        power: f64,
        noise_var: f64,
    ) -> Result<Self> {
        let cfg = Self {
            n_rf_tx,
            n_per_rimsa_tx,
            n_users,
            n_rf_rx,
            n_per_rimsa_rx,
            n_streams,
            power,
            noise_var,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            self.n_rf_tx,
            self.n_per_rimsa_tx,
            self.n_users,
            self.n_rf_rx,
            self.n_per_rimsa_rx,
            self.n_streams,
        ];
        if dims.contains(&0) {
            return Err(Error::InvalidArgument(format!("MIMO dimensions must be positive: {self:?}")));
        }
        if self.n_streams > self.n_rf_rx {
            return Err(Error::InvalidArgument(format!(
                "{} streams exceed {} receive RF chains",
                self.n_streams, self.n_rf_rx
            )));
        }
        if !(self.power > 0.0) || !self.power.is_finite() {
            return Err(Error::InvalidArgument(format!("power must be positive, got {}", self.power)));
        }
        if !(self.noise_var > 0.0) || !self.noise_var.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be positive, got {}",
                self.noise_var
            )));
        }
        Ok(())
    }

    pub fn n_tx(&self) -> usize {
        self.n_rf_tx * self.n_per_rimsa_tx
    }

    /// Elements per UE, `N_r = N_r^RF·K`.
    pub fn n_rx(&self) -> usize {
        self.n_rf_rx * self.n_per_rimsa_rx
    }

    pub fn v_pattern(&self) -> Arc<BlockDiagPattern> {
        Arc::new(BlockDiagPattern::uniform(self.n_rf_tx, self.n_per_rimsa_tx, 1).expect("validated dims"))
    }

    /// Pattern of the stacked combiner `blkdiag(W_RF^(1), …, W_RF^(M))`.
    pub fn w_rf_pattern(&self) -> Arc<BlockDiagPattern> {
        Arc::new(
            BlockDiagPattern::uniform(self.n_users * self.n_rf_rx, 1, self.n_per_rimsa_rx)
                .expect("validated dims"),
        )
    }

    fn check_channels(&self, ch: &ChannelRealization) -> Result<()> {
        if ch.n_users() != self.n_users || ch.n_rx() != self.n_rx() || ch.n_tx() != self.n_tx() {
            return Err(Error::InvalidArgument(format!(
                "channel has {} users of shape {}x{}, config expects {} users of shape {}x{}",
                ch.n_users(),
                ch.n_rx(),
                ch.n_tx(),
                self.n_users,
                self.n_rx(),
                self.n_tx()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MimoState {
    pub v: PhaseMatrix,
    /// Stacked block-diagonal analog combiners of all users.
    pub w_rf: PhaseMatrix,
    /// `N_t^RF × M·N_s`, user `i` owns columns `i·N_s .. (i+1)·N_s`.
    pub w_d: CMatrix,
    pub u: Vec<CMatrix>,
    pub weights: Vec<CMatrix>,
    pub mu: f64,
}

impl MimoState {
    /// State with zero digital combiners and identity weights.
    pub fn new(cfg: &MimoConfig, v: PhaseMatrix, w_rf: PhaseMatrix, w_d: CMatrix) -> Result<Self> {
        if v.pattern() != &*cfg.v_pattern() {
            return Err(Error::InvalidArgument("V does not match the configured block pattern".into()));
        }
        if w_rf.pattern() != &*cfg.w_rf_pattern() {
            return Err(Error::InvalidArgument("W_RF does not match the configured block pattern".into()));
        }
        let shape = (cfg.n_rf_tx, cfg.n_users * cfg.n_streams);
        if w_d.shape() != shape {
            return Err(Error::shape(shape, w_d.shape()));
        }
        Ok(Self {
            v,
            w_rf,
            w_d,
            u: vec![CMatrix::zeros(cfg.n_streams, cfg.n_rf_rx); cfg.n_users],
            weights: vec![CMatrix::identity(cfg.n_streams, cfg.n_streams); cfg.n_users],
            mu: 0.0,
        })
    }

    /// Random analog phases and a cyclic identity digital precoder meeting
    /// the power budget with equality.
    pub fn initial<R: Rng + ?Sized>(cfg: &MimoConfig, rng: &mut R) -> Self {
        let v = PhaseMatrix::random(cfg.v_pattern(), rng);
        let w_rf = PhaseMatrix::random(cfg.w_rf_pattern(), rng);
        Self::new(cfg, v, w_rf, initial_digital_precoder(cfg)).expect("shapes follow the config")
    }

    /// `W_RF^(i)` as a dense `N_r^RF × N_r` matrix.
    pub fn w_rf_block(&self, cfg: &MimoConfig, i: usize) -> CMatrix {
        w_rf_block(self.w_rf.values(), cfg, i)
    }

    /// `W_i`, the streams of user `i`.
    pub fn precoder_block(&self, cfg: &MimoConfig, i: usize) -> CMatrix {
        self.w_d.columns(i * cfg.n_streams, cfg.n_streams).clone_owned()
    }

    /// `Tr(V W_D W_Dᴴ Vᴴ)`.
    pub fn transmit_power(&self) -> f64 {
        fro2(&(self.v.values() * &self.w_d))
    }
}

fn w_rf_block(stacked: &CMatrix, cfg: &MimoConfig, i: usize) -> CMatrix {
    stacked
        .view((i * cfg.n_rf_rx, i * cfg.n_rx()), (cfg.n_rf_rx, cfg.n_rx()))
        .clone_owned()
}

/// `W_D(k mod N_t^RF, k) = √(P/(N·M·N_s))`.
pub fn initial_digital_precoder(cfg: &MimoConfig) -> CMatrix {
    let cols = cfg.n_users * cfg.n_streams;
    let scale = (cfg.power / (cfg.n_per_rimsa_tx * cols) as f64).sqrt();
    let mut w = CMatrix::zeros(cfg.n_rf_tx, cols);
    for k in 0..cols {
        w[(k % cfg.n_rf_tx, k)] = C64::new(scale, 0.0);
    }
    w
}

/// `blkdiag(blocks…)`.
pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Per-user quantities shared by the closed-form updates.
struct UserTerms {
    /// `G_i W_i`.
    gw: CMatrix,
    /// `J_i = G_i W_D W_Dᴴ G_iᴴ + σ² W_RF^(i) W_RF^(i)ᴴ`.
    j: CMatrix,
}

fn user_terms(i: usize, state: &MimoState, ch: &ChannelRealization, cfg: &MimoConfig) -> UserTerms {
    let w_rf = state.w_rf_block(cfg, i);
    let g = &w_rf * ch.user(i) * state.v.values();
    let gw_all = &g * &state.w_d;
    let gw = gw_all.columns(i * cfg.n_streams, cfg.n_streams).clone_owned();
    let j = hermitian_part(&(&gw_all * gw_all.adjoint() + &w_rf * w_rf.adjoint() * C64::new(cfg.noise_var, 0.0)));
    UserTerms { gw, j }
}

fn check_user(i: usize, cfg: &MimoConfig) -> Result<()> {
    if i >= cfg.n_users {
        return Err(Error::InvalidArgument(format!("user {i} out of range 0..{}", cfg.n_users)));
    }
    Ok(())
}

/// Rate of user `i` in bits with its current digital combiner,
/// `log₂|I + U G W_i (U G W_i)ᴴ R_i⁻¹|` where `R_i` is the combined
/// interference-plus-noise covariance.
///
/// The determinant ratio only depends on the row space of `U`, so it is
/// evaluated on an orthonormal basis `Q` of that space as
/// `ln det(Qᴴ J_i Q) − ln det(Qᴴ (J_i − G W_i W_iᴴ Gᴴ) Q)`, which stays well
/// conditioned when `U` is rank deficient. The flag reports such a `U`
/// (where `R_i` itself is singular).
pub fn user_rate_flagged(
    i: usize,
    state: &MimoState,
    ch: &ChannelRealization,
    cfg: &MimoConfig,
) -> Result<(f64, bool)> {
    cfg.check_channels(ch)?;
    check_user(i, cfg)?;
    let t = user_terms(i, state, ch, cfg);
    let u = &state.u[i];
    let svd = u.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.iter().fold(0.0_f64, |m, &x| m.max(x));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > RANK_TOL * smax && smax > 0.0)
        .collect();
    let deficient = keep.len() < u.nrows();
    if keep.is_empty() {
        return Ok((0.0, deficient));
    }
    let q = CMatrix::from_fn(u.ncols(), keep.len(), |r, c| v_t[(keep[c], r)].conj());
    let total = hermitian_part(&(q.adjoint() * &t.j * &q));
    let interf = hermitian_part(&(q.adjoint() * (&t.j - &t.gw * t.gw.adjoint()) * &q));
    let ld_total = ln_det_hpd(&total).ok_or_else(|| Error::Numeric("received covariance is not PD".into()))?;
    let ld_interf =
        ln_det_hpd(&interf).ok_or_else(|| Error::Numeric("interference covariance is not PD".into()))?;
    Ok(((ld_total - ld_interf).max(0.0) / LN_2, deficient))
}

pub fn user_rate(i: usize, state: &MimoState, ch: &ChannelRealization, cfg: &MimoConfig) -> Result<f64> {
    Ok(user_rate_flagged(i, state, ch, cfg)?.0)
}

/// `Σ_i r_i` in bits with the stored combiners.
pub fn sum_rate(state: &MimoState, ch: &ChannelRealization, cfg: &MimoConfig) -> Result<f64> {
    (0..cfg.n_users).map(|i| user_rate(i, state, ch, cfg)).sum()
}

/// Sum rate after replacing every `U_i` by its MMSE combiner.
pub fn sum_rate_mmse(state: &MimoState, ch: &ChannelRealization, cfg: &MimoConfig) -> Result<f64> {
    let mut s = state.clone();
    refresh_combiners(&mut s, ch, cfg)?;
    sum_rate(&s, ch, cfg)
}

/// `E_i = I − U G W_i − (U G W_i)ᴴ + U J_i Uᴴ`.
pub fn mse_matrix(i: usize, state: &MimoState, ch: &ChannelRealization, cfg: &MimoConfig) -> Result<CMatrix> {
    cfg.check_channels(ch)?;
    check_user(i, cfg)?;
    let t = user_terms(i, state, ch, cfg);
    Ok(mse_from_terms(&t, &state.u[i]))
}

fn mse_from_terms(t: &UserTerms, u: &CMatrix) -> CMatrix {
    let ugw = u * &t.gw;
    let eye = CMatrix::identity(ugw.nrows(), ugw.ncols());
    hermitian_part(&(eye - &ugw - ugw.adjoint() + u * &t.j * u.adjoint()))
}

/// `Λ = E⁻¹` (symmetrized). The flag reports a regularized inverse.
pub fn update_weights(e: &CMatrix) -> (CMatrix, bool) {
    let (inv, regularized) = inv_hpd_regularized(e);
    (hermitian_part(&inv), regularized)
}

/// MMSE combiner `U_i = (J_i⁻¹ G_i W_i)ᴴ`.
pub fn update_combiner(i: usize, state: &MimoState, ch: &ChannelRealization, cfg: &MimoConfig) -> Result<CMatrix> {
    cfg.check_channels(ch)?;
    check_user(i, cfg)?;
    let t = user_terms(i, state, ch, cfg);
    let x = solve_hpd(&t.j, &t.gw).ok_or_else(|| Error::Numeric("received covariance is singular".into()))?;
    Ok(x.adjoint())
}

fn refresh_combiners(state: &mut MimoState, ch: &ChannelRealization, cfg: &MimoConfig) -> Result<()> {
    state.u = (0..cfg.n_users)
        .map(|i| update_combiner(i, state, ch, cfg))
        .collect::<Result<_>>()?;
    Ok(())
}

fn refresh_weights(state: &mut MimoState, ch: &ChannelRealization, cfg: &MimoConfig) -> Result<()> {
    state.weights = (0..cfg.n_users)
        .map(|i| mse_matrix(i, state, ch, cfg).map(|e| update_weights(&e).0))
        .collect::<Result<_>>()?;
    Ok(())
}

/// Closed-form digital precoder
/// `W_i = (Σ_j G_jᴴ U_jᴴ Λ_j U_j G_j + μ·VᴴV)⁻¹ G_iᴴ U_iᴴ Λ_i` with the
/// smallest `μ ≥ 0` meeting `Tr(V W_D W_Dᴴ Vᴴ) ≤ P`. Returns `(W_D, μ)`.
pub fn update_digital_precoder(
    state: &MimoState,
    ch: &ChannelRealization,
    cfg: &MimoConfig,
) -> Result<(CMatrix, f64)> {
    cfg.check_channels(ch)?;
    let mut gram = CMatrix::zeros(cfg.n_rf_tx, cfg.n_rf_tx);
    let mut rhs = CMatrix::zeros(cfg.n_rf_tx, cfg.n_users * cfg.n_streams);
    for i in 0..cfg.n_users {
        let g = state.w_rf_block(cfg, i) * ch.user(i) * state.v.values();
        let ug = &state.u[i] * &g;
        gram += ug.adjoint() * &state.weights[i] * &ug;
        rhs.columns_mut(i * cfg.n_streams, cfg.n_streams)
            .copy_from(&(ug.adjoint() * &state.weights[i]));
    }
    let n = cfg.n_per_rimsa_tx as f64;
    let sol = RegularizedSolve::new(&gram, &rhs, n).min_multiplier(cfg.power, POWER_REL_TOL);
    Ok((sol.solution, sol.multiplier / n))
}

/// Weighted-MSE objective `Σ_i Tr(Λ_i E_i) − ln det Λ_i` (nats).
pub fn weighted_mse(state: &MimoState, ch: &ChannelRealization, cfg: &MimoConfig) -> Result<f64> {
    cfg.check_channels(ch)?;
    let mut acc = 0.0;
    for i in 0..cfg.n_users {
        let e = mse_from_terms(&user_terms(i, state, ch, cfg), &state.u[i]);
        let lam = &state.weights[i];
        let ld = ln_det_hpd(lam).ok_or_else(|| Error::Numeric("weight matrix is not positive definite".into()))?;
        acc += (lam * e).trace().re - ld;
    }
    Ok(acc)
}

/// Stacked `U` and `Λ` as block-diagonal matrices.
fn stacked_u_lambda(state: &MimoState) -> (CMatrix, CMatrix) {
    (block_diag(&state.u), block_diag(&state.weights))
}

/// `Y = U W_RF H V W_D` on stacked matrices.
fn stacked_y(u: &CMatrix, w_rf: &PhaseMatrix, h: &CMatrix, v: &PhaseMatrix, w_d: &CMatrix) -> CMatrix {
    v.right_of(&(u * w_rf.left_of(h))) * w_d
}

fn f1_from_y(y: &CMatrix, lambda: &CMatrix) -> f64 {
    -2.0 * (lambda * y).trace().re + (lambda * y * y.adjoint()).trace().re
}

/// `f₁ = −2·Re Tr(Λ U W_RF H V W_D) + Tr(Λ U W_RF H V W_D W_Dᴴ Vᴴ Hᴴ W_RFᴴ Uᴴ)`,
/// the part of the weighted MSE that depends on `(V, W_RF)`.
pub fn f1(state: &MimoState, ch: &ChannelRealization, cfg: &MimoConfig) -> Result<f64> {
    cfg.check_channels(ch)?;
    let (u, lam) = stacked_u_lambda(state);
    let y = stacked_y(&u, &state.w_rf, ch.stacked(), &state.v, &state.w_d);
    Ok(f1_from_y(&y, &lam))
}

/// `Yᴴ Λ − Λ`, the core shared by `C` and `D`.
fn f1_core(y: &CMatrix, lambda: &CMatrix) -> CMatrix {
    y.adjoint() * lambda - lambda
}

/// Euclidean gradient of `f₁` in `V`: `2·Cᴴ ⊙ Q₁` with
/// `C = W_D W_Dᴴ Vᴴ Hᴴ W_RFᴴ Uᴴ Λ U W_RF H − W_D Λ U W_RF H`.
pub fn euclid_grad_v_mimo(state: &MimoState, ch: &ChannelRealization, cfg: &MimoConfig) -> Result<CMatrix> {
    cfg.check_channels(ch)?;
    let (u, lam) = stacked_u_lambda(state);
    let uwh = &u * state.w_rf.left_of(ch.stacked());
    let y = state.v.right_of(&uwh) * &state.w_d;
    let c = &state.w_d * f1_core(&y, &lam) * &uwh;
    Ok(state.v.pattern().mask(&c.adjoint())? * C64::new(2.0, 0.0))
}

/// Euclidean gradient of `f₁` in the stacked `W_RF`: `2·Dᴴ ⊙ Q₂` with
/// `D = H V W_D W_Dᴴ Vᴴ Hᴴ W_RFᴴ Uᴴ Λ U − H V W_D Λ U`.
pub fn euclid_grad_wrf(state: &MimoState, ch: &ChannelRealization, cfg: &MimoConfig) -> Result<CMatrix> {
    cfg.check_channels(ch)?;
    let (u, lam) = stacked_u_lambda(state);
    let hvw = state.v.right_of(ch.stacked()) * &state.w_d;
    let y = &u * state.w_rf.left_of(&hvw);
    let d = hvw * f1_core(&y, &lam) * &u;
    Ok(state.w_rf.pattern().mask(&d.adjoint())? * C64::new(2.0, 0.0))
}

/// `f₁` over the analog stages with `U`, `Λ`, `W_D` held fixed.
pub struct F1Objective<'a> {
    channels: &'a ChannelRealization,
    w_d: &'a CMatrix,
    u: CMatrix,
    lambda: CMatrix,
    /// `Some(V)` optimizes only `W_RF` (points = `[W_RF]`); `None`
    /// optimizes `(V, W_RF)`.
    fixed_v: Option<&'a PhaseMatrix>,
}

impl<'a> F1Objective<'a> {
    pub fn new(state: &'a MimoState, channels: &'a ChannelRealization, optimize_v: bool) -> Self {
        let (u, lambda) = stacked_u_lambda(state);
        Self {
            channels,
            w_d: &state.w_d,
            u,
            lambda,
            fixed_v: if optimize_v { None } else { Some(&state.v) },
        }
    }

    fn split<'p>(&'p self, points: &'p [PhaseMatrix]) -> Result<(&'p PhaseMatrix, &'p PhaseMatrix)> {
        match (self.fixed_v, points) {
            (Some(v), [w]) => Ok((v, w)),
            (None, [v, w]) => Ok((v, w)),
            _ => Err(Error::InvalidArgument(format!("f1 objective got {} points", points.len()))),
        }
    }
}

impl ProductObjective for F1Objective<'_> {
    fn value(&self, points: &[PhaseMatrix]) -> Result<f64> {
        let (v, w_rf) = self.split(points)?;
        let y = stacked_y(&self.u, w_rf, self.channels.stacked(), v, self.w_d);
        Ok(f1_from_y(&y, &self.lambda))
    }

    fn euclidean_gradient(&self, points: &[PhaseMatrix]) -> Result<Vec<CMatrix>> {
        let (v, w_rf) = self.split(points)?;
        let h = self.channels.stacked();
        let hvw = v.right_of(h) * self.w_d;
        let y = &self.u * w_rf.left_of(&hvw);
        let core = f1_core(&y, &self.lambda);
        let two = C64::new(2.0, 0.0);
        let d = hvw * &core * &self.u;
        let grad_w = w_rf.pattern().mask(&d.adjoint())? * two;
        if self.fixed_v.is_some() {
            return Ok(vec![grad_w]);
        }
        let c = self.w_d * core * (&self.u * w_rf.left_of(h));
        let grad_v = v.pattern().mask(&c.adjoint())? * two;
        Ok(vec![grad_v, grad_w])
    }
}

/// `max_i |r_i − log₂det(E_i⁻¹)|`; requires `N_r^RF = N_s`.
pub fn verify_rate_mse_equivalence(state: &MimoState, ch: &ChannelRealization, cfg: &MimoConfig) -> Result<f64> {
    if cfg.n_rf_rx != cfg.n_streams {
        return Err(Error::InvalidArgument(format!(
            "equivalence needs N_r^RF = N_s, got {} and {}",
            cfg.n_rf_rx, cfg.n_streams
        )));
    }
    let mut worst = 0.0_f64;
    for i in 0..cfg.n_users {
        let rate = user_rate(i, state, ch, cfg)?;
        let e = mse_matrix(i, state, ch, cfg)?;
        let ld = ln_det_hpd(&e).ok_or_else(|| Error::Numeric("MSE matrix is not positive definite".into()))?;
        worst = worst.max((rate + ld / LN_2).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WmmsePmoOptions {
    pub outer_iters: usize,
    pub rcg: RcgParams,
    pub analog: AnalogMode,
    /// Outer stop: absolute change of the weighted-MSE objective (nats).
    pub tol: f64,
}

impl WmmsePmoOptions {
    pub fn new(outer_iters: usize, rcg: RcgParams) -> Self {
        Self {
            outer_iters,
            rcg,
            analog: AnalogMode::Joint,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MimoRun {
    pub state: MimoState,
    /// Sum rate (bits, MMSE combiners) at the start and after every outer
    /// iteration.
    pub rate_trace: Vec<f64>,
    /// Weighted-MSE objective (nats) at the same points.
    pub mse_trace: Vec<f64>,
    pub outer_iterations: usize,
    pub converged: bool,
}

/// WMMSE-PMO from a given initial state. `U` and `Λ` are refreshed before
/// the first objective evaluation.
pub fn wmmse_pmo_from(
    ch: &ChannelRealization,
    cfg: &MimoConfig,
    init: MimoState,
    opts: &WmmsePmoOptions,
) -> Result<MimoRun> {
    cfg.validate()?;
    cfg.check_channels(ch)?;
    opts.rcg.validate()?;
    let mut state = init;
    refresh_combiners(&mut state, ch, cfg)?;
    refresh_weights(&mut state, ch, cfg)?;
    let mut obj = weighted_mse(&state, ch, cfg)?;
    let mut mse_trace = vec![obj];
    let mut rate_trace = vec![sum_rate(&state, ch, cfg)?];
    let mut converged = false;
    let mut outer = 0;

    while outer < opts.outer_iters {
        outer += 1;
        refresh_combiners(&mut state, ch, cfg)?;
        refresh_weights(&mut state, ch, cfg)?;

        let before = weighted_mse(&state, ch, cfg)?;
        let (w_d, mu) = update_digital_precoder(&state, ch, cfg)?;
        let mut candidate = state.clone();
        candidate.w_d = w_d;
        candidate.mu = mu;
        // the bisection lands marginally inside the budget; reject the rare
        // candidate that rounding makes worse
        if weighted_mse(&candidate, ch, cfg)? <= before {
            state = candidate;
        }

        match opts.analog {
            AnalogMode::Joint => {
                let out = {
                    let objective = F1Objective::new(&state, ch, true);
                    rcg_minimize(&objective, vec![state.v.clone(), state.w_rf.clone()], &opts.rcg)?
                };
                let mut pts = out.points.into_iter();
                state.v = pts.next().expect("two members");
                state.w_rf = pts.next().expect("two members");
            }
            AnalogMode::ReceiveOnly => {
                let out = {
                    let objective = F1Objective::new(&state, ch, false);
                    rcg_minimize(&objective, vec![state.w_rf.clone()], &opts.rcg)?
                };
                state.w_rf = out.points.into_iter().next().expect("one member");
            }
            AnalogMode::Fixed => {}
        }

        let new_obj = weighted_mse(&state, ch, cfg)?;
        mse_trace.push(new_obj);
        rate_trace.push(sum_rate_mmse(&state, ch, cfg)?);
        let change = (obj - new_obj).abs();
        obj = new_obj;
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    refresh_combiners(&mut state, ch, cfg)?;

    Ok(MimoRun {
        state,
        rate_trace,
        mse_trace,
        outer_iterations: outer,
        converged,
    })
}

/// WMMSE-PMO from a random initial point.
pub fn wmmse_pmo<R: Rng + ?Sized>(
    ch: &ChannelRealization,
    cfg: &MimoConfig,
    outer_iters: usize,
    rcg_params: &RcgParams,
    rng: &mut R,
) -> Result<MimoRun> {
    cfg.validate()?;
    let init = MimoState::initial(cfg, rng);
    wmmse_pmo_from(ch, cfg, init, &WmmsePmoOptions::new(outer_iters, *rcg_params))
}
