//! Riemannian conjugate gradient over a product of phase-matrix manifolds.

use serde::{Deserialize, Serialize};

use crate::{CMatrix, Error, Result, C64};

use super::{metric, polak_ribiere, project_tangent, retract, transport, PhaseMatrix, TangentVector};

/// Smallest step tried by the backtracking line search.
const STEP_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RcgParams {
    /// Armijo sufficient-decrease fraction.
    pub c: f64,
    /// Step shrink factor.
    pub tau: f64,
    /// Initial trial step.
    pub alpha0: f64,
    /// Stop once the summed gradient Frobenius norms drop below this.
    pub epsilon: f64,
    pub max_iter: usize,
}

impl Default for RcgParams {
    fn default() -> Self {
        Self {
            c: 1e-4,
            tau: 0.5,
            alpha0: 1.0,
            epsilon: 1e-4,
            max_iter: 200,
        }
    }
}

impl RcgParams {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.c) {
            return Err(Error::InvalidArgument(format!("c must lie in (0, 1), got {}", self.c)));
        }
        if !open_unit(self.tau) {
            return Err(Error::InvalidArgument(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha0 must be positive, got {}", self.alpha0)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Objective over a tuple of phase matrices.
///
/// `euclidean_gradient` returns one matrix per tuple member, in the
/// convention `∂f/∂Re X + j·∂f/∂Im X`, so that `df = Re Tr(Gᴴ dX)`.
pub trait ProductObjective {
    fn value(&self, points: &[PhaseMatrix]) -> Result<f64>;
    fn euclidean_gradient(&self, points: &[PhaseMatrix]) -> Result<Vec<CMatrix>>;
}

/// Adapts a pair of closures to [`ProductObjective`].
pub struct FnObjective<F, G> {
    value: F,
    gradient: G,
}

impl<F, G> FnObjective<F, G>
where
    F: Fn(&[PhaseMatrix]) -> Result<f64>,
    G: Fn(&[PhaseMatrix]) -> Result<Vec<CMatrix>>,
{
    pub fn new(value: F, gradient: G) -> Self {
        Self { value, gradient }
    }
}

impl<F, G> ProductObjective for FnObjective<F, G>
where
    F: Fn(&[PhaseMatrix]) -> Result<f64>,
    G: Fn(&[PhaseMatrix]) -> Result<Vec<CMatrix>>,
{
    fn value(&self, points: &[PhaseMatrix]) -> Result<f64> {
        (self.value)(points)
    }

    fn euclidean_gradient(&self, points: &[PhaseMatrix]) -> Result<Vec<CMatrix>> {
        (self.gradient)(points)
    }
}

/// Solver state between iterations.
#[derive(Debug, Clone)]
pub struct RcgState {
    pub points: Vec<PhaseMatrix>,
    pub riem_grads: Vec<TangentVector>,
    pub directions: Vec<TangentVector>,
    pub iteration: usize,
}

impl RcgState {
    /// `Σ_k ‖grad_k‖_F`, the stopping statistic.
    pub fn grad_norm(&self) -> f64 {
        self.riem_grads.iter().map(TangentVector::norm).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientTolerance,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct RcgOutcome {
    pub points: Vec<PhaseMatrix>,
    /// Objective at the initial point and after every accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    pub stop: StopReason,
}

impl RcgOutcome {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::GradientTolerance
    }
}

#[derive(Debug, Clone)]
pub struct LineSearchStep {
    /// Accepted step, or `0` when no trial step satisfied the Armijo rule.
    pub alpha: f64,
    pub points: Vec<PhaseMatrix>,
    pub value: f64,
}

fn summed_metric(a: &[TangentVector], b: &[TangentVector]) -> Result<f64> {
    a.iter().zip(b).map(|(x, y)| metric(x, y)).sum()
}

fn riemannian_gradient(obj: &dyn ProductObjective, points: &[PhaseMatrix]) -> Result<Vec<TangentVector>> {
    let grads = obj.euclidean_gradient(points)?;
    if grads.len() != points.len() {
        return Err(Error::InvalidArgument(format!(
            "gradient callback returned {} members for {} points",
            grads.len(),
            points.len()
        )));
    }
    points.iter().zip(&grads).map(|(x, g)| project_tangent(x, g)).collect()
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(v))
    }
}

/// Armijo backtracking along `directions`: tries `alpha0·τⁿ`, `n = 0, 1, …`,
/// accepting the first step with
/// `f(R(X + αΠ)) ≤ f(X) + c·α·Σ⟨grad, Π⟩`. An ascent direction gets `α = 0`.
pub fn backtracking_step(
    objective: &dyn ProductObjective,
    points: &[PhaseMatrix],
    value: f64,
    riem_grads: &[TangentVector],
    directions: &[TangentVector],
    params: &RcgParams,
) -> Result<LineSearchStep> {
    if points.len() != directions.len() || points.len() != riem_grads.len() {
        return Err(Error::InvalidArgument("tuple lengths differ".into()));
    }
    let slope = summed_metric(riem_grads, directions)?;
    let mut alpha = if slope > 0.0 { 0.0 } else { params.alpha0 };
    while alpha >= STEP_FLOOR {
        let candidate = points
            .iter()
            .zip(directions)
            .map(|(x, d)| {
                let raw = x.values() + d.matrix() * C64::new(alpha, 0.0);
                retract(&raw, x.shared_pattern())
            })
            .collect::<Result<Vec<_>>>()?;
        let trial = finite(objective.value(&candidate)?)?;
        if trial <= value + params.c * alpha * slope {
            return Ok(LineSearchStep {
                alpha,
                points: candidate,
                value: trial,
            });
        }
        alpha *= params.tau;
    }
    Ok(LineSearchStep {
        alpha: 0.0,
        points: points.to_vec(),
        value,
    })
}

/// Minimizes `objective` over the product manifold starting from `init`.
///
/// Each member gets its own Polak-Ribière parameter. A member whose
/// parameter is negative (or whose previous gradient vanished) restarts
/// from its negative gradient, and the whole direction is reset to the
/// negative gradient whenever it fails to be a descent direction.
pub fn rcg_minimize(
    objective: &dyn ProductObjective,
    init: Vec<PhaseMatrix>,
    params: &RcgParams,
) -> Result<RcgOutcome> {
    params.validate()?;
    if init.is_empty() {
        return Err(Error::InvalidArgument("empty point tuple".into()));
    }
    for x in &init {
        x.check_feasible()?;
    }

    let mut value = finite(objective.value(&init)?)?;
    let riem_grads = riemannian_gradient(objective, &init)?;
    let directions = riem_grads.iter().map(|g| g.scaled(-1.0)).collect();
    let mut state = RcgState {
        points: init,
        riem_grads,
        directions,
        iteration: 0,
    };
    let mut trace = vec![value];

    let stop = loop {
        if state.grad_norm() < params.epsilon {
            break StopReason::GradientTolerance;
        }
        if state.iteration >= params.max_iter {
            break StopReason::MaxIterations;
        }

        if summed_metric(&state.riem_grads, &state.directions)? >= 0.0 {
            state.directions = state.riem_grads.iter().map(|g| g.scaled(-1.0)).collect();
        }
        let step = backtracking_step(
            objective,
            &state.points,
            value,
            &state.riem_grads,
            &state.directions,
            params,
        )?;
        if step.alpha == 0.0 {
            break StopReason::LineSearchFailed;
        }
        state.iteration += 1;
        value = step.value;
        trace.push(value);

        let new_grads = riemannian_gradient(objective, &step.points)?;
        let mut new_dirs = Vec::with_capacity(new_grads.len());
        for k in 0..new_grads.len() {
            let x_new = &step.points[k];
            let g_old_t = transport(&state.riem_grads[k], x_new)?;
            let dir_t = transport(&state.directions[k], x_new)?;
            let mu = match polak_ribiere(&new_grads[k], &g_old_t, &state.riem_grads[k]) {
                Ok(mu) if mu.is_finite() && mu > 0.0 => mu,
                Ok(_) | Err(Error::ZeroGradient) => 0.0,
                Err(e) => return Err(e),
            };
            new_dirs.push(new_grads[k].scaled(-1.0).add_scaled(mu, &dir_t));
        }
        state.points = step.points;
        state.riem_grads = new_grads;
        state.directions = new_dirs;
    };

    Ok(RcgOutcome {
        grad_norm: state.grad_norm(),
        iterations: state.iteration,
        points: state.points,
        trace,
        stop,
    })
}
