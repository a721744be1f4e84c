//! Explicit time stepping of the inertial (IMOG), first-order (MOG) and
//! heavy-ball (HBF) systems.
//!
//! The inertial system `m u'' + γ u' - s(u) = 0` is advanced in velocity form
//!
//! ```text
//! v_{n+1} = (m v_n + h s(u_n)) / (m + h γ)
//! u_{n+1} = u_n + h v_{n+1}
//! ```
//!
//! which is the two-point recurrence
//! `u_{n+1} = u_n + m/(m+hγ) (u_n - u_{n-1}) + h²/(m+hγ) s(u_n)` with
//! `v_n = (u_n - u_{n-1}) / h`. The field `s` is not locally Lipschitz in
//! general, so solutions need not be unique; the scheme picks one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{energy_from_parts, EnergyVector};
use crate::minnorm::{SimplexWeights, DEFAULT_TOL};
use crate::objectives::{
    steepest_descent, steepest_from_gradients, ObjectiveError, ObjectiveVector, VectorObjective,
};
use crate::vecops::{all_finite, dist, dot, norm, norm_sq, scale};

/// A position farther than this from the origin counts as divergence.
pub const DIVERGENCE_RADIUS: f64 = 1e12;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("integration diverged at t = {t}")]
    Divergence { t: f64 },
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynParams {
    pub mass: f64,
    pub damping: f64,
    pub step: f64,
    pub t0: f64,
}

impl DynParams {
    pub fn new(mass: f64, damping: f64, step: f64, t0: f64) -> Result<Self, DynamicsError> {
        let p = Self {
            mass,
            damping,
            step,
            t0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        for (name, v) in [
            ("mass", self.mass),
            ("damping", self.damping),
            ("step", self.step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DynamicsError::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !self.t0.is_finite() {
            return Err(DynamicsError::InvalidParams("t0 must be finite".into()));
        }
        Ok(())
    }

    pub fn with_step(self, step: f64) -> Self {
        Self { step, ..self }
    }

    /// Upper end of the initial-velocity scale interval `[0, 1/γ]`.
    pub fn lambda_max(&self) -> f64 {
        1.0 / self.damping
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl DynState {
    pub fn new(t: f64, u: Vec<f64>, v: Vec<f64>) -> Self {
        Self { t, u, v }
    }

    /// Position `u` at rest.
    pub fn at_rest(t: f64, u: Vec<f64>) -> Self {
        let v = vec![0.0; u.len()];
        Self { t, u, v }
    }

    fn is_finite(&self) -> bool {
        self.t.is_finite() && all_finite(&self.u) && all_finite(&self.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_steps: usize,
    /// Stop once `|s(u)|` is at most this...
    pub crit_tol: f64,
    /// ...and `|v|` is at most this.
    pub vel_tol: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_steps: 1_000_000,
            crit_tol: 1e-6,
            vel_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Imog,
    Mog,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Imog => "imog",
            Scheme::Mog => "mog",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Criticality,
    MaxSteps,
    Divergence,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Criticality => "criticality",
            StopReason::MaxSteps => "max_steps",
            StopReason::Divergence => "divergence",
        }
    }
}

/// Quantities recorded at every state.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub values: ObjectiveVector,
    pub energies: EnergyVector,
    pub snorm: f64,
    pub weights: SimplexWeights,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: DynParams,
    pub scheme: Scheme,
    pub states: Vec<DynState>,
    /// One entry per state.
    pub diagnostics: Vec<StepDiagnostics>,
    pub stop_reason: StopReason,
}

impl Trajectory {
    pub fn last_state(&self) -> &DynState {
        self.states
            .last()
            .expect("trajectories hold at least one state")
    }

    pub fn last_diagnostics(&self) -> &StepDiagnostics {
        self.diagnostics
            .last()
            .expect("trajectories hold at least one state")
    }

    /// Number of steps taken.
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.states[0].u.len()
    }

    pub fn objective_count(&self) -> usize {
        self.diagnostics[0].values.len()
    }
}

fn check_finite(state: &DynState) -> Result<(), DynamicsError> {
    if !state.is_finite() || norm(&state.u) > DIVERGENCE_RADIUS {
        return Err(DynamicsError::Divergence { t: state.t });
    }
    Ok(())
}

/// One inertial step given the field value `s = s(u_n)`.
fn advance_inertial(p: &DynParams, state: &DynState, s: &[f64]) -> Result<DynState, DynamicsError> {
    let denom = p.mass + p.step * p.damping;
    let v: Vec<f64> = state
        .v
        .iter()
        .zip(s)
        .map(|(v, s)| (p.mass * v + p.step * s) / denom)
        .collect();
    let u: Vec<f64> = state
        .u
        .iter()
        .zip(&v)
        .map(|(u, v)| u + p.step * v)
        .collect();
    let next = DynState {
        t: state.t + p.step,
        u,
        v,
    };
    check_finite(&next)?;
    Ok(next)
}

fn check_state(obj: &VectorObjective, state: &DynState) -> Result<(), DynamicsError> {
    let d = obj.dim();
    if state.u.len() != d || state.v.len() != d {
        return Err(DynamicsError::InvalidInput(format!(
            "state dimensions ({}, {}) do not match the problem dimension {d}",
            state.u.len(),
            state.v.len()
        )));
    }
    if !state.is_finite() {
        return Err(DynamicsError::InvalidInput(
            "state has non-finite entries".into(),
        ));
    }
    Ok(())
}

/// One explicit step of `m u'' + γ u' = s(u)`.
pub fn imog_step(
    obj: &VectorObjective,
    p: &DynParams,
    state: &DynState,
) -> Result<DynState, DynamicsError> {
    p.validate()?;
    check_state(obj, state)?;
    let s = steepest_descent(obj, &state.u, DEFAULT_TOL)?;
    advance_inertial(p, state, &s.direction)
}

/// Explicit Euler step of `u' = s(u)`.
pub fn mog_step(obj: &VectorObjective, h: f64, u: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(DynamicsError::InvalidParams(format!(
            "step must be positive, got {h}"
        )));
    }
    let s = steepest_descent(obj, u, DEFAULT_TOL)?;
    let next: Vec<f64> = u.iter().zip(&s.direction).map(|(u, s)| u + h * s).collect();
    if !all_finite(&next) || norm(&next) > DIVERGENCE_RADIUS {
        return Err(DynamicsError::Divergence { t: f64::NAN });
    }
    Ok(next)
}

/// Heavy ball with friction, `m u'' + γ u' + ∇f(u) = 0`; single objective only.
///
/// Shares the inertial code path, so it agrees bit for bit with [`imog_step`].
pub fn hbf_step(
    obj: &VectorObjective,
    p: &DynParams,
    state: &DynState,
) -> Result<DynState, DynamicsError> {
    if obj.count() != 1 {
        return Err(DynamicsError::InvalidInput(format!(
            "heavy ball needs a single objective, got {}",
            obj.count()
        )));
    }
    imog_step(obj, p, state)
}

/// `v0 = λ s(u0)` for `λ ∈ [0, 1/γ]`, which keeps every `f_i(u(t)) <= f_i(u0)`
/// under the damping hypothesis.
pub fn default_initial_velocity(
    obj: &VectorObjective,
    u0: &[f64],
    lambda: f64,
    damping: f64,
) -> Result<Vec<f64>, DynamicsError> {
    if !(damping > 0.0 && damping.is_finite()) {
        return Err(DynamicsError::InvalidParams(format!(
            "damping must be positive, got {damping}"
        )));
    }
    let hi = 1.0 / damping;
    if !(0.0..=hi).contains(&lambda) {
        return Err(DynamicsError::InvalidInput(format!(
            "lambda = {lambda} is outside the admissible interval [0, {hi}] = [0, 1/gamma]"
        )));
    }
    let grads = obj.gradients(u0)?;
    let s = steepest_from_gradients(grads.clone(), DEFAULT_TOL)?;
    let v0 = scale(&s.direction, lambda);
    let vv = norm_sq(&v0);
    for (i, g) in grads.iter().enumerate() {
        let excess = dot(g, &v0) + damping * vv;
        if excess > 1e-9 {
            return Err(DynamicsError::InvalidInput(format!(
                "initial velocity violates <grad f{}, v0> <= -gamma |v0|^2 by {excess:e}",
                i + 1
            )));
        }
    }
    Ok(v0)
}

/// Integrates from `initial` until the stop rule fires.
///
/// Under [`Scheme::Mog`] the recorded velocity is `s(u_n)`, the velocity of
/// the first-order flow, and `initial.v` is ignored.
pub fn integrate(
    obj: &VectorObjective,
    p: &DynParams,
    initial: &DynState,
    stop: &StopRule,
    scheme: Scheme,
) -> Result<Trajectory, DynamicsError> {
    p.validate()?;
    check_state(obj, initial)?;
    if stop.max_steps == 0 {
        return Err(DynamicsError::InvalidInput(
            "max_steps must be at least 1".into(),
        ));
    }
    if stop.crit_tol.is_nan() || stop.crit_tol <= 0.0 || stop.vel_tol.is_nan() || stop.vel_tol < 0.0
    {
        return Err(DynamicsError::InvalidInput(
            "crit_tol must be positive and vel_tol nonnegative".into(),
        ));
    }

    let mut states = Vec::new();
    let mut diagnostics = Vec::new();
    let mut state = DynState {
        t: p.t0,
        ..initial.clone()
    };
    let mut n = 0usize;
    let stop_reason = loop {
        let values = obj.values(&state.u)?;
        let grads = obj.gradients(&state.u)?;
        let s = steepest_from_gradients(grads.clone(), DEFAULT_TOL)?;
        if scheme == Scheme::Mog {
            state.v = s.direction.clone();
        }
        let energies = energy_from_parts(values.as_slice(), &grads, p, &state.v);
        let vnorm = norm(&state.v);
        let snorm = s.norm;
        diagnostics.push(StepDiagnostics {
            values,
            energies,
            snorm,
            weights: s.weights,
        });

        if snorm <= stop.crit_tol && vnorm <= stop.vel_tol {
            states.push(state);
            break StopReason::Criticality;
        }
        if n == stop.max_steps {
            states.push(state);
            break StopReason::MaxSteps;
        }

        let next = match scheme {
            Scheme::Imog => advance_inertial(p, &state, &s.direction),
            Scheme::Mog => {
                let u: Vec<f64> = state
                    .u
                    .iter()
                    .zip(&s.direction)
                    .map(|(u, s)| u + p.step * s)
                    .collect();
                let next = DynState {
                    t: state.t + p.step,
                    u,
                    v: s.direction,
                };
                check_finite(&next).map(|_| next)
            }
        };
        states.push(state);
        match next {
            Ok(mut next) => {
                n += 1;
                next.t = p.t0 + n as f64 * p.step;
                state = next;
            }
            Err(DynamicsError::Divergence { .. }) => break StopReason::Divergence,
            Err(e) => return Err(e),
        }
    };

    Ok(Trajectory {
        params: *p,
        scheme,
        states,
        diagnostics,
        stop_reason,
    })
}

/// `|u^(h)(T) - u^(h/2)(T)|` with `T = n_steps · h`, for the inertial scheme.
pub fn step_halving_error(
    obj: &VectorObjective,
    p: &DynParams,
    initial: &DynState,
    n_steps: usize,
) -> Result<f64, DynamicsError> {
    if n_steps == 0 || !n_steps.is_multiple_of(2) {
        return Err(DynamicsError::InvalidInput(format!(
            "n_steps must be positive and even, got {n_steps}"
        )));
    }
    p.validate()?;
    check_state(obj, initial)?;
    let run = |params: &DynParams, steps: usize| -> Result<DynState, DynamicsError> {
        let mut state = initial.clone();
        for _ in 0..steps {
            state = imog_step(obj, params, &state)?;
        }
        Ok(state)
    };
    let coarse = run(p, n_steps)?;
    let fine = run(&p.with_step(p.step / 2.0), 2 * n_steps)?;
    Ok(dist(&coarse.u, &fine.u))
}
