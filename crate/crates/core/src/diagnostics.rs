//! Lyapunov energies, the damping hypothesis and trajectory reports.
//!
//! Per objective the energy is
//!
//! ```text
//! E_i = f_i(u) + (m/γ) <∇f_i(u), u'> + m |u'|²
//! ```
//!
//! and it is nonincreasing in continuous time when `γ² > m L_i`, with `L_i`
//! a Lipschitz constant of `∇f_i` along the trajectory. The derivative of
//! `f_i ∘ u` is taken as `<∇f_i(u_n), v_n>`, not by differencing.

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{DynParams, DynState, StopReason, Trajectory};
use crate::minnorm::DEFAULT_TOL;
use crate::objectives::{steepest_descent, BuiltinProblem, ObjectiveError, VectorObjective};
use crate::vecops::{dist, dot, norm, norm_sq};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error(
        "no Lipschitz bound for {label}: supply \"lipschitz\" in the problem file or run a trajectory to estimate it"
    )]
    MissingLipschitz { label: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EnergyVector(Vec<f64>);

impl EnergyVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn energy(
    obj: &VectorObjective,
    p: &DynParams,
    state: &DynState,
) -> Result<EnergyVector, ObjectiveError> {
    let values = obj.values(&state.u)?;
    let grads = obj.gradients(&state.u)?;
    if state.v.len() != obj.dim() {
        return Err(ObjectiveError::DimensionMismatch {
            expected: obj.dim(),
            got: state.v.len(),
        });
    }
    Ok(energy_from_parts(values.as_slice(), &grads, p, &state.v))
}

pub(crate) fn energy_from_parts(
    values: &[f64],
    grads: &[Vec<f64>],
    p: &DynParams,
    v: &[f64],
) -> EnergyVector {
    let kinetic = p.mass * norm_sq(v);
    let ratio = p.mass / p.damping;
    EnergyVector(
        values
            .iter()
            .zip(grads)
            .map(|(f, g)| f + ratio * dot(g, v) + kinetic)
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LipschitzKind {
    /// Supplied global bound.
    Bound,
    /// Largest difference quotient of the gradient along a trajectory.
    Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HpEntry {
    pub label: String,
    pub lipschitz: f64,
    pub kind: LipschitzKind,
    /// `γ² - m L_i`.
    pub margin: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HpReport {
    pub entries: Vec<HpEntry>,
}

impl HpReport {
    pub fn all_satisfied(&self) -> bool {
        self.entries.iter().all(|e| e.satisfied)
    }

    pub fn margins(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.margin).collect()
    }
}

/// `max_n |∇f_i(u_{n+1}) - ∇f_i(u_n)| / |u_{n+1} - u_n|` for every objective.
pub fn estimate_lipschitz(
    obj: &VectorObjective,
    trajectory: &Trajectory,
) -> Result<Vec<f64>, ObjectiveError> {
    let mut est = vec![0.0f64; obj.count()];
    let mut prev: Option<(&[f64], Vec<Vec<f64>>)> = None;
    for state in &trajectory.states {
        let grads = obj.gradients(&state.u)?;
        if let Some((u_prev, g_prev)) = &prev {
            let du = dist(&state.u, u_prev);
            if du > 0.0 {
                for (e, (g, gp)) in est.iter_mut().zip(grads.iter().zip(g_prev)) {
                    *e = e.max(dist(g, gp) / du);
                }
            }
        }
        prev = Some((&state.u, grads));
    }
    Ok(est)
}

/// Margins `γ² - m L_i`, preferring supplied bounds and falling back to
/// estimates along `trajectory`.
pub fn hp_report(
    obj: &VectorObjective,
    p: &DynParams,
    trajectory: Option<&Trajectory>,
) -> Result<HpReport, DiagnosticsError> {
    let estimates = match trajectory {
        Some(t) if obj.lipschitz_bounds().iter().any(Option::is_none) => {
            Some(estimate_lipschitz(obj, t)?)
        }
        _ => None,
    };
    let entries = obj
        .components()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (lipschitz, kind) = match (c.lipschitz, &estimates) {
                (Some(l), _) => (l, LipschitzKind::Bound),
                (None, Some(est)) => (est[i], LipschitzKind::Estimate),
                (None, None) => {
                    return Err(DiagnosticsError::MissingLipschitz {
                        label: c.label.clone(),
                    })
                }
            };
            let margin = p.damping * p.damping - p.mass * lipschitz;
            Ok(HpEntry {
                label: c.label.clone(),
                lipschitz,
                kind,
                margin,
                satisfied: margin > 0.0,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HpReport { entries })
}

/// `E_i(t0) + (f_i(u0) - E_i(t0)) exp(-(γ/m)(t - t0))`.
pub fn upper_bound_envelope(energy_t0: f64, value_u0: f64, p: &DynParams, t: f64) -> f64 {
    energy_t0 + (value_u0 - energy_t0) * (-(p.damping / p.mass) * (t - p.t0)).exp()
}

/// Euclidean distance to the analytic Pareto set of a builtin problem.
pub fn distance_to_pareto(name: &str, u: &[f64]) -> Result<f64, ObjectiveError> {
    let problem: BuiltinProblem = name.parse()?;
    let &[x, y] = u else {
        return Err(ObjectiveError::DimensionMismatch {
            expected: 2,
            got: u.len(),
        });
    };
    let dx = match problem {
        BuiltinProblem::Biquadratic => (x.abs() - 1.0).max(0.0),
        BuiltinProblem::QuadraticLinear => x.max(0.0),
        BuiltinProblem::HbfQuadratic => x.abs(),
    };
    Ok(dx.hypot(y))
}

/// Number of strict sign flips in a series, ignoring exact zeros.
pub fn sign_changes(series: impl IntoIterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for x in series {
        if x == 0.0 {
            continue;
        }
        if last != 0.0 && (x > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = x;
    }
    count
}

/// Sign changes of coordinate `axis` of the position.
pub fn coordinate_sign_changes(trajectory: &Trajectory, axis: usize) -> usize {
    sign_changes(trajectory.states.iter().map(|s| s.u[axis]))
}

/// Sign changes of the displacement `u_n - u_{n-1}` along coordinate `axis`.
pub fn displacement_sign_changes(trajectory: &Trajectory, axis: usize) -> usize {
    sign_changes(
        trajectory
            .states
            .windows(2)
            .map(|w| w[1].u[axis] - w[0].u[axis]),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryReport {
    pub stop_reason: StopReason,
    pub steps: usize,
    /// `max_{n,i} (E_i(t_{n+1}) - E_i(t_n))⁺`.
    pub energy_monotone_violation: f64,
    /// `Σ_n (E_i(t_{n+1}) - E_i(t_n))⁺` per objective.
    pub energy_cumulative_increase: Vec<f64>,
    /// `max_{n,i} (f_i(u_n) - envelope_i(t_n))⁺`.
    pub envelope_violation: f64,
    pub terminal_snorm: f64,
    pub terminal_vnorm: f64,
    /// `|m a_n + γ v_n - s(u_n)|` at the last step, `a_n = (v_{n+1} - v_n)/h`.
    pub terminal_residual: f64,
    /// Mean of the last 1% of each `f_i` series.
    pub value_limits: Vec<f64>,
    /// `max - min` of each `f_i` over the last 10% of the run.
    pub value_spread: Vec<f64>,
    /// Sign changes of the displacement along the last coordinate.
    pub oscillation_count: usize,
    /// Damping hypothesis, from supplied bounds or estimated along this run.
    pub hp: HpReport,
    /// Whether the energy checks above are backed by the damping hypothesis.
    pub dissipation_expected: bool,
    pub pareto_distance: Option<f64>,
}

fn tail(len: usize, fraction: f64) -> usize {
    ((len as f64 * fraction).ceil() as usize).clamp(1, len)
}

/// Summarizes a trajectory: energy monotonicity, the value envelope, terminal
/// norms and value limits. `pareto_oracle` maps a point to its distance from
/// the known Pareto set, when there is one.
pub fn analyze(
    trajectory: &Trajectory,
    obj: &VectorObjective,
    pareto_oracle: Option<&dyn Fn(&[f64]) -> f64>,
) -> Result<TrajectoryReport, DiagnosticsError> {
    let states = &trajectory.states;
    let diags = &trajectory.diagnostics;
    if states.is_empty() || states.len() != diags.len() {
        return Err(DiagnosticsError::InvalidInput(
            "trajectory must hold at least one state and one diagnostic per state".into(),
        ));
    }
    let p = &trajectory.params;
    let q = diags[0].values.len();

    let mut cumulative = vec![0.0; q];
    let mut monotone = 0.0f64;
    for w in diags.windows(2) {
        for i in 0..q {
            let inc = (w[1].energies.as_slice()[i] - w[0].energies.as_slice()[i]).max(0.0);
            cumulative[i] += inc;
            monotone = monotone.max(inc);
        }
    }

    let e0 = diags[0].energies.as_slice();
    let f0 = diags[0].values.as_slice();
    let mut envelope = 0.0f64;
    for (s, d) in states.iter().zip(diags) {
        for i in 0..q {
            let bound = upper_bound_envelope(e0[i], f0[i], p, s.t);
            envelope = envelope.max(d.values.as_slice()[i] - bound);
        }
    }

    let last = trajectory.last_state();
    let terminal_residual = if states.len() >= 2 {
        let prev = &states[states.len() - 2];
        let s = steepest_descent(obj, &prev.u, DEFAULT_TOL)?;
        let r: Vec<f64> = (0..prev.v.len())
            .map(|k| {
                let a = (last.v[k] - prev.v[k]) / p.step;
                p.mass * a + p.damping * prev.v[k] - s.direction[k]
            })
            .collect();
        norm(&r)
    } else {
        0.0
    };

    let n1 = tail(diags.len(), 0.01);
    let value_limits = (0..q)
        .map(|i| {
            diags[diags.len() - n1..]
                .iter()
                .map(|d| d.values.as_slice()[i])
                .sum::<f64>()
                / n1 as f64
        })
        .collect();
    let n10 = tail(diags.len(), 0.10);
    let value_spread = (0..q)
        .map(|i| {
            let window = diags[diags.len() - n10..]
                .iter()
                .map(|d| d.values.as_slice()[i]);
            let (lo, hi) = window.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            });
            hi - lo
        })
        .collect();

    let hp = hp_report(obj, p, Some(trajectory))?;
    let dissipation_expected = hp.all_satisfied();

    Ok(TrajectoryReport {
        stop_reason: trajectory.stop_reason,
        steps: trajectory.steps(),
        energy_monotone_violation: monotone,
        energy_cumulative_increase: cumulative,
        envelope_violation: envelope.max(0.0),
        terminal_snorm: trajectory.last_diagnostics().snorm,
        terminal_vnorm: norm(&last.v),
        terminal_residual,
        value_limits,
        value_spread,
        oscillation_count: displacement_sign_changes(trajectory, trajectory.dim() - 1),
        hp,
        dissipation_expected,
        pareto_distance: pareto_oracle.map(|f| f(&last.u)),
    })
}
