//! Vector objectives `F = (f_1, …, f_q)` and the steepest common-descent field.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::minnorm::{self, GradientBundle, MinNormError, SimplexWeights};
use crate::vecops::{all_finite, dot, neg, norm};

pub mod builtin;
pub mod expr;
pub mod pareto;
pub mod problem_file;

pub use builtin::{analytic_steepest, builtin_problem, convex_quadratic, BuiltinProblem};
pub use pareto::{dominates, pareto_filter, strictly_dominates_weak, FilterMode};
pub use problem_file::{load_problem_file, parse_problem_json};

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unknown problem '{0}'")]
    NotFound(String),
    #[error("expected a point of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{context}: {source}")]
    Parse {
        context: String,
        #[source]
        source: expr::ParseError,
    },
    #[error("evaluating {label}: {source}")]
    Eval {
        label: String,
        #[source]
        source: expr::EvalError,
    },
    #[error("{label} returned a non-finite {what}")]
    NonFinite { label: String, what: &'static str },
    #[error("steepest direction vanishes at a Pareto critical point")]
    CriticalPoint,
    #[error(transparent)]
    MinNorm(#[from] MinNormError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    ProblemFile { path: String, message: String },
}

/// A smooth scalar function on `ℝ^d` with its gradient.
pub trait ScalarObjective: Send + Sync + fmt::Debug {
    fn value(&self, u: &[f64]) -> Result<f64, ObjectiveError>;
    fn gradient(&self, u: &[f64]) -> Result<Vec<f64>, ObjectiveError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientSource {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone)]
pub struct Component {
    pub label: String,
    pub function: Arc<dyn ScalarObjective>,
    /// Global bound on the Lipschitz constant of the gradient.
    pub lipschitz: Option<f64>,
    pub gradient_source: GradientSource,
}

/// Load-time comparison of a supplied gradient against finite differences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientCheck {
    pub label: String,
    pub points_checked: usize,
    pub max_rel_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct VectorObjective {
    dim: usize,
    components: Vec<Component>,
    gradient_checks: Vec<GradientCheck>,
}

impl VectorObjective {
    pub fn new(dim: usize, components: Vec<Component>) -> Result<Self, ObjectiveError> {
        if dim == 0 {
            return Err(ObjectiveError::InvalidInput(
                "dimension must be at least 1".into(),
            ));
        }
        if components.is_empty() {
            return Err(ObjectiveError::InvalidInput(
                "at least one objective is required".into(),
            ));
        }
        for c in &components {
            if let Some(l) = c.lipschitz {
                if !(l >= 0.0 && l.is_finite()) {
                    return Err(ObjectiveError::InvalidInput(format!(
                        "{}: Lipschitz bound must be finite and nonnegative, got {l}",
                        c.label
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            components,
            gradient_checks: Vec::new(),
        })
    }

    pub(crate) fn with_gradient_checks(mut self, checks: Vec<GradientCheck>) -> Self {
        self.gradient_checks = checks;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of objectives `q`.
    pub fn count(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn labels(&self) -> Vec<&str> {
        self.components.iter().map(|c| c.label.as_str()).collect()
    }

    pub fn lipschitz_bounds(&self) -> Vec<Option<f64>> {
        self.components.iter().map(|c| c.lipschitz).collect()
    }

    pub fn gradient_checks(&self) -> &[GradientCheck] {
        &self.gradient_checks
    }

    pub fn check_point(&self, u: &[f64]) -> Result<(), ObjectiveError> {
        if u.len() != self.dim {
            return Err(ObjectiveError::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        if !all_finite(u) {
            return Err(ObjectiveError::InvalidInput(
                "point has non-finite coordinates".into(),
            ));
        }
        Ok(())
    }

    pub fn values(&self, u: &[f64]) -> Result<ObjectiveVector, ObjectiveError> {
        self.check_point(u)?;
        let values = self
            .components
            .iter()
            .map(|c| {
                let v = c.function.value(u)?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(ObjectiveError::NonFinite {
                        label: c.label.clone(),
                        what: "value",
                    })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ObjectiveVector(values))
    }

    pub fn gradients(&self, u: &[f64]) -> Result<Vec<Vec<f64>>, ObjectiveError> {
        self.check_point(u)?;
        self.components
            .iter()
            .map(|c| {
                let g = c.function.gradient(u)?;
                if g.len() != self.dim {
                    return Err(ObjectiveError::DimensionMismatch {
                        expected: self.dim,
                        got: g.len(),
                    });
                }
                if !all_finite(&g) {
                    return Err(ObjectiveError::NonFinite {
                        label: c.label.clone(),
                        what: "gradient",
                    });
                }
                Ok(g)
            })
            .collect()
    }
}

/// `F(u) = (f_1(u), …, f_q(u))`, all entries finite.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Result<Self, ObjectiveError> {
        if all_finite(&values) {
            Ok(Self(values))
        } else {
            Err(ObjectiveError::InvalidInput(
                "objective values must be finite".into(),
            ))
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteepestResult {
    /// `s(u) = -Σ θ_i ∇f_i(u)`.
    pub direction: Vec<f64>,
    pub weights: SimplexWeights,
    pub norm: f64,
}

/// Steepest common-descent direction `s(u)`, the negated minimum-norm element
/// of `co{∇f_i(u)}`.
///
/// With a single objective this is `-∇f(u)` exactly.
pub fn steepest_descent(
    obj: &VectorObjective,
    u: &[f64],
    tol: f64,
) -> Result<SteepestResult, ObjectiveError> {
    let grads = obj.gradients(u)?;
    steepest_from_gradients(grads, tol)
}

pub(crate) fn steepest_from_gradients(
    mut grads: Vec<Vec<f64>>,
    tol: f64,
) -> Result<SteepestResult, ObjectiveError> {
    if grads.len() == 1 {
        let direction = neg(&grads.pop().unwrap_or_default());
        let norm = norm(&direction);
        return Ok(SteepestResult {
            direction,
            weights: SimplexWeights::vertex(1, 0),
            norm,
        });
    }
    let bundle = GradientBundle::new(grads)?;
    let r = minnorm::min_norm_point(&bundle, tol)?;
    Ok(SteepestResult {
        direction: neg(&r.point),
        weights: r.weights,
        norm: r.norm,
    })
}

/// `|s(u)| <= eps`, i.e. `0 ∈ co{∇f_i(u)}` up to `eps`.
pub fn is_pareto_critical(
    obj: &VectorObjective,
    u: &[f64],
    eps: f64,
) -> Result<bool, ObjectiveError> {
    if !(eps > 0.0) {
        return Err(ObjectiveError::InvalidInput(format!(
            "eps must be positive, got {eps}"
        )));
    }
    Ok(steepest_descent(obj, u, minnorm::DEFAULT_TOL)?.norm <= eps)
}

/// `min_d max_i <∇f_i(u), d>` over the sampled unit directions, minus the same
/// quantity at `d = s(u)/|s(u)|`. Nonnegative when no sample beats `s`.
pub fn steepest_characterization_gap(
    obj: &VectorObjective,
    u: &[f64],
    directions: &[Vec<f64>],
) -> Result<f64, ObjectiveError> {
    let grads = obj.gradients(u)?;
    let s = steepest_from_gradients(grads.clone(), minnorm::DEFAULT_TOL)?;
    if s.norm == 0.0 {
        return Err(ObjectiveError::CriticalPoint);
    }
    let worst = |d: &[f64]| {
        grads
            .iter()
            .map(|g| dot(g, d))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let unit_s: Vec<f64> = s.direction.iter().map(|x| x / s.norm).collect();
    let reference = worst(&unit_s);
    let mut best = f64::INFINITY;
    for d in directions {
        if d.len() != obj.dim() {
            return Err(ObjectiveError::DimensionMismatch {
                expected: obj.dim(),
                got: d.len(),
            });
        }
        if (norm(d) - 1.0).abs() > 1e-9 {
            return Err(ObjectiveError::InvalidInput(
                "sample directions must be unit vectors".into(),
            ));
        }
        best = best.min(worst(d));
    }
    Ok(best - reference)
}
