//! JSON problem definitions:
//!
//! ```json
//! {"dim": 2, "objectives": [
//!     {"name": "f1", "expr": "0.5*(x0^2 + x1^2)", "grad": ["x0", "x1"], "lipschitz": 1},
//!     {"name": "f2", "builtin": "quadratic_linear.f2"}
//! ]}
//! ```
//!
//! Each objective has exactly one of `expr` or `builtin`. Expressions without
//! `grad` are differentiated by central differences. A supplied `grad` is
//! compared against finite differences at load time and the outcome kept in
//! [`VectorObjective::gradient_checks`].

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::builtin::builtin_component;
use super::expr::{
    default_fd_step, finite_diff_gradient, parse_expression_in, ExpressionObjective,
};
use super::{
    Component, GradientCheck, GradientSource, ObjectiveError, ScalarObjective, VectorObjective,
};

const GRADIENT_CHECK_POINTS: usize = 10;
const GRADIENT_CHECK_RTOL: f64 = 1e-4;
const GRADIENT_CHECK_SEED: u64 = 0x5_eed0_f9ad;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSpec {
    dim: usize,
    objectives: Vec<ObjectiveSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectiveSpec {
    name: String,
    #[serde(default)]
    expr: Option<String>,
    #[serde(default)]
    builtin: Option<String>,
    #[serde(default)]
    grad: Option<Vec<String>>,
    #[serde(default)]
    lipschitz: Option<f64>,
}

/// A scalar objective defined by an expression, with an optional analytic gradient.
#[derive(Debug, Clone)]
pub struct ExpressionFunction {
    label: String,
    expr: ExpressionObjective,
    grad: Option<Vec<ExpressionObjective>>,
}

impl ExpressionFunction {
    fn eval_err(&self, source: super::expr::EvalError) -> ObjectiveError {
        ObjectiveError::Eval {
            label: self.label.clone(),
            source,
        }
    }

    fn fd_gradient(&self, u: &[f64]) -> Result<Vec<f64>, ObjectiveError> {
        finite_diff_gradient(&self.expr, u, default_fd_step(u)).map_err(|e| self.eval_err(e))
    }
}

impl ScalarObjective for ExpressionFunction {
    fn value(&self, u: &[f64]) -> Result<f64, ObjectiveError> {
        self.expr.eval(u).map_err(|e| self.eval_err(e))
    }

    fn gradient(&self, u: &[f64]) -> Result<Vec<f64>, ObjectiveError> {
        match &self.grad {
            Some(g) => g
                .iter()
                .map(|e| e.eval(u).map_err(|err| self.eval_err(err)))
                .collect(),
            None => self.fd_gradient(u),
        }
    }
}

pub fn load_problem_file(path: &Path) -> Result<VectorObjective, ObjectiveError> {
    let text = std::fs::read_to_string(path).map_err(|source| ObjectiveError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_problem_json(&text).map_err(|e| match e {
        ObjectiveError::ProblemFile { message, .. } => ObjectiveError::ProblemFile {
            path: path.display().to_string(),
            message,
        },
        other => other,
    })
}

pub fn parse_problem_json(text: &str) -> Result<VectorObjective, ObjectiveError> {
    let file_err = |message: String| ObjectiveError::ProblemFile {
        path: "<problem>".into(),
        message,
    };
    let spec: ProblemSpec = serde_json::from_str(text).map_err(|e| file_err(e.to_string()))?;
    if spec.dim == 0 {
        return Err(file_err("dim must be at least 1".into()));
    }
    if spec.objectives.is_empty() {
        return Err(file_err("objectives must not be empty".into()));
    }

    let mut components = Vec::with_capacity(spec.objectives.len());
    let mut checks = Vec::new();
    for (i, o) in spec.objectives.into_iter().enumerate() {
        let at = format!("objectives[{i}]");
        let mut component = match (o.expr, o.builtin) {
            (Some(source), None) => {
                let parse = |s: &str, ctx: String| {
                    parse_expression_in(s, spec.dim).map_err(|source| ObjectiveError::Parse {
                        context: ctx,
                        source,
                    })
                };
                let expr = parse(&source, format!("{at}.expr"))?;
                let grad = match o.grad {
                    None => None,
                    Some(g) if g.len() != spec.dim => {
                        return Err(file_err(format!(
                            "{at}.grad has {} entries, expected {}",
                            g.len(),
                            spec.dim
                        )))
                    }
                    Some(g) => Some(
                        g.iter()
                            .enumerate()
                            .map(|(k, s)| parse(s, format!("{at}.grad[{k}]")))
                            .collect::<Result<Vec<_>, _>>()?,
                    ),
                };
                let source_kind = if grad.is_some() {
                    GradientSource::Analytic
                } else {
                    GradientSource::FiniteDifference
                };
                let f = ExpressionFunction {
                    label: o.name.clone(),
                    expr,
                    grad,
                };
                if f.grad.is_some() {
                    checks.push(check_gradient(&f, spec.dim));
                }
                Component {
                    label: o.name,
                    function: Arc::new(f),
                    lipschitz: None,
                    gradient_source: source_kind,
                }
            }
            (None, Some(name)) => {
                if o.grad.is_some() {
                    return Err(file_err(format!("{at}: grad is only allowed with expr")));
                }
                if spec.dim != 2 {
                    return Err(file_err(format!(
                        "{at}: builtin objectives are two-dimensional, dim is {}",
                        spec.dim
                    )));
                }
                let mut c = builtin_component(&name)?;
                c.label = o.name;
                c
            }
            _ => {
                return Err(file_err(format!(
                    "{at}: exactly one of expr or builtin is required"
                )))
            }
        };
        if let Some(l) = o.lipschitz {
            component.lipschitz = Some(l);
        }
        components.push(component);
    }
    Ok(VectorObjective::new(spec.dim, components)?.with_gradient_checks(checks))
}

/// Compares the supplied gradient with central differences at seeded points in `[-2, 2]^d`.
fn check_gradient(f: &ExpressionFunction, dim: usize) -> GradientCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(GRADIENT_CHECK_SEED);
    let mut max_rel = 0.0f64;
    let mut checked = 0;
    // points where either gradient is undefined are skipped, up to a budget
    for _ in 0..GRADIENT_CHECK_POINTS * 10 {
        if checked == GRADIENT_CHECK_POINTS {
            break;
        }
        let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let (Ok(analytic), Ok(numeric)) = (f.gradient(&u), f.fd_gradient(&u)) else {
            continue;
        };
        for (a, n) in analytic.iter().zip(&numeric) {
            let rel = (a - n).abs() / a.abs().max(n.abs()).max(1.0);
            max_rel = max_rel.max(rel);
        }
        checked += 1;
    }
    GradientCheck {
        label: f.label.clone(),
        points_checked: checked,
        max_rel_error: max_rel,
        passed: checked > 0 && max_rel <= GRADIENT_CHECK_RTOL,
    }
}
