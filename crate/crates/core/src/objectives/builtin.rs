//! Builtin benchmark problems with known Pareto sets.

use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{Component, GradientSource, ObjectiveError, ScalarObjective, VectorObjective};

/// `½ (u - a)ᵀ Q (u - a)` with `Q` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    center: Vec<f64>,
    /// Row-major `d × d`.
    matrix: Vec<f64>,
}

impl Quadratic {
    pub fn new(center: Vec<f64>, matrix: &[Vec<f64>]) -> Result<Self, ObjectiveError> {
        let d = center.len();
        if d == 0 {
            return Err(ObjectiveError::InvalidInput(
                "empty quadratic center".into(),
            ));
        }
        if matrix.len() != d || matrix.iter().any(|row| row.len() != d) {
            return Err(ObjectiveError::InvalidInput(format!(
                "quadratic matrix must be {d}x{d}"
            )));
        }
        let flat: Vec<f64> = matrix.iter().flatten().copied().collect();
        if flat.iter().chain(&center).any(|x| !x.is_finite()) {
            return Err(ObjectiveError::InvalidInput(
                "non-finite quadratic data".into(),
            ));
        }
        let scale = flat.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for i in 0..d {
            for j in 0..i {
                if (flat[i * d + j] - flat[j * d + i]).abs() > 1e-12 * scale {
                    return Err(ObjectiveError::InvalidInput(
                        "quadratic matrix must be symmetric".into(),
                    ));
                }
            }
        }
        let q = Self {
            center,
            matrix: flat,
        };
        let (lo, _) = q.eigen_range();
        if lo < -1e-10 * scale {
            return Err(ObjectiveError::InvalidInput(format!(
                "quadratic matrix must be positive semidefinite (smallest eigenvalue {lo})"
            )));
        }
        Ok(q)
    }

    fn dim(&self) -> usize {
        self.center.len()
    }

    fn eigen_range(&self) -> (f64, f64) {
        let d = self.dim();
        let m = DMatrix::from_row_slice(d, d, &self.matrix);
        let eig = SymmetricEigen::new(m).eigenvalues;
        (eig.min(), eig.max())
    }

    /// Spectral norm of `Q`, the exact Lipschitz constant of the gradient.
    pub fn spectral_norm(&self) -> f64 {
        let (lo, hi) = self.eigen_range();
        hi.max(-lo)
    }

    fn residual(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.center).map(|(x, a)| x - a).collect()
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                self.matrix[i * d..(i + 1) * d]
                    .iter()
                    .zip(r)
                    .map(|(q, x)| q * x)
                    .sum()
            })
            .collect()
    }
}

impl ScalarObjective for Quadratic {
    fn value(&self, u: &[f64]) -> Result<f64, ObjectiveError> {
        let r = self.residual(u);
        let qr = self.apply(&r);
        Ok(0.5 * r.iter().zip(&qr).map(|(a, b)| a * b).sum::<f64>())
    }

    fn gradient(&self, u: &[f64]) -> Result<Vec<f64>, ObjectiveError> {
        Ok(self.apply(&self.residual(u)))
    }
}

/// `<c, u> + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    coeffs: Vec<f64>,
    offset: f64,
}

impl Linear {
    pub fn new(coeffs: Vec<f64>, offset: f64) -> Self {
        Self { coeffs, offset }
    }
}

impl ScalarObjective for Linear {
    fn value(&self, u: &[f64]) -> Result<f64, ObjectiveError> {
        Ok(self.offset + self.coeffs.iter().zip(u).map(|(c, x)| c * x).sum::<f64>())
    }

    fn gradient(&self, _u: &[f64]) -> Result<Vec<f64>, ObjectiveError> {
        Ok(self.coeffs.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinProblem {
    /// `f1 = ½(x+1)² + ½y²`, `f2 = ½(x-1)² + ½y²`.
    Biquadratic,
    /// `f1 = ½(x² + y²)`, `f2 = x`.
    QuadraticLinear,
    /// Single objective `½(x² + 2y²)`.
    HbfQuadratic,
}

impl BuiltinProblem {
    pub const ALL: [BuiltinProblem; 3] = [
        BuiltinProblem::Biquadratic,
        BuiltinProblem::QuadraticLinear,
        BuiltinProblem::HbfQuadratic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinProblem::Biquadratic => "biquadratic",
            BuiltinProblem::QuadraticLinear => "quadratic_linear",
            BuiltinProblem::HbfQuadratic => "hbf_quadratic",
        }
    }

    /// Human-readable description of the Pareto set.
    pub fn pareto_set(self) -> &'static str {
        match self {
            BuiltinProblem::Biquadratic => "[−1,1]×{0}",
            BuiltinProblem::QuadraticLinear => "(−∞,0]×{0}",
            BuiltinProblem::HbfQuadratic => "{(0,0)}",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            BuiltinProblem::Biquadratic => "f1 = ½(x+1)² + ½y², f2 = ½(x−1)² + ½y²",
            BuiltinProblem::QuadraticLinear => "f1 = ½(x² + y²), f2 = x",
            BuiltinProblem::HbfQuadratic => "f = ½(x² + 2y²)",
        }
    }

    pub fn objective(self) -> VectorObjective {
        let components = self
            .component_names()
            .iter()
            .map(|n| builtin_component(n).expect("builtin component names are valid"))
            .collect();
        VectorObjective::new(2, components).expect("builtin problems are well formed")
    }

    fn component_names(self) -> &'static [&'static str] {
        match self {
            BuiltinProblem::Biquadratic => &["biquadratic.f1", "biquadratic.f2"],
            BuiltinProblem::QuadraticLinear => &["quadratic_linear.f1", "quadratic_linear.f2"],
            BuiltinProblem::HbfQuadratic => &["hbf_quadratic.f1"],
        }
    }
}

impl FromStr for BuiltinProblem {
    type Err = ObjectiveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BuiltinProblem::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| ObjectiveError::NotFound(s.to_string()))
    }
}

/// Builtin scalar objectives on `ℝ²`, addressable as `<problem>.f<i>` in
/// problem files.
pub fn builtin_component(name: &str) -> Result<Component, ObjectiveError> {
    let eye = [vec![1.0, 0.0], vec![0.0, 1.0]];
    let (function, lipschitz): (Arc<dyn ScalarObjective>, f64) = match name {
        "biquadratic.f1" => (Arc::new(Quadratic::new(vec![-1.0, 0.0], &eye)?), 1.0),
        "biquadratic.f2" => (Arc::new(Quadratic::new(vec![1.0, 0.0], &eye)?), 1.0),
        "quadratic_linear.f1" => (Arc::new(Quadratic::new(vec![0.0, 0.0], &eye)?), 1.0),
        "quadratic_linear.f2" => (Arc::new(Linear::new(vec![1.0, 0.0], 0.0)), 0.0),
        "hbf_quadratic.f1" => (
            Arc::new(Quadratic::new(
                vec![0.0, 0.0],
                &[vec![1.0, 0.0], vec![0.0, 2.0]],
            )?),
            2.0,
        ),
        _ => return Err(ObjectiveError::NotFound(name.to_string())),
    };
    Ok(Component {
        label: name.rsplit('.').next().unwrap_or(name).to_string(),
        function,
        lipschitz: Some(lipschitz),
        gradient_source: GradientSource::Analytic,
    })
}

/// Looks up a builtin problem by name.
///
/// `convex_quadratic` needs centers and matrices; build it with
/// [`convex_quadratic`] instead.
pub fn builtin_problem(name: &str) -> Result<VectorObjective, ObjectiveError> {
    if name == "convex_quadratic" {
        return Err(ObjectiveError::InvalidInput(
            "convex_quadratic needs centers and matrices; use convex_quadratic()".into(),
        ));
    }
    Ok(name.parse::<BuiltinProblem>()?.objective())
}

/// `f_i(u) = ½ (u - a_i)ᵀ Q_i (u - a_i)`, with `L_i = |Q_i|₂`.
pub fn convex_quadratic(
    centers: &[Vec<f64>],
    matrices: &[Vec<Vec<f64>>],
) -> Result<VectorObjective, ObjectiveError> {
    if centers.len() != matrices.len() {
        return Err(ObjectiveError::InvalidInput(format!(
            "{} centers but {} matrices",
            centers.len(),
            matrices.len()
        )));
    }
    let dim = centers.first().map_or(0, Vec::len);
    let components = centers
        .iter()
        .zip(matrices)
        .enumerate()
        .map(|(i, (a, q))| {
            if a.len() != dim {
                return Err(ObjectiveError::DimensionMismatch {
                    expected: dim,
                    got: a.len(),
                });
            }
            let quad = Quadratic::new(a.clone(), q)?;
            Ok(Component {
                label: format!("f{}", i + 1),
                lipschitz: Some(quad.spectral_norm()),
                function: Arc::new(quad),
                gradient_source: GradientSource::Analytic,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    VectorObjective::new(dim, components)
}

/// Closed-form steepest field of the two-objective builtin problems.
pub fn analytic_steepest(name: &str, u: &[f64]) -> Result<Vec<f64>, ObjectiveError> {
    let problem: BuiltinProblem = name.parse()?;
    let &[x, y] = u else {
        return Err(ObjectiveError::DimensionMismatch {
            expected: 2,
            got: u.len(),
        });
    };
    match problem {
        BuiltinProblem::Biquadratic => Ok(if x > 1.0 {
            vec![-(x - 1.0), -y]
        } else if x >= -1.0 {
            vec![0.0, -y]
        } else {
            vec![-(x + 1.0), -y]
        }),
        BuiltinProblem::QuadraticLinear => Ok(if x >= 1.0 {
            vec![-1.0, 0.0]
        } else if (x - 0.5).powi(2) + y * y <= 0.25 {
            vec![-x, -y]
        } else {
            let c = -1.0 / ((x - 1.0).powi(2) + y * y);
            vec![c * y * y, c * y * (1.0 - x)]
        }),
        BuiltinProblem::HbfQuadratic => Err(ObjectiveError::InvalidInput(
            "analytic field is only tabulated for biquadratic and quadratic_linear".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minnorm::DEFAULT_TOL;
    use crate::objectives::steepest_descent;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn biquadratic_gradients_at_origin() {
        let p = builtin_problem("biquadratic").unwrap();
        assert_eq!(
            p.gradients(&[0.0, 0.0]).unwrap(),
            vec![vec![1.0, 0.0], vec![-1.0, 0.0]]
        );
        assert_eq!(p.lipschitz_bounds(), vec![Some(1.0), Some(1.0)]);
        assert_eq!(p.values(&[0.0, 0.0]).unwrap().as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn quadratic_linear_second_gradient_is_constant() {
        let p = builtin_problem("quadratic_linear").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let u = [rng.gen_range(-9.0..9.0), rng.gen_range(-9.0..9.0)];
            assert_eq!(p.gradients(&u).unwrap()[1], vec![1.0, 0.0]);
            assert_eq!(p.values(&u).unwrap().as_slice()[1], u[0]);
        }
        assert_eq!(p.lipschitz_bounds(), vec![Some(1.0), Some(0.0)]);
    }

    #[test]
    fn convex_quadratic_identity_gradient() {
        let p = convex_quadratic(
            &[vec![0.0, 0.0, 0.0]],
            &[vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ]],
        )
        .unwrap();
        assert_eq!(
            p.gradients(&[1.0, -2.0, 3.0]).unwrap()[0],
            vec![1.0, -2.0, 3.0]
        );
        assert!((p.lipschitz_bounds()[0].unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn convex_quadratic_lipschitz_is_spectral_norm() {
        let p =
            convex_quadratic(&[vec![1.0, 2.0]], &[vec![vec![2.0, 1.0], vec![1.0, 2.0]]]).unwrap();
        assert!((p.lipschitz_bounds()[0].unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn convex_quadratic_rejects_bad_matrices() {
        let c = [vec![0.0, 0.0]];
        assert!(convex_quadratic(&c, &[vec![vec![1.0, 2.0], vec![0.0, 1.0]]]).is_err());
        assert!(convex_quadratic(&c, &[vec![vec![-1.0, 0.0], vec![0.0, 1.0]]]).is_err());
        assert!(convex_quadratic(&c, &[vec![vec![1.0, 0.0]]]).is_err());
        assert!(convex_quadratic(&c, &[]).is_err());
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(
            builtin_problem("zdt1"),
            Err(ObjectiveError::NotFound(_))
        ));
        assert!(builtin_problem("convex_quadratic").is_err());
        assert!(matches!(
            analytic_steepest("zdt1", &[0.0, 0.0]),
            Err(ObjectiveError::NotFound(_))
        ));
        assert!(builtin_component("biquadratic.f3").is_err());
    }

    #[test]
    fn analytic_field_examples() {
        assert_eq!(
            analytic_steepest("biquadratic", &[-3.0, 2.0]).unwrap(),
            vec![2.0, -2.0]
        );
        assert_eq!(
            analytic_steepest("quadratic_linear", &[0.0, 1.0]).unwrap(),
            vec![-0.5, -0.5]
        );
        assert_eq!(
            analytic_steepest("quadratic_linear", &[0.5, 0.0]).unwrap(),
            vec![-0.5, 0.0]
        );
        assert_eq!(
            analytic_steepest("biquadratic", &[2.0, 1.0]).unwrap(),
            vec![-1.0, -1.0]
        );
        assert_eq!(
            analytic_steepest("quadratic_linear", &[2.0, 5.0]).unwrap(),
            vec![-1.0, 0.0]
        );
    }

    #[test]
    fn numerical_field_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for name in ["biquadratic", "quadratic_linear"] {
            let p = builtin_problem(name).unwrap();
            for _ in 0..1000 {
                let u = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
                let s = steepest_descent(&p, &u, DEFAULT_TOL).unwrap();
                let a = analytic_steepest(name, &u).unwrap();
                for (x, y) in s.direction.iter().zip(&a) {
                    assert!(
                        (x - y).abs() <= 1e-8,
                        "{name} at {u:?}: {:?} vs {a:?}",
                        s.direction
                    );
                }
            }
        }
    }
}
