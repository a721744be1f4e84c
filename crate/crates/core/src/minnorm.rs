//! Minimum-norm point of the convex hull of a finite vector set.
//!
//! The projection of the origin onto `co{g_1, ..., g_q}` is computed with
//! Wolfe's corral algorithm. Bundles of two vectors use the closed form for
//! the projection onto a segment, and a single vector is returned unchanged.
//!
//! Every result carries simplex weights `θ` so that the returned point is
//! exactly `Σ θ_i g_i` as evaluated in floating point.

use thiserror::Error;

use crate::vecops::{all_finite, combine, dot, norm, norm_sq};

/// Default stopping tolerance on the Wolfe duality gap `max_i <p, p - g_i>`.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Absolute tolerance on `Σ θ_i = 1` accepted by [`SimplexWeights::new`].
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

/// Largest bundle size accepted by [`brute_force_min_norm`].
pub const BRUTE_FORCE_MAX_VECTORS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinNormError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("brute-force search supports at most {max} vectors, got {got}")]
    UnsupportedSize { got: usize, max: usize },
}

/// A nonempty list of equal-length, finite vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    vectors: Vec<Vec<f64>>,
}

impl GradientBundle {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self, MinNormError> {
        let Some(first) = vectors.first() else {
            return Err(MinNormError::InvalidInput("empty bundle".into()));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(MinNormError::InvalidInput(
                "zero-dimensional vectors".into(),
            ));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(MinNormError::InvalidInput(format!(
                    "vector {i} has dimension {}, expected {dim}",
                    v.len()
                )));
            }
            if !all_finite(v) {
                return Err(MinNormError::InvalidInput(format!(
                    "vector {i} has non-finite coordinates"
                )));
            }
        }
        Ok(Self { vectors })
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Number of vectors `q`.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }
}

/// Convex coefficients `θ ∈ Δ_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    pub fn new(theta: Vec<f64>) -> Result<Self, MinNormError> {
        if theta.is_empty() {
            return Err(MinNormError::InvalidInput("empty weight vector".into()));
        }
        if theta.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(MinNormError::InvalidInput(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = theta.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(MinNormError::InvalidInput(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self(theta))
    }

    /// The vertex `e_index` of `Δ_len`.
    pub fn vertex(len: usize, index: usize) -> Self {
        let mut theta = vec![0.0; len];
        theta[index] = 1.0;
        Self(theta)
    }

    /// Clamps negatives to zero and rescales onto the simplex.
    fn normalized(mut theta: Vec<f64>) -> Self {
        for t in theta.iter_mut() {
            if *t < 0.0 {
                *t = 0.0;
            }
        }
        let sum: f64 = theta.iter().sum();
        for t in theta.iter_mut() {
            *t /= sum;
        }
        Self(theta)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinNormResult {
    pub point: Vec<f64>,
    pub weights: SimplexWeights,
    pub norm: f64,
}

impl MinNormResult {
    fn from_weights(weights: SimplexWeights, vectors: &[Vec<f64>]) -> Self {
        let point = combine(weights.as_slice(), vectors);
        let norm = norm(&point);
        Self {
            point,
            weights,
            norm,
        }
    }

    /// Wolfe duality gap `max_i <p, p - g_i>`; nonpositive at the exact optimum.
    pub fn duality_gap(&self, bundle: &GradientBundle) -> f64 {
        let pp = norm_sq(&self.point);
        bundle
            .vectors()
            .iter()
            .map(|g| pp - dot(&self.point, g))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Projection of the origin onto the convex hull of `bundle`.
///
/// A single vector is returned as is, two vectors go through
/// [`min_norm_point_pair`], larger bundles through [`wolfe_min_norm_point`].
pub fn min_norm_point(bundle: &GradientBundle, tol: f64) -> Result<MinNormResult, MinNormError> {
    check_tol(tol)?;
    match bundle.vectors() {
        [g] => Ok(MinNormResult {
            point: g.clone(),
            weights: SimplexWeights::vertex(1, 0),
            norm: norm(g),
        }),
        [g1, g2] => Ok(pair_unchecked(g1, g2)),
        vectors => Ok(wolfe(vectors, tol)),
    }
}

/// Closed-form projection of the origin onto the segment `[g1, g2]`.
///
/// The weight on `g2` is `clamp(<g1 - g2, g1> / |g1 - g2|², 0, 1)`, and zero
/// when the two vectors coincide.
pub fn min_norm_point_pair(g1: &[f64], g2: &[f64]) -> Result<MinNormResult, MinNormError> {
    let bundle = GradientBundle::new(vec![g1.to_vec(), g2.to_vec()])?;
    let [a, b] = bundle.vectors() else {
        unreachable!()
    };
    Ok(pair_unchecked(a, b))
}

fn pair_unchecked(g1: &[f64], g2: &[f64]) -> MinNormResult {
    let diff: Vec<f64> = g1.iter().zip(g2).map(|(a, b)| a - b).collect();
    let dd = norm_sq(&diff);
    let theta = if dd == 0.0 {
        0.0
    } else {
        (dot(&diff, g1) / dd).clamp(0.0, 1.0)
    };
    let point: Vec<f64> = if theta == 0.0 {
        g1.to_vec()
    } else if theta == 1.0 {
        g2.to_vec()
    } else {
        g1.iter().zip(&diff).map(|(a, d)| a - theta * d).collect()
    };
    let norm = norm(&point);
    MinNormResult {
        point,
        weights: SimplexWeights(vec![1.0 - theta, theta]),
        norm,
    }
}

/// Wolfe's minimum-norm-point algorithm for any bundle size, with no fast paths.
pub fn wolfe_min_norm_point(
    bundle: &GradientBundle,
    tol: f64,
) -> Result<MinNormResult, MinNormError> {
    check_tol(tol)?;
    Ok(wolfe(bundle.vectors(), tol))
}

fn check_tol(tol: f64) -> Result<(), MinNormError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(MinNormError::InvalidInput(format!(
            "tolerance must be positive and finite, got {tol}"
        )))
    }
}

fn wolfe(vectors: &[Vec<f64>], tol: f64) -> MinNormResult {
    let q = vectors.len();

    // Start from the shortest vertex; lowest index wins ties.
    let mut start = 0;
    let mut best = norm_sq(&vectors[0]);
    for (i, g) in vectors.iter().enumerate().skip(1) {
        let n = norm_sq(g);
        if n < best {
            best = n;
            start = i;
        }
    }

    let mut corral = vec![start];
    let mut lambda = vec![1.0];
    let mut x = vectors[start].clone();

    let max_major = 50 * q + 50;
    'major: for _ in 0..max_major {
        let xx = norm_sq(&x);
        let mut j = 0;
        let mut min_ip = dot(&x, &vectors[0]);
        for (i, g) in vectors.iter().enumerate().skip(1) {
            let ip = dot(&x, g);
            if ip < min_ip {
                min_ip = ip;
                j = i;
            }
        }
        if xx - min_ip <= tol || corral.contains(&j) {
            break;
        }
        corral.push(j);
        lambda.push(0.0);

        loop {
            let Some(alpha) = affine_minimizer(vectors, &corral) else {
                // The new vertex is numerically in the affine hull of the corral.
                corral.pop();
                lambda.pop();
                break 'major;
            };
            if alpha.iter().all(|&a| a > 0.0) {
                lambda = alpha;
                x = corral_point(vectors, &corral, &lambda);
                break;
            }

            // Move from x toward the affine minimizer until a weight hits zero.
            // ratio = l / (l - a) lies in [0, 1] whenever a <= 0.
            let mut step = f64::INFINITY;
            let mut blocking = 0;
            for (k, (&l, &a)) in lambda.iter().zip(&alpha).enumerate() {
                if a <= 0.0 {
                    let denom = l - a;
                    let ratio = if denom > 0.0 { l / denom } else { 0.0 };
                    if ratio < step {
                        step = ratio;
                        blocking = k;
                    }
                }
            }
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = (1.0 - step) * *l + step * a;
            }
            lambda[blocking] = 0.0;
            let mut k = 0;
            while k < corral.len() {
                if lambda[k] <= 0.0 {
                    corral.remove(k);
                    lambda.remove(k);
                } else {
                    k += 1;
                }
            }
            x = corral_point(vectors, &corral, &lambda);
            if corral.len() == 1 {
                break;
            }
        }
    }

    let mut theta = vec![0.0; q];
    for (&i, &l) in corral.iter().zip(&lambda) {
        theta[i] = l;
    }
    MinNormResult::from_weights(SimplexWeights::normalized(theta), vectors)
}

fn corral_point(vectors: &[Vec<f64>], corral: &[usize], lambda: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; vectors[0].len()];
    for (&i, &l) in corral.iter().zip(lambda) {
        for (o, g) in out.iter_mut().zip(&vectors[i]) {
            *o += l * g;
        }
    }
    out
}

/// Affine weights `α` (summing to one) of the minimum-norm point of
/// `aff{g_i : i ∈ corral}`, or `None` when the corral is numerically
/// affinely dependent.
fn affine_minimizer(vectors: &[Vec<f64>], corral: &[usize]) -> Option<Vec<f64>> {
    let n = corral.len() - 1;
    if n == 0 {
        return Some(vec![1.0]);
    }
    let base = &vectors[corral[0]];
    let diffs: Vec<Vec<f64>> = corral[1..]
        .iter()
        .map(|&i| vectors[i].iter().zip(base).map(|(g, b)| g - b).collect())
        .collect();

    // Normal equations (DᵀD) β = -Dᵀ g_base.
    let mut gram = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    for a in 0..n {
        for b in a..n {
            let v = dot(&diffs[a], &diffs[b]);
            gram[a][b] = v;
            gram[b][a] = v;
        }
        rhs[a] = -dot(&diffs[a], base);
    }
    let scale = (0..n).map(|k| gram[k][k]).fold(0.0, f64::max);
    let beta = solve_dense(gram, rhs, 1e-13 * scale)?;

    let mut alpha = Vec::with_capacity(n + 1);
    alpha.push(1.0 - beta.iter().sum::<f64>());
    alpha.extend(beta);
    Some(alpha)
}

/// Gaussian elimination with partial pivoting; `None` if a pivot falls below `pivot_tol`.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, pivot_tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if !(a[pivot][col].abs() > pivot_tol) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

/// Exhaustive search over the lattice `{θ ∈ Δ_q : θ_i = k_i / resolution}`.
///
/// Test oracle only; the lattice has `C(resolution + q - 1, q - 1)` points.
pub fn brute_force_min_norm(
    bundle: &GradientBundle,
    resolution: u32,
) -> Result<MinNormResult, MinNormError> {
    let q = bundle.len();
    if q > BRUTE_FORCE_MAX_VECTORS {
        return Err(MinNormError::UnsupportedSize {
            got: q,
            max: BRUTE_FORCE_MAX_VECTORS,
        });
    }
    if resolution == 0 {
        return Err(MinNormError::InvalidInput(
            "resolution must be positive".into(),
        ));
    }
    let vectors = bundle.vectors();
    let dim = bundle.dim();
    let r = resolution as f64;

    let mut counts = vec![0u32; q];
    let mut best_counts = vec![0u32; q];
    let mut best = f64::INFINITY;
    // partial[l] = Σ_{i<l} k_i g_i
    let mut partial = vec![vec![0.0; dim]; q];
    let mut scratch = vec![0.0; dim];

    fn visit(
        level: usize,
        remaining: u32,
        vectors: &[Vec<f64>],
        r: f64,
        counts: &mut [u32],
        partial: &mut [Vec<f64>],
        scratch: &mut [f64],
        best: &mut f64,
        best_counts: &mut [u32],
    ) {
        let q = vectors.len();
        if level == q - 1 {
            counts[level] = remaining;
            let k = remaining as f64;
            for ((s, p), g) in scratch.iter_mut().zip(&partial[level]).zip(&vectors[level]) {
                *s = (p + k * g) / r;
            }
            let n = norm_sq(scratch);
            if n < *best {
                *best = n;
                best_counts.copy_from_slice(counts);
            }
            return;
        }
        for k in 0..=remaining {
            counts[level] = k;
            let kf = k as f64;
            let (head, tail) = partial.split_at_mut(level + 1);
            for ((next, p), g) in tail[0].iter_mut().zip(&head[level]).zip(&vectors[level]) {
                *next = p + kf * g;
            }
            visit(
                level + 1,
                remaining - k,
                vectors,
                r,
                counts,
                partial,
                scratch,
                best,
                best_counts,
            );
        }
    }

    visit(
        0,
        resolution,
        vectors,
        r,
        &mut counts,
        &mut partial,
        &mut scratch,
        &mut best,
        &mut best_counts,
    );

    let theta = best_counts.iter().map(|&k| k as f64 / r).collect();
    Ok(MinNormResult::from_weights(
        SimplexWeights::normalized(theta),
        vectors,
    ))
}
