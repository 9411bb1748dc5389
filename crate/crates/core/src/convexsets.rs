//! Nonempty convex compact subsets of ℝⁿ.
//!
//! Two representations are supported: the convex hull of a finite vertex list
//! and a closed Euclidean ball. Both have closed-form support functions; the
//! polytope projection uses Wolfe's minimum-norm-point method.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, dot, norm, sub, unit};

/// Default tolerance for projection and feasibility solves.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default iteration cap for projection and feasibility solves.
pub const DEFAULT_MAX_ITER: usize = 100_000;

const STALL_WINDOW: usize = 50;
const STALL_RELATIVE_IMPROVEMENT: f64 = 1e-12;

/// Concrete representation of a [`ConvexCompactSet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Polytope { vertices: Vec<Vec<f64>> },
    Ball { center: Vec<f64>, radius: f64 },
}

/// A validated nonempty convex compact set.
///
/// Invariants: the vertex list is nonempty with a common dimension `n >= 1`,
/// every coordinate is finite, and a ball radius is nonnegative. A ball of
/// radius zero is the singleton `{center}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Shape", into = "Shape")]
pub struct ConvexCompactSet {
    shape: Shape,
}

impl TryFrom<Shape> for ConvexCompactSet {
    type Error = Error;

    fn try_from(shape: Shape) -> Result<Self> {
        const OP: &str = "ConvexCompactSet::new";
        let invalid = |reason: &str| Error::InvalidInput {
            op: OP,
            reason: reason.to_string(),
        };
        match &shape {
            Shape::Polytope { vertices } => {
                let first = vertices
                    .first()
                    .ok_or_else(|| invalid("vertex list is empty"))?;
                if first.is_empty() {
                    return Err(invalid("vertices must have dimension >= 1"));
                }
                for v in vertices {
                    check_dim(OP, first.len(), v.len())?;
                    if v.iter().any(|c| !c.is_finite()) {
                        return Err(invalid("vertex coordinates must be finite"));
                    }
                }
            }
            Shape::Ball { center, radius } => {
                if center.is_empty() {
                    return Err(invalid("center must have dimension >= 1"));
                }
                if center.iter().any(|c| !c.is_finite()) {
                    return Err(invalid("center coordinates must be finite"));
                }
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(invalid("radius must be finite and nonnegative"));
                }
            }
        }
        Ok(Self { shape })
    }
}

impl From<ConvexCompactSet> for Shape {
    fn from(set: ConvexCompactSet) -> Self {
        set.shape
    }
}

impl ConvexCompactSet {
    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        Shape::Polytope { vertices }.try_into()
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Shape::Ball { center, radius }.try_into()
    }

    pub fn singleton(point: Vec<f64>) -> Result<Self> {
        Self::polytope(vec![point])
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Polytope { vertices } => vertices[0].len(),
            Shape::Ball { center, .. } => center.len(),
        }
    }

    fn check(&self, op: &'static str, x: &[f64]) -> Result<()> {
        check_dim(op, self.dim(), x.len())
    }

    /// `sup_{a in set} a·x`.
    pub fn support(&self, x: &[f64]) -> Result<f64> {
        self.check("support", x)?;
        Ok(self.support_unchecked(x))
    }

    pub(crate) fn support_unchecked(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Polytope { vertices } => vertices
                .iter()
                .map(|v| dot(v, x))
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::Ball { center, radius } => dot(center, x) + radius * norm(x),
        }
    }

    /// A maximizer of `a·x` over the set. Polytope ties go to the lowest
    /// vertex index; a ball at `x = 0` returns its center.
    pub fn support_argmax(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check("support_argmax", x)?;
        Ok(match &self.shape {
            Shape::Polytope { vertices } => {
                let mut best = 0;
                let mut best_val = dot(&vertices[0], x);
                for (i, v) in vertices.iter().enumerate().skip(1) {
                    let val = dot(v, x);
                    if val > best_val {
                        best = i;
                        best_val = val;
                    }
                }
                vertices[best].clone()
            }
            Shape::Ball { center, radius } => {
                let nx = norm(x);
                if nx == 0.0 {
                    center.clone()
                } else {
                    center
                        .iter()
                        .zip(x)
                        .map(|(c, xi)| c + radius * xi / nx)
                        .collect()
                }
            }
        })
    }

    /// `max(support(e_k), support(-e_k))` for the zero-based axis `k`; an upper
    /// bound on `|a_k|` over the set.
    pub fn coordinate_bound(&self, k: usize) -> Result<f64> {
        let n = self.dim();
        if k >= n {
            return Err(Error::IndexOutOfRange {
                op: "coordinate_bound",
                index: k,
                len: n,
            });
        }
        let mut e = unit(n, k);
        let up = self.support_unchecked(&e);
        e[k] = -1.0;
        let down = self.support_unchecked(&e);
        Ok(up.max(down))
    }

    /// Largest Euclidean norm attained on the set.
    pub fn max_norm(&self) -> f64 {
        match &self.shape {
            Shape::Polytope { vertices } => vertices.iter().map(|v| norm(v)).fold(0.0, f64::max),
            Shape::Ball { center, radius } => norm(center) + radius,
        }
    }

    /// Euclidean distance from the origin to the set.
    pub fn min_norm(&self, tol: f64, max_iter: usize) -> Result<f64> {
        match &self.shape {
            Shape::Ball { center, radius } => Ok((norm(center) - radius).max(0.0)),
            Shape::Polytope { .. } => {
                let origin = vec![0.0; self.dim()];
                Ok(norm(&self.project(&origin, tol, max_iter)?))
            }
        }
    }

    /// A fixed interior-ish point: the ball center or the vertex mean.
    pub fn reference_point(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Ball { center, .. } => center.clone(),
            Shape::Polytope { vertices } => {
                let k = vertices.len() as f64;
                let mut mean = vec![0.0; self.dim()];
                for v in vertices {
                    for (m, c) in mean.iter_mut().zip(v) {
                        *m += c;
                    }
                }
                mean.iter_mut().for_each(|m| *m /= k);
                mean
            }
        }
    }

    /// Euclidean projection of `p` onto the set.
    ///
    /// Balls use the radial formula. Polytopes stop once either the iterate
    /// is within `tol` of `p`, or the primal-dual gap in distance units
    /// (`support(u) - u·y` for `u = (p - y)/|p - y|`) is at most `tol`.
    pub fn project(&self, p: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
        const OP: &str = "project";
        self.check(OP, p)?;
        check_tol(OP, tol)?;
        match &self.shape {
            Shape::Ball { center, radius } => Ok(project_ball(center, *radius, p)),
            Shape::Polytope { vertices } => {
                let out = MinNorm::new(vertices, p)
                    .run(OP, max_iter, |b| b.upper <= tol || b.gap <= tol)?;
                Ok(out.point)
            }
        }
    }

    /// Whether `dist(a, set) <= tol`.
    pub fn contains(&self, a: &[f64], tol: f64) -> Result<bool> {
        const OP: &str = "contains";
        self.check(OP, a)?;
        check_tol(OP, tol)?;
        match &self.shape {
            Shape::Ball { center, radius } => Ok(dist(a, center) - radius <= tol),
            Shape::Polytope { vertices } => {
                let b = MinNorm::new(vertices, a)
                    .run(OP, DEFAULT_MAX_ITER, |b| {
                        b.upper <= tol || b.lower() > tol || b.gap <= tol * 1e-6
                    })?
                    .bounds;
                Ok(b.upper <= tol || b.lower() <= tol)
            }
        }
    }
}

fn check_tol(op: &'static str, tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput {
            op,
            reason: format!("tolerance must be positive, got {tol}"),
        })
    }
}

fn project_ball(center: &[f64], radius: f64, p: &[f64]) -> Vec<f64> {
    let d = dist(p, center);
    if d <= radius {
        return p.to_vec();
    }
    center
        .iter()
        .zip(p)
        .map(|(c, pi)| c + radius * (pi - c) / d)
        .collect()
}

/// Certified distance bounds for the current iterate `y` of a polytope solve.
#[derive(Clone, Copy, Debug)]
struct Bounds {
    /// `|p - y|`, an upper bound on the distance since `y` lies in the hull.
    upper: f64,
    /// `support(u) - u·y` for `u = (p - y)/|p - y|`; `upper - gap` is a
    /// lower bound on the distance.
    gap: f64,
}

impl Bounds {
    fn lower(&self) -> f64 {
        (self.upper - self.gap).max(0.0)
    }
}

struct Outcome {
    point: Vec<f64>,
    bounds: Bounds,
}

/// Wolfe's minimum-norm-point method on the hull of `v_j - p`.
///
/// Keeps an affinely independent corral of vertices with positive weights;
/// each major cycle adds the vertex minimizing `x·q_j`, and minor cycles drop
/// vertices until the affine minimizer of the corral is a convex combination.
struct MinNorm {
    q: Vec<Vec<f64>>,
    p: Vec<f64>,
    /// Largest `|q_j|`, for scale-aware round-off thresholds.
    scale: f64,
}

impl MinNorm {
    fn new(vertices: &[Vec<f64>], p: &[f64]) -> Self {
        let q: Vec<Vec<f64>> = vertices.iter().map(|v| sub(v, p)).collect();
        let scale = q.iter().map(|x| norm(x)).fold(0.0, f64::max);
        Self {
            q,
            p: p.to_vec(),
            scale,
        }
    }

    fn combine(&self, corral: &[usize], lambda: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.p.len()];
        for (&i, &l) in corral.iter().zip(lambda) {
            for (xj, qj) in x.iter_mut().zip(&self.q[i]) {
                *xj += l * qj;
            }
        }
        x
    }

    /// Bounds at `x = y - p`, plus the index minimizing `x·q_j`.
    fn bounds(&self, x: &[f64]) -> (Bounds, usize) {
        let (j, m) =
            self.q
                .iter()
                .map(|q| dot(x, q))
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
                );
        let upper = norm(x);
        let gap = if upper == 0.0 {
            0.0
        } else {
            ((dot(x, x) - m) / upper).max(0.0)
        };
        (Bounds { upper, gap }, j)
    }

    /// Minimizer of `|Σ α_i q_i|` subject to `Σ α_i = 1` over the corral.
    fn affine_min(&self, corral: &[usize]) -> Option<Vec<f64>> {
        let s = corral.len();
        if s == 1 {
            return Some(vec![1.0]);
        }
        // α = e_0 + Σ β_i (e_i - e_0); minimize |q_0 + D β|.
        let q0 = &self.q[corral[0]];
        let d: Vec<Vec<f64>> = corral[1..].iter().map(|&i| sub(&self.q[i], q0)).collect();
        let m = s - 1;
        let mut a = vec![vec![0.0; m + 1]; m];
        for r in 0..m {
            for c in 0..m {
                a[r][c] = dot(&d[r], &d[c]);
            }
            a[r][m] = -dot(&d[r], q0);
        }
        let beta = solve(a, 1e-13 * self.scale * self.scale)?;
        let mut alpha = Vec::with_capacity(s);
        alpha.push(1.0 - beta.iter().sum::<f64>());
        alpha.extend(beta);
        Some(alpha)
    }

    fn run(
        &self,
        op: &'static str,
        max_iter: usize,
        done: impl Fn(&Bounds) -> bool,
    ) -> Result<Outcome> {
        let start = (0..self.q.len())
            .min_by(|&a, &b| norm(&self.q[a]).total_cmp(&norm(&self.q[b])))
            .unwrap_or(0);
        let mut corral = vec![start];
        let mut lambda = vec![1.0];
        let mut x = self.q[start].clone();
        let roundoff = 1e3 * f64::EPSILON * self.scale.max(f64::MIN_POSITIVE);
        let finish = |x: &[f64], bounds: Bounds| Outcome {
            point: x.iter().zip(&self.p).map(|(a, b)| a + b).collect(),
            bounds,
        };
        for iter in 0..=max_iter {
            let (b, j) = self.bounds(&x);
            if done(&b) {
                return Ok(finish(&x, b));
            }
            let stalled = corral.contains(&j) || b.gap <= roundoff;
            if stalled && b.gap <= roundoff {
                return Ok(finish(&x, b));
            }
            if stalled || iter == max_iter {
                return Err(Error::NoConvergence {
                    op,
                    iterations: iter,
                    gap: b.gap,
                });
            }
            corral.push(j);
            lambda.push(0.0);
            loop {
                let Some(alpha) = self.affine_min(&corral) else {
                    // Numerically dependent corral: undo the insertion.
                    corral.pop();
                    lambda.pop();
                    let b = self.bounds(&x).0;
                    if b.gap <= roundoff {
                        return Ok(finish(&x, b));
                    }
                    return Err(Error::NoConvergence {
                        op,
                        iterations: iter,
                        gap: b.gap,
                    });
                };
                if alpha.iter().all(|&a| a > 0.0) {
                    lambda = alpha;
                    break;
                }
                let mut theta = 1.0f64;
                let mut worst = 0;
                for (i, (&l, &a)) in lambda.iter().zip(&alpha).enumerate() {
                    if a <= 0.0 {
                        let t = l / (l - a);
                        if t < theta {
                            theta = t;
                            worst = i;
                        }
                    }
                }
                for (l, a) in lambda.iter_mut().zip(&alpha) {
                    *l += theta * (a - *l);
                }
                lambda[worst] = 0.0;
                let mut i = 0;
                while i < corral.len() {
                    if lambda[i] <= 0.0 {
                        corral.remove(i);
                        lambda.remove(i);
                    } else {
                        i += 1;
                    }
                }
                let total: f64 = lambda.iter().sum();
                lambda.iter_mut().for_each(|l| *l /= total);
            }
            x = self.combine(&corral, &lambda);
        }
        unreachable!("loop returns by iteration max_iter")
    }
}

/// Gaussian elimination with partial pivoting on an augmented `m x (m+1)`
/// system. `None` when a pivot falls below `floor`.
fn solve(mut a: Vec<Vec<f64>>, floor: f64) -> Option<Vec<f64>> {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[piv][col].abs() <= floor {
            return None;
        }
        a.swap(col, piv);
        for r in col + 1..m {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                let (top, bottom) = a.split_at_mut(r);
                for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    let mut out = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|c| a[r][c] * out[c]).sum();
        out[r] = (a[r][m] - s) / a[r][r];
    }
    Some(out)
}

/// A point in `A ∩ B` (within `tol` of both) by alternating projections.
///
/// Fails with `EmptyIntersection` once the residual improves by less than a
/// relative `1e-12` over 50 sweeps while still above `tol`.
pub fn feasible_point(
    a: &ConvexCompactSet,
    b: &ConvexCompactSet,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    const OP: &str = "feasible_point";
    check_dim(OP, a.dim(), b.dim())?;
    check_tol(OP, tol)?;
    let inner = tol * 0.1;
    let mut x = a.reference_point();
    let mut history: Vec<f64> = Vec::with_capacity(STALL_WINDOW + 1);
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let pb = b.project(&x, inner, max_iter)?;
        let pa = a.project(&pb, inner, max_iter)?;
        residual = dist(&pa, &pb);
        if residual <= 0.5 * tol {
            return Ok(pb);
        }
        if history.len() == STALL_WINDOW {
            let old = history.remove(0);
            if (old - residual) <= STALL_RELATIVE_IMPROVEMENT * old {
                return Err(Error::EmptyIntersection { op: OP, residual });
            }
        }
        history.push(residual);
        x = pa;
    }
    Err(Error::NoConvergence {
        op: OP,
        iterations: max_iter,
        gap: residual,
    })
}
