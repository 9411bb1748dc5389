//! Sublinear and superlinear maps, and positively homogeneous functions
//! represented as infima of sublinear maps (upper semicontinuous case) or
//! suprema of superlinear maps (lower semicontinuous case).

mod builtins;
mod schema;
pub mod sphere;

use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convexsets::{ConvexCompactSet, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{neg, norm};

pub use builtins::{angle_family, builtin, inscribed_polygon, BUILTIN_NAMES};
pub use schema::{FamilyDocument, KindTag, MapSpec};

/// Default cap on the number of maps drawn from a generated family.
pub const DEFAULT_BUDGET: usize = 10_000;
/// Default number of consecutive non-improving maps before a generated
/// family evaluation stops.
pub const DEFAULT_WINDOW: usize = 200;
/// Default improvement threshold for generated family evaluation.
pub const DEFAULT_FAMILY_TOL: f64 = 1e-9;

/// `φ(x) = max_{a ∈ ∂φ(0)} a·x`, stored through its subdifferential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SublinearMap {
    subdiff: ConvexCompactSet,
    #[serde(default)]
    label: String,
}

/// `ψ(x) = min_{a ∈ ∂̄ψ(0)} a·x`, stored through its superdifferential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperlinearMap {
    superdiff: ConvexCompactSet,
    #[serde(default)]
    label: String,
}

impl SublinearMap {
    pub fn new(subdiff: ConvexCompactSet, label: impl Into<String>) -> Self {
        Self {
            subdiff,
            label: label.into(),
        }
    }

    /// `a ↦ a·x` as a sublinear map with singleton subdifferential.
    pub fn linear(a: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        Ok(Self::new(ConvexCompactSet::singleton(a)?, label))
    }

    pub fn subdiff(&self) -> &ConvexCompactSet {
        &self.subdiff
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.subdiff.dim()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim("eval_sublinear", self.dim(), x.len())?;
        Ok(self.subdiff.support_unchecked(x))
    }
}

impl SuperlinearMap {
    pub fn new(superdiff: ConvexCompactSet, label: impl Into<String>) -> Self {
        Self {
            superdiff,
            label: label.into(),
        }
    }

    pub fn linear(a: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        Ok(Self::new(ConvexCompactSet::singleton(a)?, label))
    }

    pub fn superdiff(&self) -> &ConvexCompactSet {
        &self.superdiff
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.superdiff.dim()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim("eval_superlinear", self.dim(), x.len())?;
        Ok(-self.superdiff.support_unchecked(&neg(x)))
    }
}

/// Which extremum a family realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Inf,
    Sup,
}

impl Extremum {
    pub fn identity(self) -> f64 {
        match self {
            Extremum::Inf => f64::INFINITY,
            Extremum::Sup => f64::NEG_INFINITY,
        }
    }

    /// `true` when `candidate` is strictly better than `best`.
    pub fn better(self, candidate: f64, best: f64) -> bool {
        match self {
            Extremum::Inf => candidate < best,
            Extremum::Sup => candidate > best,
        }
    }

    /// `true` when `candidate` beats `best` by more than `tol`.
    pub fn improves(self, candidate: f64, best: f64, tol: f64) -> bool {
        match self {
            Extremum::Inf => candidate < best - tol,
            Extremum::Sup => candidate > best + tol,
        }
    }

    pub fn pick(self, a: f64, b: f64) -> f64 {
        match self {
            Extremum::Inf => a.min(b),
            Extremum::Sup => a.max(b),
        }
    }
}

/// Common surface of sublinear and superlinear maps.
pub trait PhMap: Clone + Send + Sync + fmt::Debug + 'static {
    /// The extremum a family of these maps realizes.
    const EXTREMUM: Extremum;
    fn dim(&self) -> usize;
    fn label(&self) -> &str;
    /// The sub- or superdifferential at the origin.
    fn set(&self) -> &ConvexCompactSet;
    fn eval(&self, x: &[f64]) -> Result<f64>;
}

impl PhMap for SublinearMap {
    const EXTREMUM: Extremum = Extremum::Inf;
    fn dim(&self) -> usize {
        SublinearMap::dim(self)
    }
    fn label(&self) -> &str {
        &self.label
    }
    fn set(&self) -> &ConvexCompactSet {
        &self.subdiff
    }
    fn eval(&self, x: &[f64]) -> Result<f64> {
        SublinearMap::eval(self, x)
    }
}

impl PhMap for SuperlinearMap {
    const EXTREMUM: Extremum = Extremum::Sup;
    fn dim(&self) -> usize {
        SuperlinearMap::dim(self)
    }
    fn label(&self) -> &str {
        &self.label
    }
    fn set(&self) -> &ConvexCompactSet {
        &self.superdiff
    }
    fn eval(&self, x: &[f64]) -> Result<f64> {
        SuperlinearMap::eval(self, x)
    }
}

/// A deterministic, re-entrant source of maps. Each call to `maps` starts a
/// fresh enumeration in the same fixed order.
pub trait MapGenerator<M>: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn name(&self) -> &str;
    fn maps(&self) -> Box<dyn Iterator<Item = M> + '_>;
}

/// An enumerable family of sublinear or superlinear maps.
#[derive(Clone, Debug)]
pub enum Family<M> {
    Finite(Vec<M>),
    Generated {
        generator: Arc<dyn MapGenerator<M>>,
        budget: usize,
        window: usize,
    },
}

impl<M: PhMap> Family<M> {
    pub fn generated(generator: Arc<dyn MapGenerator<M>>) -> Self {
        Family::Generated {
            generator,
            budget: DEFAULT_BUDGET,
            window: DEFAULT_WINDOW,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Family::Finite(maps) => maps.first().map(|m| m.dim()),
            Family::Generated { generator, .. } => Some(generator.dim()),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Family::Finite(maps) => maps.is_empty(),
            Family::Generated { budget, .. } => *budget == 0,
        }
    }

    /// Stall window for generated families; finite lists are always
    /// evaluated in full.
    pub fn window(&self) -> Option<usize> {
        match self {
            Family::Finite(_) => None,
            Family::Generated { window, .. } => Some(*window),
        }
    }

    /// Replace the budget of a generated family; finite lists are unchanged.
    pub fn with_budget(self, new_budget: usize) -> Self {
        match self {
            Family::Generated {
                generator, window, ..
            } => Family::Generated {
                generator,
                budget: new_budget,
                window,
            },
            finite => finite,
        }
    }

    /// Visit maps in enumeration order, up to the budget, until `f` breaks.
    pub fn visit(&self, mut f: impl FnMut(usize, &M) -> ControlFlow<()>) {
        match self {
            Family::Finite(maps) => {
                for (i, m) in maps.iter().enumerate() {
                    if f(i, m).is_break() {
                        return;
                    }
                }
            }
            Family::Generated {
                generator, budget, ..
            } => {
                for (i, m) in generator.maps().take(*budget).enumerate() {
                    if f(i, &m).is_break() {
                        return;
                    }
                }
            }
        }
    }

    /// Running infimum (sublinear) or supremum (superlinear) at `x`.
    pub fn extremum_at(&self, x: &[f64], tol: f64) -> Result<FamilyValue> {
        const OP: &str = "eval_family";
        if self.is_empty() {
            return Err(Error::EmptyFamily { op: OP });
        }
        if let Some(n) = self.dim() {
            check_dim(OP, n, x.len())?;
        }
        let ext = M::EXTREMUM;
        let window = self.window().unwrap_or(usize::MAX);
        let mut best = ext.identity();
        let mut best_index = 0;
        let mut terms = 0;
        let mut stall = 0;
        let mut failure = None;
        self.visit(|i, m| {
            terms = i + 1;
            let v = match m.eval(x) {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    return ControlFlow::Break(());
                }
            };
            if ext.improves(v, best, tol) || i == 0 {
                stall = 0;
            } else {
                stall += 1;
            }
            if ext.better(v, best) {
                best = v;
                best_index = i;
            }
            if stall >= window {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        if terms == 0 {
            return Err(Error::EmptyFamily { op: OP });
        }
        Ok(FamilyValue {
            value: best + 0.0,
            terms_used: terms,
            best_index,
        })
    }
}

/// Result of a family evaluation at a single point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyValue {
    pub value: f64,
    pub terms_used: usize,
    pub best_index: usize,
}

/// How a positively homogeneous function is represented.
#[derive(Clone, Debug)]
pub enum Representation {
    /// `h = inf Φ` (upper semicontinuous).
    Usc(Family<SublinearMap>),
    /// `h = sup Ψ` (lower semicontinuous).
    Lsc(Family<SuperlinearMap>),
    /// Both representations (continuous).
    Continuous {
        inf: Family<SublinearMap>,
        sup: Family<SuperlinearMap>,
    },
}

impl Representation {
    pub fn tag(&self) -> KindTag {
        match self {
            Representation::Usc(_) => KindTag::Usc,
            Representation::Lsc(_) => KindTag::Lsc,
            Representation::Continuous { .. } => KindTag::Cts,
        }
    }

    pub fn inf_family(&self) -> Option<&Family<SublinearMap>> {
        match self {
            Representation::Usc(f) | Representation::Continuous { inf: f, .. } => Some(f),
            Representation::Lsc(_) => None,
        }
    }

    pub fn sup_family(&self) -> Option<&Family<SuperlinearMap>> {
        match self {
            Representation::Lsc(f) | Representation::Continuous { sup: f, .. } => Some(f),
            Representation::Usc(_) => None,
        }
    }

    /// The side used by default: the infimum for usc and continuous
    /// functions, the supremum for lsc ones.
    pub fn primary(&self) -> Extremum {
        match self {
            Representation::Lsc(_) => Extremum::Sup,
            _ => Extremum::Inf,
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            Representation::Usc(f) => f.dim(),
            Representation::Lsc(f) => f.dim(),
            Representation::Continuous { inf, sup } => {
                let (a, b) = (inf.dim(), sup.dim());
                match (a, b) {
                    (Some(a), Some(b)) if a != b => None,
                    _ => a.or(b),
                }
            }
        }
    }
}

/// Closed-form pointwise evaluator.
pub type Oracle = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A semicontinuous positively homogeneous function `h: ℝⁿ → ℝ`.
#[derive(Clone)]
pub struct PhFunction {
    name: String,
    dim: usize,
    repr: Representation,
    oracle: Option<Oracle>,
}

impl fmt::Debug for PhFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("repr", &self.repr)
            .field("oracle", &self.oracle.is_some())
            .finish()
    }
}

/// Outcome of [`PhFunction::eval_family`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub terms_used: usize,
    /// Set when an oracle is present and disagrees by more than `10·tol`.
    pub warning: Option<RepresentationWarning>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepresentationWarning {
    pub oracle: f64,
    pub deviation: f64,
}

/// Extremes of `h` over a sphere grid, reported as the nonnegative pair
/// `(m, M)` with `-m <= h <= M` on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereBounds {
    pub lower: f64,
    pub upper: f64,
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
}

/// `ψ = -m‖·‖ <= h <= φ = M‖·‖`.
#[derive(Clone, Debug)]
pub struct Envelopes {
    pub lower: SuperlinearMap,
    pub upper: SublinearMap,
    pub m: f64,
    pub big_m: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneityViolation {
    pub x: Vec<f64>,
    pub lambda: f64,
    pub scaled: f64,
    pub expected: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneityReport {
    pub samples: usize,
    pub violations: Vec<HomogeneityViolation>,
}

impl HomogeneityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl PhFunction {
    pub fn new(name: impl Into<String>, repr: Representation) -> Result<Self> {
        const OP: &str = "PhFunction::new";
        match &repr {
            Representation::Usc(f) if f.is_empty() => return Err(Error::EmptyFamily { op: OP }),
            Representation::Lsc(f) if f.is_empty() => return Err(Error::EmptyFamily { op: OP }),
            Representation::Continuous { inf, sup } if inf.is_empty() || sup.is_empty() => {
                return Err(Error::EmptyFamily { op: OP })
            }
            _ => {}
        }
        let dim = repr.dim().ok_or_else(|| Error::InvalidInput {
            op: OP,
            reason: "inf and sup families have different dimensions".into(),
        })?;
        let mut mismatch = None;
        let mut check = |d: usize| {
            if d != dim && mismatch.is_none() {
                mismatch = Some(d);
            }
        };
        if let Some(Family::Finite(maps)) = repr.inf_family() {
            maps.iter().for_each(|m| check(m.dim()));
        }
        if let Some(Family::Finite(maps)) = repr.sup_family() {
            maps.iter().for_each(|m| check(m.dim()));
        }
        if let Some(got) = mismatch {
            return Err(Error::DimensionMismatch {
                op: OP,
                expected: dim,
                got,
            });
        }
        Ok(Self {
            name: name.into(),
            dim,
            repr,
            oracle: None,
        })
    }

    pub fn with_oracle(mut self, oracle: Oracle) -> Self {
        self.oracle = Some(oracle);
        self
    }

    /// Override the budget of every generated family.
    pub fn with_budget(mut self, budget: usize) -> Self {
        self.repr = match self.repr {
            Representation::Usc(f) => Representation::Usc(f.with_budget(budget)),
            Representation::Lsc(f) => Representation::Lsc(f.with_budget(budget)),
            Representation::Continuous { inf, sup } => Representation::Continuous {
                inf: inf.with_budget(budget),
                sup: sup.with_budget(budget),
            },
        };
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn has_oracle(&self) -> bool {
        self.oracle.is_some()
    }

    /// Closed-form value, when the function carries an oracle.
    pub fn oracle_eval(&self, x: &[f64]) -> Result<f64> {
        const OP: &str = "oracle";
        let oracle = self
            .oracle
            .as_ref()
            .ok_or(Error::MissingOracle { op: OP })?;
        check_dim(OP, self.dim, x.len())?;
        Ok(oracle(x))
    }

    /// Evaluate through the representation on its primary side.
    pub fn eval_family(&self, x: &[f64], tol: f64) -> Result<Evaluation> {
        self.eval_side(self.repr.primary(), x, tol)
    }

    /// Evaluate through the infimum or the supremum family.
    pub fn eval_side(&self, side: Extremum, x: &[f64], tol: f64) -> Result<Evaluation> {
        let fv = self.family_value(side, x, tol)?;
        let warning = match &self.oracle {
            Some(oracle) => {
                let expected = oracle(x);
                let deviation = (fv.value - expected).abs();
                (deviation > 10.0 * tol).then_some(RepresentationWarning {
                    oracle: expected,
                    deviation,
                })
            }
            None => None,
        };
        Ok(Evaluation {
            value: fv.value,
            terms_used: fv.terms_used,
            warning,
        })
    }

    pub(crate) fn family_value(&self, side: Extremum, x: &[f64], tol: f64) -> Result<FamilyValue> {
        const OP: &str = "eval_family";
        check_dim(OP, self.dim, x.len())?;
        match side {
            Extremum::Inf => self
                .repr
                .inf_family()
                .ok_or_else(|| missing_side(OP, side))?
                .extremum_at(x, tol),
            Extremum::Sup => self
                .repr
                .sup_family()
                .ok_or_else(|| missing_side(OP, side))?
                .extremum_at(x, tol),
        }
    }

    /// Pointwise value used for grid scans: the oracle when present,
    /// otherwise the family.
    fn point_value(&self, x: &[f64]) -> Result<f64> {
        match &self.oracle {
            Some(oracle) => Ok(oracle(x)),
            None => Ok(self.eval_family(x, DEFAULT_FAMILY_TOL)?.value),
        }
    }

    /// `(m, M)` with `-m <= h <= M` over a deterministic sphere grid, both
    /// clamped at zero.
    pub fn sphere_bounds(&self, grid_density: usize) -> Result<SphereBounds> {
        const OP: &str = "sphere_bounds";
        if grid_density < 8 {
            return Err(Error::InvalidInput {
                op: OP,
                reason: format!("grid density must be at least 8, got {grid_density}"),
            });
        }
        let grid = sphere::sphere_grid(self.dim, grid_density);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut argmin = grid[0].clone();
        let mut argmax = grid[0].clone();
        for p in &grid {
            let v = self.point_value(p)?;
            if !v.is_finite() {
                return Err(Error::Unbounded { op: OP });
            }
            if v < lo {
                lo = v;
                argmin = p.clone();
            }
            if v > hi {
                hi = v;
                argmax = p.clone();
            }
        }
        Ok(SphereBounds {
            lower: (-lo).max(0.0),
            upper: hi.max(0.0),
            argmin,
            argmax,
        })
    }

    /// Norm envelopes `-m‖x‖ <= h(x) <= M‖x‖`.
    ///
    /// `m` and `M` combine the grid extremes with bounds read off the
    /// family: every member `φ` of an inf-family satisfies
    /// `h <= φ <= max‖∂φ(0)‖·‖x‖`, and every member `ψ` of a sup-family
    /// satisfies `h >= ψ >= -max‖∂̄ψ(0)‖·‖x‖`. The opposite sides use the
    /// largest distance from the origin to a member's set over the visited
    /// prefix. The envelopes are then checked against family evaluation on
    /// the grid.
    pub fn domination_envelopes(&self, grid_density: usize) -> Result<Envelopes> {
        const OP: &str = "domination_envelopes";
        let grid_bounds = self.sphere_bounds(grid_density)?;
        let mut m = grid_bounds.lower;
        let mut big_m = grid_bounds.upper;

        if let Some(inf) = self.repr.inf_family() {
            let (rigorous, probed) = set_norm_bounds(inf)?;
            big_m = big_m.max(rigorous);
            if matches!(self.repr, Representation::Usc(_)) {
                m = m.max(probed);
            }
        }
        if let Some(sup) = self.repr.sup_family() {
            let (rigorous, probed) = set_norm_bounds(sup)?;
            m = m.max(rigorous);
            if matches!(self.repr, Representation::Lsc(_)) {
                big_m = big_m.max(probed);
            }
        }
        if !(m.is_finite() && big_m.is_finite()) {
            return Err(Error::Unbounded { op: OP });
        }

        let n = self.dim;
        let lower = SuperlinearMap::new(
            ConvexCompactSet::ball(vec![0.0; n], m)?,
            format!("-{m}*norm"),
        );
        let upper = SublinearMap::new(
            ConvexCompactSet::ball(vec![0.0; n], big_m)?,
            format!("{big_m}*norm"),
        );

        let slack = 1e-9;
        for p in sphere::sphere_grid(n, grid_density) {
            let v = self.eval_family(&p, DEFAULT_FAMILY_TOL)?.value;
            let (lo, hi) = (lower.eval(&p)?, upper.eval(&p)?);
            if v < lo - slack || v > hi + slack {
                return Err(Error::EnvelopeViolation {
                    op: OP,
                    point: p,
                    value: v,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Envelopes {
            lower,
            upper,
            m,
            big_m,
        })
    }

    /// Samples `(x, λ)` with `x ∈ [-5, 5]ⁿ`, `λ ∈ [0, 10]` and records every
    /// pair with `|h(λx) - λh(x)| > tol·(1 + λ)`.
    pub fn check_positive_homogeneity(
        &self,
        samples: usize,
        tol: f64,
        seed: u64,
    ) -> Result<HomogeneityReport> {
        let oracle = self.oracle.as_ref().ok_or(Error::MissingOracle {
            op: "check_positive_homogeneity",
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut violations = Vec::new();
        for i in 0..samples {
            let x: Vec<f64> = (0..self.dim)
                .map(|_| rng.random_range(-5.0..=5.0))
                .collect();
            // Always probe λ = 0 once.
            let lambda = if i == 0 {
                0.0
            } else {
                rng.random_range(0.0..=10.0)
            };
            let scaled_x: Vec<f64> = x.iter().map(|v| lambda * v).collect();
            let scaled = oracle(&scaled_x);
            let expected = lambda * oracle(&x);
            if (scaled - expected).abs() > tol * (1.0 + lambda) {
                violations.push(HomogeneityViolation {
                    x,
                    lambda,
                    scaled,
                    expected,
                });
            }
        }
        Ok(HomogeneityReport {
            samples,
            violations,
        })
    }
}

fn missing_side(op: &'static str, side: Extremum) -> Error {
    Error::InvalidInput {
        op,
        reason: format!("representation has no {side:?} family"),
    }
}

/// `(min over members of max‖set‖, max over members of dist(0, set))` for
/// the visited prefix of a family.
fn set_norm_bounds<M: PhMap>(family: &Family<M>) -> Result<(f64, f64)> {
    let mut smallest_outer = f64::INFINITY;
    let mut largest_inner: f64 = 0.0;
    let mut failure = None;
    family.visit(|_, m| {
        smallest_outer = smallest_outer.min(m.set().max_norm());
        match m.set().min_norm(DEFAULT_TOL, DEFAULT_MAX_ITER) {
            Ok(d) => {
                largest_inner = largest_inner.max(d);
                ControlFlow::Continue(())
            }
            Err(e) => {
                failure = Some(e);
                ControlFlow::Break(())
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok((smallest_outer, largest_inner)),
    }
}

/// `‖x‖` scaled by `c`; handy for envelope checks in tests.
pub fn scaled_norm(c: f64, x: &[f64]) -> f64 {
    c * norm(x)
}
