//! Concrete Archimedean vector lattices: ℝᵐ with the coordinatewise order,
//! and real step functions on `[0, 1]`.
//!
//! Step functions are constant on half-open pieces `[t_{i-1}, t_i)`; the
//! point `t = 1` belongs to the last piece.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A real step function on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep", into = "RawStep")]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawStep> for StepFunction {
    type Error = Error;

    fn try_from(raw: RawStep) -> Result<Self> {
        StepFunction::new(raw.breakpoints, raw.values)
    }
}

impl From<StepFunction> for RawStep {
    fn from(f: StepFunction) -> Self {
        RawStep {
            breakpoints: f.breakpoints,
            values: f.values,
        }
    }
}

impl StepFunction {
    /// Breakpoints must run strictly increasing from exactly 0 to exactly 1,
    /// with one value per piece.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        const OP: &str = "StepFunction::new";
        let invalid = |reason: String| Error::InvalidInput { op: OP, reason };
        if breakpoints.len() < 2 {
            return Err(invalid("need at least the breakpoints 0 and 1".into()));
        }
        if breakpoints[0] != 0.0 || breakpoints[breakpoints.len() - 1] != 1.0 {
            return Err(invalid("breakpoints must start at 0 and end at 1".into()));
        }
        if breakpoints
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(invalid("breakpoints must be strictly increasing".into()));
        }
        if values.len() != breakpoints.len() - 1 {
            return Err(invalid(format!(
                "{} pieces but {} values",
                breakpoints.len() - 1,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values must be finite".into()));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![value])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pieces(&self) -> usize {
        self.values.len()
    }

    /// Index of the piece containing `t`.
    pub fn piece_index(&self, t: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidInput {
                op: "step_eval",
                reason: format!("t = {t} outside [0, 1]"),
            });
        }
        // Number of interior breakpoints <= t.
        let interior = &self.breakpoints[1..self.breakpoints.len() - 1];
        Ok(interior.partition_point(|&b| b <= t))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.piece_index(t)?])
    }
}

/// Merge the breakpoints of several step functions and return each one's
/// values on the common pieces.
pub fn refine_all(fs: &[&StepFunction]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut merged: Vec<f64> = fs
        .iter()
        .flat_map(|f| f.breakpoints.iter().copied())
        .collect();
    merged.sort_by(f64::total_cmp);
    merged.dedup();
    let values = fs
        .iter()
        .map(|f| {
            let mut piece = 0;
            merged[..merged.len() - 1]
                .iter()
                .map(|&left| {
                    while piece + 1 < f.pieces() && f.breakpoints[piece + 1] <= left {
                        piece += 1;
                    }
                    f.values[piece]
                })
                .collect()
        })
        .collect();
    (merged, values)
}

/// Both functions rewritten on the union of their breakpoints.
pub fn refine(f: &StepFunction, g: &StepFunction) -> (StepFunction, StepFunction) {
    let (breakpoints, mut values) = refine_all(&[f, g]);
    let gv = values.pop().expect("two functions");
    let fv = values.pop().expect("two functions");
    (
        StepFunction {
            breakpoints: breakpoints.clone(),
            values: fv,
        },
        StepFunction {
            breakpoints,
            values: gv,
        },
    )
}

/// An element of one of the supported lattices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeElement {
    Rm(Vec<f64>),
    Step(StepFunction),
}

impl From<StepFunction> for LatticeElement {
    fn from(f: StepFunction) -> Self {
        LatticeElement::Step(f)
    }
}

impl From<Vec<f64>> for LatticeElement {
    fn from(v: Vec<f64>) -> Self {
        LatticeElement::Rm(v)
    }
}

/// The coordinates of `n` lattice elements laid out side by side: one
/// `n`-tuple per coordinate of ℝᵐ, or per piece of the common refinement.
#[derive(Clone, Debug, PartialEq)]
pub struct Tuples {
    /// `Some(breakpoints)` for step functions.
    pub partition: Option<Vec<f64>>,
    pub tuples: Vec<Vec<f64>>,
}

impl Tuples {
    /// Reassemble an element from one scalar per tuple. Negative zeros are
    /// normalized so that printed results do not depend on them.
    pub fn assemble(&self, mut values: Vec<f64>) -> Result<LatticeElement> {
        values.iter_mut().for_each(|v| *v += 0.0);
        Ok(match &self.partition {
            None => LatticeElement::Rm(values),
            Some(bp) => LatticeElement::Step(StepFunction::new(bp.clone(), values)?),
        })
    }
}

impl LatticeElement {
    pub fn kind(&self) -> &'static str {
        match self {
            LatticeElement::Rm(_) => "rm",
            LatticeElement::Step(_) => "step",
        }
    }

    pub fn as_rm(&self) -> Option<&[f64]> {
        match self {
            LatticeElement::Rm(v) => Some(v),
            LatticeElement::Step(_) => None,
        }
    }

    pub fn as_step(&self) -> Option<&StepFunction> {
        match self {
            LatticeElement::Step(f) => Some(f),
            LatticeElement::Rm(_) => None,
        }
    }

    /// Transpose `fs` into per-coordinate (per-piece) tuples.
    pub fn tuples(op: &'static str, fs: &[LatticeElement]) -> Result<Tuples> {
        let first = fs.first().ok_or_else(|| Error::InvalidInput {
            op,
            reason: "no lattice elements given".into(),
        })?;
        match first {
            LatticeElement::Rm(v0) => {
                let m = v0.len();
                let mut cols = Vec::with_capacity(fs.len());
                for f in fs {
                    let v = f.as_rm().ok_or_else(|| mismatch(op, first, f))?;
                    check_dim(op, m, v.len())?;
                    cols.push(v);
                }
                let tuples = (0..m)
                    .map(|j| cols.iter().map(|c| c[j]).collect())
                    .collect();
                Ok(Tuples {
                    partition: None,
                    tuples,
                })
            }
            LatticeElement::Step(_) => {
                let steps = fs
                    .iter()
                    .map(|f| f.as_step().ok_or_else(|| mismatch(op, first, f)))
                    .collect::<Result<Vec<_>>>()?;
                let (breakpoints, values) = refine_all(&steps);
                let pieces = breakpoints.len() - 1;
                let tuples = (0..pieces)
                    .map(|i| values.iter().map(|v| v[i]).collect())
                    .collect();
                Ok(Tuples {
                    partition: Some(breakpoints),
                    tuples,
                })
            }
        }
    }

    fn zip_with(
        &self,
        other: &Self,
        op: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let t = Self::tuples(op, &[self.clone(), other.clone()])?;
        t.assemble(t.tuples.iter().map(|p| f(p[0], p[1])).collect())
    }

    pub fn join(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "join", f64::max)
    }

    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "meet", f64::min)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn scale(&self, c: f64) -> Self {
        match self {
            LatticeElement::Rm(v) => LatticeElement::Rm(v.iter().map(|x| c * x).collect()),
            LatticeElement::Step(f) => LatticeElement::Step(StepFunction {
                breakpoints: f.breakpoints.clone(),
                values: f.values.iter().map(|x| c * x).collect(),
            }),
        }
    }

    /// Coordinatewise (piecewise) order `self <= other`.
    pub fn le(&self, other: &Self) -> Result<bool> {
        let t = Self::tuples("le", &[self.clone(), other.clone()])?;
        Ok(t.tuples.iter().all(|p| p[0] <= p[1]))
    }

    /// Largest coordinatewise (piecewise) distance.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        let t = Self::tuples("sup_distance", &[self.clone(), other.clone()])?;
        Ok(t.tuples
            .iter()
            .map(|p| (p[0] - p[1]).abs())
            .fold(0.0, f64::max))
    }
}

fn mismatch(op: &'static str, a: &LatticeElement, b: &LatticeElement) -> Error {
    Error::LatticeMismatch {
        op,
        reason: format!("cannot combine {} with {}", a.kind(), b.kind()),
    }
}

/// A real-valued lattice homomorphism: a coordinate projection on ℝᵐ
/// (zero-based index) or point evaluation on step functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HomDescriptor {
    Coordinate { index: usize },
    PointEval { t: f64 },
}

impl HomDescriptor {
    pub fn eval(&self, f: &LatticeElement) -> Result<f64> {
        const OP: &str = "hom_eval";
        match (self, f) {
            (HomDescriptor::Coordinate { index }, LatticeElement::Rm(v)) => {
                v.get(*index).copied().ok_or(Error::IndexOutOfRange {
                    op: OP,
                    index: *index,
                    len: v.len(),
                })
            }
            (HomDescriptor::PointEval { t }, LatticeElement::Step(s)) => s.eval(*t),
            (d, f) => Err(Error::LatticeMismatch {
                op: OP,
                reason: format!("{d:?} does not act on {}", f.kind()),
            }),
        }
    }
}

/// Pointwise values of `f` at `grid`, an ℝᵐ element. This is a lattice
/// homomorphism `S[0,1] → ℝᵐ`; it is injective exactly when every piece of
/// `f` contains a grid point.
pub fn embed_step_to_grid(f: &StepFunction, grid: &[f64]) -> Result<LatticeElement> {
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput {
            op: "embed_step_to_grid",
            reason: "grid must be sorted".into(),
        });
    }
    Ok(LatticeElement::Rm(
        grid.iter().map(|&t| f.eval(t)).collect::<Result<_>>()?,
    ))
}

/// Whether every piece of the partition contains at least one grid point.
pub fn grid_separates(breakpoints: &[f64], grid: &[f64]) -> bool {
    breakpoints.windows(2).enumerate().all(|(i, w)| {
        let last = i + 2 == breakpoints.len();
        grid.iter()
            .any(|&t| t >= w[0] && (t < w[1] || (last && t <= w[1])))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f() -> StepFunction {
        StepFunction::new(vec![0.0, 0.5, 1.0], vec![1.0, 3.0]).unwrap()
    }

    #[test]
    fn join_meet_examples() {
        let a = LatticeElement::Rm(vec![1.0, -2.0, 0.0]);
        let b = LatticeElement::Rm(vec![0.0, 5.0, 0.0]);
        assert_eq!(a.join(&b).unwrap(), LatticeElement::Rm(vec![1.0, 5.0, 0.0]));

        let g = StepFunction::constant(2.0).unwrap();
        let j = LatticeElement::from(f()).join(&g.into()).unwrap();
        let j = j.as_step().unwrap();
        assert_eq!(j.breakpoints(), &[0.0, 0.5, 1.0]);
        assert_eq!(j.values(), &[2.0, 3.0]);

        let ff = LatticeElement::from(f());
        assert_eq!(ff.meet(&ff).unwrap(), ff);
    }

    #[test]
    fn lattice_mismatch() {
        let a = LatticeElement::Rm(vec![1.0]);
        let b = LatticeElement::from(f());
        assert!(matches!(a.join(&b), Err(Error::LatticeMismatch { .. })));
        let c = LatticeElement::Rm(vec![1.0, 2.0]);
        assert!(matches!(a.join(&c), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn refine_examples() {
        let g = StepFunction::new(vec![0.0, 1.0 / 3.0, 1.0], vec![7.0, -1.0]).unwrap();
        let (f2, g2) = refine(&f(), &g);
        assert_eq!(f2.breakpoints(), &[0.0, 1.0 / 3.0, 0.5, 1.0]);
        assert_eq!(g2.breakpoints(), f2.breakpoints());
        for t in [0.0, 0.4, 0.9] {
            assert_eq!(f2.eval(t).unwrap(), f().eval(t).unwrap());
            assert_eq!(g2.eval(t).unwrap(), g.eval(t).unwrap());
        }
        let (a, b) = refine(&f(), &f());
        assert_eq!((a, b), (f(), f()));
    }

    #[test]
    fn hom_eval_examples() {
        let v = LatticeElement::Rm(vec![7.0, -1.0, 4.0]);
        assert_eq!(
            HomDescriptor::Coordinate { index: 1 }.eval(&v).unwrap(),
            -1.0
        );
        let s = LatticeElement::from(f());
        assert_eq!(HomDescriptor::PointEval { t: 0.5 }.eval(&s).unwrap(), 3.0);
        assert_eq!(HomDescriptor::PointEval { t: 1.0 }.eval(&s).unwrap(), 3.0);
        assert_eq!(HomDescriptor::PointEval { t: 0.0 }.eval(&s).unwrap(), 1.0);
        assert!(HomDescriptor::Coordinate { index: 3 }.eval(&v).is_err());
        assert!(HomDescriptor::PointEval { t: 1.5 }.eval(&s).is_err());
        assert!(HomDescriptor::PointEval { t: 0.5 }.eval(&v).is_err());
    }

    #[test]
    fn embed_examples() {
        assert_eq!(
            embed_step_to_grid(&f(), &[0.25, 0.75]).unwrap(),
            LatticeElement::Rm(vec![1.0, 3.0])
        );
        let c = StepFunction::constant(5.0).unwrap();
        assert_eq!(
            embed_step_to_grid(&c, &[0.0, 0.3, 1.0]).unwrap(),
            LatticeElement::Rm(vec![5.0; 3])
        );
        assert!(grid_separates(f().breakpoints(), &[0.25, 0.75]));
        assert!(!grid_separates(f().breakpoints(), &[0.1, 0.2]));
    }

    #[test]
    fn invalid_step_functions() {
        assert!(StepFunction::new(vec![0.0, 0.5], vec![1.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 0.5, 0.5, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        let bad = r#"{"step": {"breakpoints": [0, 0.7, 0.2, 1], "values": [1, 2, 3]}}"#;
        assert!(serde_json::from_str::<LatticeElement>(bad).is_err());
        let good = r#"{"step": {"breakpoints": [0, 0.5, 1], "values": [1, 3]}}"#;
        assert_eq!(
            serde_json::from_str::<LatticeElement>(good).unwrap(),
            f().into()
        );
        assert_eq!(
            serde_json::from_str::<LatticeElement>(r#"{"rm": [1, 2]}"#).unwrap(),
            LatticeElement::Rm(vec![1.0, 2.0])
        );
    }

    fn arb_step() -> impl Strategy<Value = StepFunction> {
        proptest::collection::btree_set(1u32..1000, 0..6).prop_flat_map(|cuts| {
            let mut bp = vec![0.0];
            bp.extend(cuts.iter().map(|c| *c as f64 / 1000.0));
            bp.push(1.0);
            let k = bp.len() - 1;
            proptest::collection::vec(-5.0f64..5.0, k)
                .prop_map(move |vals| StepFunction::new(bp.clone(), vals).unwrap())
        })
    }

    proptest! {
        #[test]
        fn homomorphisms_are_linear_and_lattice_preserving(
            f in arb_step(), g in arb_step(), t in 0.0f64..=1.0,
            alpha in -3.0f64..3.0, beta in -3.0f64..3.0,
        ) {
            let (fe, ge) = (LatticeElement::from(f), LatticeElement::from(g));
            let hom = HomDescriptor::PointEval { t };
            let combo = fe.scale(alpha).add(&ge.scale(beta)).unwrap();
            let lhs = hom.eval(&combo).unwrap();
            let rhs = alpha * hom.eval(&fe).unwrap() + beta * hom.eval(&ge).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(
                hom.eval(&fe.join(&ge).unwrap()).unwrap(),
                hom.eval(&fe).unwrap().max(hom.eval(&ge).unwrap())
            );
            prop_assert_eq!(
                hom.eval(&fe.meet(&ge).unwrap()).unwrap(),
                hom.eval(&fe).unwrap().min(hom.eval(&ge).unwrap())
            );
        }

        #[test]
        fn coordinate_homs_on_rm(
            v in proptest::collection::vec(-5.0f64..5.0, 1..8),
            w in proptest::collection::vec(-5.0f64..5.0, 8),
        ) {
            let m = v.len();
            let (a, b) = (LatticeElement::Rm(v), LatticeElement::Rm(w[..m].to_vec()));
            for index in 0..m {
                let hom = HomDescriptor::Coordinate { index };
                prop_assert_eq!(
                    hom.eval(&a.join(&b).unwrap()).unwrap(),
                    hom.eval(&a).unwrap().max(hom.eval(&b).unwrap())
                );
                prop_assert_eq!(
                    hom.eval(&a.add(&b).unwrap()).unwrap(),
                    hom.eval(&a).unwrap() + hom.eval(&b).unwrap()
                );
            }
        }

        #[test]
        fn refine_preserves_values(f in arb_step(), g in arb_step(), ts in proptest::collection::vec(0.0f64..=1.0, 10)) {
            let (f2, g2) = refine(&f, &g);
            for t in ts {
                prop_assert_eq!(f2.eval(t).unwrap(), f.eval(t).unwrap());
                prop_assert_eq!(g2.eval(t).unwrap(), g.eval(t).unwrap());
            }
        }

        #[test]
        fn order_is_a_partial_order(f in arb_step(), g in arb_step(), h in arb_step()) {
            let (f, g, h) = (LatticeElement::from(f), LatticeElement::from(g), LatticeElement::from(h));
            prop_assert!(f.le(&f).unwrap());
            if f.le(&g).unwrap() && g.le(&f).unwrap() {
                prop_assert_eq!(f.sup_distance(&g).unwrap(), 0.0);
            }
            if f.le(&g).unwrap() && g.le(&h).unwrap() {
                prop_assert!(f.le(&h).unwrap());
            }
            let j = f.join(&g).unwrap();
            prop_assert!(f.le(&j).unwrap() && g.le(&j).unwrap());
        }

        #[test]
        fn embedding_is_a_homomorphism(f in arb_step(), g in arb_step(), grid in proptest::collection::vec(0.0f64..=1.0, 1..12)) {
            let mut grid = grid;
            grid.sort_by(f64::total_cmp);
            let joined = LatticeElement::from(f.clone()).join(&g.clone().into()).unwrap();
            let lhs = embed_step_to_grid(joined.as_step().unwrap(), &grid).unwrap();
            let rhs = embed_step_to_grid(&f, &grid).unwrap().join(&embed_step_to_grid(&g, &grid).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
