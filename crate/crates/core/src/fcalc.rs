//! The functional calculus `h(f₁, …, fₙ)` over ℝᵐ and step functions.
//!
//! Everything is evaluated coordinate by coordinate (piece by piece on the
//! common refinement): coordinate projections and point evaluations are
//! lattice homomorphisms, so they interchange with the calculus and the
//! lattice-level suprema reduce to scalar ones.

use serde::{Deserialize, Serialize};

use crate::convexsets::{feasible_point, ConvexCompactSet, DEFAULT_MAX_ITER};
use crate::error::{check_dim, Error, Result};
use crate::homog::sphere::{default_density, sphere_grid};
use crate::homog::{Extremum, Family, PhFunction, PhMap, SublinearMap, SuperlinearMap};
use crate::lattice::LatticeElement;
use crate::linalg::dot;

/// Default tolerance for saddle agreement in [`fc_saddle`].
pub const DEFAULT_SADDLE_TOL: f64 = 1e-6;

fn check_arity(op: &'static str, n: usize, fs: &[LatticeElement]) -> Result<()> {
    check_dim(op, n, fs.len())
}

/// `φ(f₁, …, fₙ)`: per coordinate, the support function of `∂φ(0)`.
pub fn fc_sublinear(phi: &SublinearMap, fs: &[LatticeElement]) -> Result<LatticeElement> {
    const OP: &str = "fc_sublinear";
    check_arity(OP, phi.dim(), fs)?;
    let t = LatticeElement::tuples(OP, fs)?;
    let set = phi.subdiff();
    t.assemble(t.tuples.iter().map(|x| set.support_unchecked(x)).collect())
}

/// `ψ(f₁, …, fₙ)`: per coordinate, `-support(∂̄ψ(0), -x)`.
pub fn fc_superlinear(psi: &SuperlinearMap, fs: &[LatticeElement]) -> Result<LatticeElement> {
    const OP: &str = "fc_superlinear";
    check_arity(OP, psi.dim(), fs)?;
    let t = LatticeElement::tuples(OP, fs)?;
    t.tuples
        .iter()
        .map(|x| psi.eval(x))
        .collect::<Result<Vec<_>>>()
        .and_then(|v| t.assemble(v))
}

/// Per-run numbers reported next to a calculus result.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest number of family members visited at any coordinate.
    pub family_terms_used: usize,
    /// Largest deviation from the closed-form oracle at any coordinate, or
    /// zero when the function has none.
    pub max_residual: f64,
}

/// A lattice element together with its [`Diagnostics`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FcResult {
    pub element: LatticeElement,
    pub diagnostics: Diagnostics,
}

/// `h(f₁, …, fₙ)` through the primary family of `h` (the infimum family when
/// both are present).
pub fn fc_semicontinuous(h: &PhFunction, fs: &[LatticeElement], tol: f64) -> Result<FcResult> {
    fc_side(h, h.representation().primary(), fs, tol)
}

/// `h(f₁, …, fₙ)` through the chosen family.
pub fn fc_side(
    h: &PhFunction,
    side: Extremum,
    fs: &[LatticeElement],
    tol: f64,
) -> Result<FcResult> {
    const OP: &str = "fc_semicontinuous";
    check_arity(OP, h.dim(), fs)?;
    let t = LatticeElement::tuples(OP, fs)?;
    let mut diagnostics = Diagnostics::default();
    let mut values = Vec::with_capacity(t.tuples.len());
    for x in &t.tuples {
        let fv = h.family_value(side, x, tol)?;
        diagnostics.family_terms_used = diagnostics.family_terms_used.max(fv.terms_used);
        if h.has_oracle() {
            let r = (fv.value - h.oracle_eval(x)?).abs();
            diagnostics.max_residual = diagnostics.max_residual.max(r);
        }
        values.push(fv.value);
    }
    Ok(FcResult {
        element: t.assemble(values)?,
        diagnostics,
    })
}

/// The lattice infimum (supremum) of `φ(f₁, …, fₙ)` over the whole family,
/// formed with lattice meets (joins) rather than per-coordinate scalars.
/// Generated families contribute their full budget.
pub fn fc_family_lattice(
    h: &PhFunction,
    side: Extremum,
    fs: &[LatticeElement],
) -> Result<LatticeElement> {
    const OP: &str = "fc_family_lattice";
    let repr = h.representation();
    let missing = || Error::InvalidInput {
        op: OP,
        reason: format!("{} has no {side:?} family", h.name()),
    };
    match side {
        Extremum::Inf => fold_family(
            OP,
            repr.inf_family().ok_or_else(missing)?,
            fs,
            fc_sublinear,
            |a, b| a.meet(b),
        ),
        Extremum::Sup => fold_family(
            OP,
            repr.sup_family().ok_or_else(missing)?,
            fs,
            fc_superlinear,
            |a, b| a.join(b),
        ),
    }
}

fn fold_family<M: PhMap>(
    op: &'static str,
    family: &Family<M>,
    fs: &[LatticeElement],
    apply: impl Fn(&M, &[LatticeElement]) -> Result<LatticeElement>,
    combine: impl Fn(&LatticeElement, &LatticeElement) -> Result<LatticeElement>,
) -> Result<LatticeElement> {
    let mut acc: Option<Result<LatticeElement>> = None;
    family.visit(|_, m| {
        let next = apply(m, fs).and_then(|v| match &acc {
            Some(Ok(a)) => combine(a, &v),
            _ => Ok(v),
        });
        let failed = next.is_err();
        acc = Some(next);
        if failed {
            std::ops::ControlFlow::Break(())
        } else {
            std::ops::ControlFlow::Continue(())
        }
    });
    acc.unwrap_or(Err(Error::EmptyFamily { op }))
}

/// Linear maps `x ↦ a^{φψ}·x` indexed by a finite `Φ × Ψ`, with
/// `ψ <= a^{φψ}·x <= φ` for every pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSaddle", into = "RawSaddle")]
pub struct SaddleFamily {
    dim: usize,
    phi_labels: Vec<String>,
    psi_labels: Vec<String>,
    /// `coefficients[i][j]` pairs `Φ[i]` with `Ψ[j]`.
    coefficients: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSaddle {
    dim: usize,
    phi_count: usize,
    psi_count: usize,
    phi_labels: Vec<String>,
    psi_labels: Vec<String>,
    coefficients: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<RawSaddle> for SaddleFamily {
    type Error = Error;

    fn try_from(raw: RawSaddle) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidInput {
            op: "SaddleFamily",
            reason,
        };
        if raw.phi_count == 0 || raw.psi_count == 0 {
            return Err(invalid("both index sets must be nonempty".into()));
        }
        if raw.phi_labels.len() != raw.phi_count || raw.psi_labels.len() != raw.psi_count {
            return Err(invalid(
                "label counts disagree with phi_count/psi_count".into(),
            ));
        }
        if raw.coefficients.len() != raw.phi_count {
            return Err(invalid(format!(
                "expected {} coefficient rows, found {}",
                raw.phi_count,
                raw.coefficients.len()
            )));
        }
        for (i, row) in raw.coefficients.iter().enumerate() {
            if row.len() != raw.psi_count {
                return Err(invalid(format!("row {i} has {} entries", row.len())));
            }
            for (j, a) in row.iter().enumerate() {
                if a.len() != raw.dim {
                    return Err(invalid(format!(
                        "coefficient ({i}, {j}) has dimension {}",
                        a.len()
                    )));
                }
                if a.iter().any(|c| !c.is_finite()) {
                    return Err(invalid(format!("coefficient ({i}, {j}) is not finite")));
                }
            }
        }
        Ok(SaddleFamily {
            dim: raw.dim,
            phi_labels: raw.phi_labels,
            psi_labels: raw.psi_labels,
            coefficients: raw.coefficients,
        })
    }
}

impl From<SaddleFamily> for RawSaddle {
    fn from(s: SaddleFamily) -> Self {
        RawSaddle {
            dim: s.dim,
            phi_count: s.phi_labels.len(),
            psi_count: s.psi_labels.len(),
            phi_labels: s.phi_labels,
            psi_labels: s.psi_labels,
            coefficients: s.coefficients,
        }
    }
}

impl SaddleFamily {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phi_count(&self) -> usize {
        self.phi_labels.len()
    }

    pub fn psi_count(&self) -> usize {
        self.psi_labels.len()
    }

    pub fn phi_labels(&self) -> &[String] {
        &self.phi_labels
    }

    pub fn psi_labels(&self) -> &[String] {
        &self.psi_labels
    }

    pub fn coefficient(&self, phi: usize, psi: usize) -> &[f64] {
        &self.coefficients[phi][psi]
    }

    /// Overwrite one coefficient. No ordering check is made, so the result
    /// need not be a saddle representation any more.
    pub fn set_coefficient(&mut self, phi: usize, psi: usize, a: Vec<f64>) -> Result<()> {
        const OP: &str = "set_coefficient";
        check_dim(OP, self.dim, a.len())?;
        let len = self.phi_count();
        let row = self
            .coefficients
            .get_mut(phi)
            .ok_or(Error::IndexOutOfRange {
                op: OP,
                index: phi,
                len,
            })?;
        let len = row.len();
        let slot = row.get_mut(psi).ok_or(Error::IndexOutOfRange {
            op: OP,
            index: psi,
            len,
        })?;
        *slot = a;
        Ok(())
    }
}

/// Both orderings of a saddle evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleValue {
    pub infsup: f64,
    pub supinf: f64,
}

impl SaddleValue {
    pub fn gap(&self) -> f64 {
        (self.infsup - self.supinf).abs()
    }
}

/// Build `{a^{φψ}}` with [`feasible_point`] after checking `ψ <= φ` on the
/// default sphere grid.
pub fn saddle_build(
    phis: &[SublinearMap],
    psis: &[SuperlinearMap],
    tol: f64,
) -> Result<SaddleFamily> {
    let n = phis.first().map(|p| p.dim()).unwrap_or(0);
    saddle_build_on_grid(phis, psis, tol, default_density(n))
}

/// [`saddle_build`] with an explicit grid density for the ordering check.
pub fn saddle_build_on_grid(
    phis: &[SublinearMap],
    psis: &[SuperlinearMap],
    tol: f64,
    density: usize,
) -> Result<SaddleFamily> {
    const OP: &str = "saddle_build";
    if phis.is_empty() || psis.is_empty() {
        return Err(Error::EmptyFamily { op: OP });
    }
    let n = phis[0].dim();
    for p in phis {
        check_dim(OP, n, p.dim())?;
    }
    for p in psis {
        check_dim(OP, n, p.dim())?;
    }
    for x in sphere_grid(n, density) {
        let (i, lo) = argext(phis.iter().map(|p| p.eval(&x)), f64::lt)?;
        let (j, hi) = argext(psis.iter().map(|p| p.eval(&x)), f64::gt)?;
        if hi > lo + tol {
            return Err(Error::NotOrdered {
                op: OP,
                phi_index: i,
                psi_index: j,
                point: x,
                excess: hi - lo,
            });
        }
    }
    let coefficients = phis
        .iter()
        .map(|phi| {
            psis.iter()
                .map(|psi| feasible_point(phi.subdiff(), psi.superdiff(), tol, DEFAULT_MAX_ITER))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SaddleFamily {
        dim: n,
        phi_labels: phis.iter().map(|p| p.label().to_string()).collect(),
        psi_labels: psis.iter().map(|p| p.label().to_string()).collect(),
        coefficients,
    })
}

/// Index and value of the first extreme element under `better`.
fn argext(
    values: impl Iterator<Item = Result<f64>>,
    better: fn(&f64, &f64) -> bool,
) -> Result<(usize, f64)> {
    let mut best = (0, f64::NAN);
    for (i, v) in values.enumerate() {
        let v = v?;
        if i == 0 || better(&v, &best.1) {
            best = (i, v);
        }
    }
    Ok(best)
}

fn saddle_value(s: &SaddleFamily, x: &[f64]) -> SaddleValue {
    let mut infsup = f64::INFINITY;
    let mut col_min = vec![f64::INFINITY; s.psi_count()];
    for row in &s.coefficients {
        let mut row_max = f64::NEG_INFINITY;
        for (j, a) in row.iter().enumerate() {
            let v = dot(a, x);
            row_max = row_max.max(v);
            col_min[j] = col_min[j].min(v);
        }
        infsup = infsup.min(row_max);
    }
    let supinf = col_min.into_iter().fold(f64::NEG_INFINITY, f64::max);
    SaddleValue { infsup, supinf }
}

/// `inf_φ sup_ψ a^{φψ}·x` and `sup_ψ inf_φ a^{φψ}·x`.
pub fn saddle_eval(s: &SaddleFamily, x: &[f64]) -> Result<SaddleValue> {
    check_dim("saddle_eval", s.dim, x.len())?;
    Ok(saddle_value(s, x))
}

/// Per-coordinate saddle evaluation; returns the inf-sup ordering and fails
/// with `SaddleGap` where the two orderings differ by more than `tol`.
pub fn fc_saddle(s: &SaddleFamily, fs: &[LatticeElement], tol: f64) -> Result<LatticeElement> {
    const OP: &str = "fc_saddle";
    check_arity(OP, s.dim, fs)?;
    let t = LatticeElement::tuples(OP, fs)?;
    let mut values = Vec::with_capacity(t.tuples.len());
    for (coordinate, x) in t.tuples.iter().enumerate() {
        let v = saddle_value(s, x);
        if v.gap() > tol {
            return Err(Error::SaddleGap {
                op: OP,
                coordinate,
                gap: v.gap(),
            });
        }
        values.push(v.infsup);
    }
    t.assemble(values)
}

/// The two-by-two hinge family `Φ = {max(x₁, 0), 0}`, `Ψ = {min(x₁, 0), 0}`
/// on ℝ², both representing `h = 0`. Its rows differ, so corrupting a single
/// coefficient can open a saddle gap.
pub fn hinge_family() -> (Vec<SublinearMap>, Vec<SuperlinearMap>) {
    let hinge = ConvexCompactSet::polytope(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).expect("valid");
    let origin = ConvexCompactSet::singleton(vec![0.0, 0.0]).expect("valid");
    (
        vec![
            SublinearMap::new(hinge.clone(), "max(x1,0)"),
            SublinearMap::new(origin.clone(), "zero"),
        ],
        vec![
            SuperlinearMap::new(hinge, "min(x1,0)"),
            SuperlinearMap::new(origin, "zero"),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homog::{angle_family, builtin, inscribed_polygon, Representation};
    use crate::lattice::StepFunction;
    use proptest::prelude::*;

    fn rm(v: &[f64]) -> LatticeElement {
        LatticeElement::Rm(v.to_vec())
    }

    fn disk() -> SublinearMap {
        SublinearMap::new(ConvexCompactSet::ball(vec![0.0, 0.0], 1.0).unwrap(), "disk")
    }

    #[test]
    fn sublinear_examples() {
        let out = fc_sublinear(&disk(), &[rm(&[3.0, 0.0]), rm(&[4.0, 0.0])]).unwrap();
        assert_eq!(out, rm(&[5.0, 0.0]));

        let phi11 = SublinearMap::new(
            ConvexCompactSet::polytope(vec![vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap(),
            "phi11",
        );
        let out = fc_sublinear(&phi11, &[rm(&[1.0, -1.0]), rm(&[1.0, 2.0])]).unwrap();
        assert_eq!(out, rm(&[2.0, 1.0]));

        let lin = SublinearMap::linear(vec![2.0, -3.0], "lin").unwrap();
        let out = fc_sublinear(&lin, &[rm(&[1.0, 0.5]), rm(&[1.0, -1.0])]).unwrap();
        assert_eq!(out, rm(&[-1.0, 4.0]));
    }

    #[test]
    fn superlinear_examples() {
        let psi11 = SuperlinearMap::new(
            ConvexCompactSet::polytope(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            "psi11",
        );
        let out = fc_superlinear(&psi11, &[rm(&[2.0, -3.0]), rm(&[1.0, 1.0])]).unwrap();
        assert_eq!(out, rm(&[1.0, -3.0]));

        let lin = SuperlinearMap::linear(vec![1.0, 1.0], "lin").unwrap();
        let out = fc_superlinear(&lin, &[rm(&[1.0, 2.0]), rm(&[3.0, 4.0])]).unwrap();
        assert_eq!(out, rm(&[4.0, 6.0]));

        let env = SuperlinearMap::new(
            ConvexCompactSet::ball(vec![0.0, 0.0], 1.0).unwrap(),
            "-norm",
        );
        let out = fc_superlinear(&env, &[rm(&[3.0, 0.0]), rm(&[4.0, 0.0])]).unwrap();
        assert_eq!(out, rm(&[-5.0, 0.0]));
    }

    #[test]
    fn arity_and_lattice_errors() {
        let err = fc_sublinear(&disk(), &[rm(&[1.0])]).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                op: "fc_sublinear",
                ..
            }
        ));
        let step = LatticeElement::Step(StepFunction::constant(1.0).unwrap());
        let err = fc_sublinear(&disk(), &[rm(&[1.0]), step]).unwrap_err();
        assert!(matches!(err, Error::LatticeMismatch { .. }));
    }

    #[test]
    fn semicontinuous_examples() {
        let ex1 = builtin("example-7.1").unwrap();
        let out =
            fc_semicontinuous(&ex1, &[rm(&[1.0, -1.0, 0.0]), rm(&[1.0, 2.0, -1.0])], 1e-9).unwrap();
        assert_eq!(out.element, rm(&[2.0, 0.0, 0.0]));
        assert_eq!(out.diagnostics.max_residual, 0.0);

        let ex2 = builtin("example-7.2").unwrap();
        let f = StepFunction::new(vec![0.0, 0.5, 1.0], vec![2.0, 5.0]).unwrap();
        let g = StepFunction::new(vec![0.0, 0.5, 1.0], vec![3.0, -1.0]).unwrap();
        let out = fc_semicontinuous(&ex2, &[f.into(), g.into()], 1e-9).unwrap();
        let s = out.element.as_step().unwrap();
        assert_eq!(s.breakpoints(), &[0.0, 0.5, 1.0]);
        assert_eq!(s.values(), &[2.0, -1.0]);

        let single =
            PhFunction::new("phi", Representation::Usc(Family::Finite(vec![disk()]))).unwrap();
        let fs = [rm(&[3.0, 1.0]), rm(&[4.0, -2.0])];
        assert_eq!(
            fc_semicontinuous(&single, &fs, 1e-9).unwrap().element,
            fc_sublinear(&disk(), &fs).unwrap()
        );
    }

    #[test]
    fn lattice_level_family_path_matches() {
        let h = PhFunction::new(
            "pair",
            Representation::Usc(Family::Finite(vec![
                disk(),
                SublinearMap::new(
                    ConvexCompactSet::polytope(vec![vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap(),
                    "p",
                ),
            ])),
        )
        .unwrap();
        let fs = [rm(&[3.0, -1.0, 0.5]), rm(&[4.0, 2.0, -0.5])];
        let direct = fc_family_lattice(&h, Extremum::Inf, &fs).unwrap();
        let pointwise = fc_semicontinuous(&h, &fs, 1e-9).unwrap().element;
        assert_eq!(direct, pointwise);
    }

    #[test]
    fn saddle_examples() {
        // Segment inside the square.
        let square = SublinearMap::new(
            ConvexCompactSet::polytope(vec![
                vec![1.0, 1.0],
                vec![1.0, -1.0],
                vec![-1.0, 1.0],
                vec![-1.0, -1.0],
            ])
            .unwrap(),
            "abs-sum",
        );
        let seg = SuperlinearMap::new(
            ConvexCompactSet::polytope(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            "min",
        );
        let s = saddle_build(
            std::slice::from_ref(&square),
            std::slice::from_ref(&seg),
            1e-9,
        )
        .unwrap();
        let a = s.coefficient(0, 0);
        assert!(seg.superdiff().contains(a, 1e-9).unwrap());
        assert!(square.subdiff().contains(a, 1e-9).unwrap());

        // Identical singletons force the coefficient.
        let lin = SublinearMap::linear(vec![2.0, -1.0], "a").unwrap();
        let lin_psi = SuperlinearMap::linear(vec![2.0, -1.0], "a").unwrap();
        let s = saddle_build(&[lin], &[lin_psi], 1e-9).unwrap();
        assert_eq!(s.coefficient(0, 0), &[2.0, -1.0]);
        let v = saddle_eval(&s, &[1.0, 1.0]).unwrap();
        assert_eq!((v.infsup, v.supinf), (1.0, 1.0));
        let fs = [rm(&[1.0, 0.0]), rm(&[0.0, 1.0])];
        assert_eq!(fc_saddle(&s, &fs, 1e-6).unwrap(), rm(&[2.0, -1.0]));

        // Angle singletons force each coefficient to the angle vector.
        let disk_phi = [disk()];
        let angles = angle_family(32);
        let s = saddle_build(&disk_phi, &angles, 1e-9).unwrap();
        for (j, psi) in angles.iter().enumerate() {
            let u = psi.superdiff().reference_point();
            assert!(crate::linalg::dist(s.coefficient(0, j), &u) < 1e-9);
        }
        let v = saddle_eval(&s, &[1.0, 0.0]).unwrap();
        assert!((v.infsup - 1.0).abs() < 1e-9 && (v.supinf - 1.0).abs() < 1e-9);
    }

    #[test]
    fn saddle_gap_is_small_for_built_families() {
        let (phis, psis) = hinge_family();
        let s = saddle_build(&phis, &psis, 1e-9).unwrap();
        for x in sphere_grid(2, 720) {
            let v = saddle_eval(&s, &x).unwrap();
            assert!(v.infsup - v.supinf >= -1e-12);
            assert!(v.gap() <= 2e-9, "{x:?} {v:?}");
        }
    }

    #[test]
    fn square_mean_saddle_matches_polygon() {
        let poly = SublinearMap::new(inscribed_polygon(32).unwrap(), "p32");
        let s = saddle_build(std::slice::from_ref(&poly), &angle_family(32), 1e-9).unwrap();
        let fs = [rm(&[3.0, -1.0, 0.2]), rm(&[4.0, 2.0, 0.1])];
        let via_saddle = fc_saddle(&s, &fs, 1e-6).unwrap();
        let via_poly = fc_sublinear(&poly, &fs).unwrap();
        assert!(via_saddle.sup_distance(&via_poly).unwrap() < 1e-8);
        let via_disk = fc_sublinear(&disk(), &fs).unwrap();
        assert!(via_saddle.sup_distance(&via_disk).unwrap() < 5e-3 * 5.0);
    }

    #[test]
    fn corrupted_coefficient_opens_a_gap() {
        let (phis, psis) = hinge_family();
        let mut s = saddle_build(&phis, &psis, 1e-9).unwrap();
        s.set_coefficient(1, 1, vec![1.0, 0.0]).unwrap();
        let err = fc_saddle(&s, &[rm(&[1.0]), rm(&[0.0])], 1e-6).unwrap_err();
        assert!(
            matches!(err, Error::SaddleGap { coordinate: 0, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn not_ordered_is_detected() {
        let small = SublinearMap::new(
            ConvexCompactSet::ball(vec![0.0, 0.0], 0.5).unwrap(),
            "half-disk",
        );
        let big = SuperlinearMap::linear(vec![1.0, 0.0], "e1").unwrap();
        let err = saddle_build(&[small], &[big], 1e-9).unwrap_err();
        match err {
            Error::NotOrdered { excess, .. } => assert!(excess > 0.4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            saddle_build(&[], &[], 1e-9),
            Err(Error::EmptyFamily { .. })
        ));
    }

    #[test]
    fn saddle_json_round_trip() {
        let (phis, psis) = hinge_family();
        let s = saddle_build(&phis, &psis, 1e-9).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"phi_count\":2"));
        let back: SaddleFamily = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let bad = text.replace("\"psi_count\":2", "\"psi_count\":3");
        assert!(serde_json::from_str::<SaddleFamily>(&bad).is_err());
    }

    fn semicontinuous_envelopes() -> &'static [(PhFunction, crate::homog::Envelopes)] {
        static CELL: std::sync::OnceLock<Vec<(PhFunction, crate::homog::Envelopes)>> =
            std::sync::OnceLock::new();
        CELL.get_or_init(|| {
            ["example-7.1", "example-7.2"]
                .iter()
                .map(|name| {
                    let h = builtin(name).unwrap();
                    let env = h.domination_envelopes(720).unwrap();
                    (h, env)
                })
                .collect()
        })
    }

    fn arb_tuple(n: usize) -> impl Strategy<Value = Vec<LatticeElement>> {
        (1usize..6).prop_flat_map(move |m| {
            proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, m), n)
                .prop_map(|vs| vs.into_iter().map(LatticeElement::Rm).collect())
        })
    }

    proptest! {
        #[test]
        fn envelopes_bracket_the_calculus(fs in arb_tuple(2)) {
            for (h, env) in semicontinuous_envelopes() {
                let lo = fc_superlinear(&env.lower, &fs).unwrap();
                let mid = fc_semicontinuous(h, &fs, 1e-9).unwrap().element;
                let hi = fc_sublinear(&env.upper, &fs).unwrap();
                let lo_v = lo.as_rm().unwrap();
                let mid_v = mid.as_rm().unwrap();
                let hi_v = hi.as_rm().unwrap();
                for j in 0..mid_v.len() {
                    prop_assert!(lo_v[j] <= mid_v[j] + 1e-9);
                    prop_assert!(mid_v[j] <= hi_v[j] + 1e-9);
                }
            }
        }

        #[test]
        fn continuous_sides_agree(fs in arb_tuple(2)) {
            let h = builtin("abs-sum").unwrap();
            let inf = fc_side(&h, Extremum::Inf, &fs, 1e-9).unwrap().element;
            let sup = fc_side(&h, Extremum::Sup, &fs, 1e-9).unwrap().element;
            prop_assert!(inf.sup_distance(&sup).unwrap() <= 1e-12);
        }
    }
}
