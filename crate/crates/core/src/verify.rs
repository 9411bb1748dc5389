//! Brute-force oracles and randomized property checks.
//!
//! Every check draws its inputs from a ChaCha stream keyed by `(seed, trial)`,
//! so a failure digest such as `interchange/seed=1/trial=17` pins down the
//! exact inputs that produced it.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convexsets::{ConvexCompactSet, Shape};
use crate::error::{check_dim, Error, Result};
use crate::fcalc::{
    fc_family_lattice, fc_saddle, fc_semicontinuous, fc_side, fc_sublinear, fc_superlinear,
    hinge_family, saddle_build, saddle_eval, SaddleFamily,
};
use crate::homog::sphere::sphere_grid;
use crate::homog::{
    angle_family, builtin, Extremum, Family, PhFunction, Representation, SublinearMap,
    SuperlinearMap,
};
use crate::lattice::{
    embed_step_to_grid, grid_separates, HomDescriptor, LatticeElement, StepFunction,
};

/// Default seed for the suite and for individual checks.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub digest: String,
    pub observed: Option<f64>,
    pub expected: Option<f64>,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub seed: u64,
    pub cases: usize,
    pub failures: Vec<Failure>,
    pub passed: bool,
}

struct Recorder {
    name: String,
    seed: u64,
    cases: usize,
    failures: Vec<Failure>,
}

impl Recorder {
    fn new(name: impl Into<String>, seed: u64) -> Self {
        Self {
            name: name.into(),
            seed,
            cases: 0,
            failures: Vec::new(),
        }
    }

    fn digest(&self, trial: usize) -> String {
        format!("{}/seed={}/trial={trial}", self.name, self.seed)
    }

    fn rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }

    fn compare(&mut self, trial: usize, observed: f64, expected: f64, tol: f64) {
        let diff = (observed - expected).abs();
        if diff.is_nan() || diff > tol {
            self.failures.push(Failure {
                digest: self.digest(trial),
                observed: Some(observed),
                expected: Some(expected),
                tolerance: tol,
                note: None,
            });
        }
    }

    fn fail(&mut self, trial: usize, tol: f64, note: String) {
        self.failures.push(Failure {
            digest: self.digest(trial),
            observed: None,
            expected: None,
            tolerance: tol,
            note: Some(note),
        });
    }

    /// Record the worst coordinate of `observed` against `expected`.
    fn compare_elements(
        &mut self,
        trial: usize,
        observed: Result<LatticeElement>,
        expected: Result<LatticeElement>,
        tol: f64,
    ) {
        match (observed, expected) {
            (Ok(o), Ok(e)) => match worst_coordinate(&o, &e) {
                Ok(Some((ov, ev))) => self.compare(trial, ov, ev, tol),
                Ok(None) => {}
                Err(err) => self.fail(trial, tol, err.to_string()),
            },
            (Err(err), _) | (_, Err(err)) => self.fail(trial, tol, err.to_string()),
        }
    }

    fn finish(self) -> CheckReport {
        CheckReport {
            passed: self.failures.is_empty(),
            name: self.name,
            seed: self.seed,
            cases: self.cases,
            failures: self.failures,
        }
    }
}

/// The coordinate pair with the largest absolute difference.
fn worst_coordinate(a: &LatticeElement, b: &LatticeElement) -> Result<Option<(f64, f64)>> {
    let t = LatticeElement::tuples("compare", &[a.clone(), b.clone()])?;
    let mut worst: Option<(f64, f64)> = None;
    for p in &t.tuples {
        let d = (p[0] - p[1]).abs();
        if worst.is_none_or(|(x, y)| d > (x - y).abs() || d.is_nan()) {
            worst = Some((p[0], p[1]));
        }
    }
    Ok(worst)
}

/// `h(f₁, …, fₙ)` by applying the closed-form oracle of `h` pointwise: per
/// coordinate of ℝᵐ, or per piece of the common partition of step functions.
pub fn oracle_fc(h: &PhFunction, fs: &[LatticeElement]) -> Result<LatticeElement> {
    const OP: &str = "oracle_fc";
    if !h.has_oracle() {
        return Err(Error::MissingOracle { op: OP });
    }
    check_dim(OP, h.dim(), fs.len())?;
    let kind = fs[0].kind();
    if let Some(f) = fs.iter().find(|f| f.kind() != kind) {
        return Err(Error::LatticeMismatch {
            op: OP,
            reason: format!("cannot combine {kind} with {}", f.kind()),
        });
    }
    match &fs[0] {
        LatticeElement::Rm(v0) => {
            let m = v0.len();
            let mut out = Vec::with_capacity(m);
            for f in fs {
                check_dim(OP, m, f.as_rm().map_or(0, |v| v.len()))?;
            }
            for j in 0..m {
                let x: Vec<f64> = fs.iter().map(|f| f.as_rm().expect("checked")[j]).collect();
                out.push(h.oracle_eval(&x)?);
            }
            Ok(LatticeElement::Rm(out))
        }
        LatticeElement::Step(_) => {
            let steps: Vec<&StepFunction> =
                fs.iter().map(|f| f.as_step().expect("checked")).collect();
            let mut bp: Vec<f64> = steps
                .iter()
                .flat_map(|s| s.breakpoints().to_vec())
                .collect();
            bp.sort_by(f64::total_cmp);
            bp.dedup();
            let mut values = Vec::with_capacity(bp.len() - 1);
            for &t in &bp[..bp.len() - 1] {
                let x = steps
                    .iter()
                    .map(|s| s.eval(t))
                    .collect::<Result<Vec<_>>>()?;
                values.push(h.oracle_eval(&x)?);
            }
            Ok(LatticeElement::Step(StepFunction::new(bp, values)?))
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m)
        .map(|_| {
            // Integers hit the case boundaries (zeros, ties) of the examples.
            if rng.random_bool(0.15) {
                rng.random_range(-5i32..=5) as f64
            } else {
                rng.random_range(-5.0..=5.0)
            }
        })
        .collect()
}

fn random_rm_tuple(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<LatticeElement> {
    (0..n)
        .map(|_| LatticeElement::Rm(random_vector(rng, m)))
        .collect()
}

/// Step function with up to six pieces on a 1/64 lattice of breakpoints.
fn random_step(rng: &mut ChaCha8Rng) -> StepFunction {
    let pieces = rng.random_range(1..=6usize);
    let mut cuts: Vec<u32> = (0..pieces - 1)
        .map(|_| rng.random_range(1..64u32))
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut bp = vec![0.0];
    bp.extend(cuts.iter().map(|&c| c as f64 / 64.0));
    bp.push(1.0);
    let values = random_vector(rng, bp.len() - 1);
    StepFunction::new(bp, values).expect("valid by construction")
}

fn random_set(rng: &mut ChaCha8Rng, n: usize) -> ConvexCompactSet {
    if rng.random_bool(0.5) {
        let k = rng.random_range(1..=8usize);
        let vertices = (0..k).map(|_| random_vector(rng, n)).collect();
        ConvexCompactSet::polytope(vertices).expect("valid by construction")
    } else {
        let center = random_vector(rng, n);
        ConvexCompactSet::ball(center, rng.random_range(0.0..3.0)).expect("valid by construction")
    }
}

fn random_polytope(rng: &mut ChaCha8Rng, n: usize) -> ConvexCompactSet {
    let k = rng.random_range(1..=8usize);
    let vertices = (0..k).map(|_| random_vector(rng, n)).collect();
    ConvexCompactSet::polytope(vertices).expect("valid by construction")
}

/// `‖fc_semicontinuous(h, fs) - oracle_fc(h, fs)‖_∞ <= tol` for random
/// `fs ∈ [-5, 5]ᵐ` with `m` drawn from `dims`.
pub fn check_engine_vs_oracle(
    h: &PhFunction,
    trials: usize,
    dims: std::ops::RangeInclusive<usize>,
    tol: f64,
    seed: u64,
) -> CheckReport {
    let mut rec = Recorder::new(format!("engine-vs-oracle:{}", h.name()), seed);
    for trial in 0..trials {
        let mut rng = rec.rng(trial);
        let m = rng.random_range(dims.clone());
        let fs = random_rm_tuple(&mut rng, h.dim(), m);
        rec.cases += 1;
        let engine = fc_semicontinuous(h, &fs, tol.min(1e-9)).map(|r| r.element);
        rec.compare_elements(trial, engine, oracle_fc(h, &fs), tol);
    }
    rec.finish()
}

/// Fault injected into a check to show that it can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    None,
    /// The calculus side uses a set translated by `1e-3` along the first
    /// axis, so its support function is wrong.
    CorruptSupport,
}

fn corrupt(set: &ConvexCompactSet) -> ConvexCompactSet {
    let shift = |v: &[f64]| {
        let mut v = v.to_vec();
        v[0] += 1e-3;
        v
    };
    match set.shape() {
        Shape::Polytope { vertices } => {
            ConvexCompactSet::polytope(vertices.iter().map(|v| shift(v)).collect()).expect("valid")
        }
        Shape::Ball { center, radius } => {
            ConvexCompactSet::ball(shift(center), *radius).expect("valid")
        }
    }
}

/// `T(φ(f₁, …, fₙ)) = φ(Tf₁, …, Tfₙ)` for random sets, random elements of
/// ℝᵐ or of the step lattice, and a random coordinate projection or point
/// evaluation `T`. Even trials use sublinear maps, odd ones superlinear.
pub fn check_interchange(trials: usize, tol: f64, seed: u64, fault: Fault) -> CheckReport {
    let name = match fault {
        Fault::None => "interchange".to_string(),
        Fault::CorruptSupport => "interchange:corrupt-support".to_string(),
    };
    let mut rec = Recorder::new(name, seed);
    for trial in 0..trials {
        let mut rng = rec.rng(trial);
        let n = rng.random_range(1..=4usize);
        let set = random_set(&mut rng, n);
        let engine_set = match fault {
            Fault::None => set.clone(),
            Fault::CorruptSupport => corrupt(&set),
        };
        let (fs, hom) = if rng.random_bool(0.5) {
            let m = rng.random_range(1..=8usize);
            let fs = random_rm_tuple(&mut rng, n, m);
            let index = rng.random_range(0..m);
            (fs, HomDescriptor::Coordinate { index })
        } else {
            let fs = (0..n)
                .map(|_| LatticeElement::Step(random_step(&mut rng)))
                .collect::<Vec<_>>();
            let t = rng.random_range(0.0..=1.0);
            (fs, HomDescriptor::PointEval { t })
        };
        rec.cases += 1;
        let outcome = (|| -> Result<(f64, f64)> {
            let tfs = fs.iter().map(|f| hom.eval(f)).collect::<Result<Vec<_>>>()?;
            if trial % 2 == 0 {
                let lhs = hom.eval(&fc_sublinear(&SublinearMap::new(engine_set, "phi"), &fs)?)?;
                Ok((lhs, SublinearMap::new(set, "phi").eval(&tfs)?))
            } else {
                let lhs = hom.eval(&fc_superlinear(
                    &SuperlinearMap::new(engine_set, "psi"),
                    &fs,
                )?)?;
                Ok((lhs, SuperlinearMap::new(set, "psi").eval(&tfs)?))
            }
        })();
        match outcome {
            Ok((lhs, rhs)) => rec.compare(trial, lhs, rhs, tol),
            Err(e) => rec.fail(trial, tol, e.to_string()),
        }
    }
    rec.finish()
}

/// For a semicontinuous `h`: `T(h(f₁, …, fₙ)) = h(Tf₁, …, Tfₙ)` within `tol`,
/// and the inequality `T(h(f⃗)) <= h(Tf⃗)` never fails by more than `1e-12`.
pub fn check_semicontinuous_interchange(
    h: &PhFunction,
    trials: usize,
    tol: f64,
    seed: u64,
) -> CheckReport {
    let mut rec = Recorder::new(format!("semicontinuous-interchange:{}", h.name()), seed);
    for trial in 0..trials {
        let mut rng = rec.rng(trial);
        let m = rng.random_range(1..=8usize);
        let fs = random_rm_tuple(&mut rng, h.dim(), m);
        let index = rng.random_range(0..m);
        let hom = HomDescriptor::Coordinate { index };
        rec.cases += 1;
        let outcome = (|| -> Result<(f64, f64)> {
            let lhs = hom.eval(&fc_semicontinuous(h, &fs, 1e-9)?.element)?;
            let tfs = fs.iter().map(|f| hom.eval(f)).collect::<Result<Vec<_>>>()?;
            Ok((lhs, h.eval_family(&tfs, 1e-9)?.value))
        })();
        match outcome {
            Ok((lhs, rhs)) => {
                rec.compare(trial, lhs, rhs, tol);
                if lhs > rhs + 1e-12 {
                    rec.fail(
                        trial,
                        1e-12,
                        format!("T(h(f)) = {lhs} exceeds h(Tf) = {rhs}"),
                    );
                }
            }
            Err(e) => rec.fail(trial, tol, e.to_string()),
        }
    }
    rec.finish()
}

/// `|a_k| <= φ(e_k) ∨ φ(-e_k) + 1e-12` for every vertex `a` of random
/// polytopes `∂φ(0)`.
pub fn check_coordinate_bound(trials: usize, seed: u64) -> CheckReport {
    const TOL: f64 = 1e-12;
    let mut rec = Recorder::new("coordinate-bound", seed);
    for trial in 0..trials {
        let mut rng = rec.rng(trial);
        let n = rng.random_range(1..=8usize);
        let set = random_polytope(&mut rng, n);
        rec.cases += 1;
        let Shape::Polytope { vertices } = set.shape() else {
            unreachable!("random_polytope builds polytopes")
        };
        for k in 0..n {
            let bound = set.coordinate_bound(k).expect("k < n");
            for v in vertices {
                if v[k].abs() > bound + TOL {
                    rec.compare(trial, v[k].abs(), bound, TOL);
                }
            }
        }
    }
    rec.finish()
}

/// Two representations of the same function give the same calculus within
/// `tol` on random pairs in `(ℝᵐ)²`.
pub fn check_rep_independence(
    name: &str,
    a: &PhFunction,
    b: &PhFunction,
    trials: usize,
    m: usize,
    tol: f64,
    seed: u64,
) -> CheckReport {
    let mut rec = Recorder::new(format!("rep-independence:{name}"), seed);
    for trial in 0..trials {
        let mut rng = rec.rng(trial);
        let fs = random_rm_tuple(&mut rng, a.dim(), m);
        rec.cases += 1;
        let ea = fc_semicontinuous(a, &fs, 1e-9).map(|r| r.element);
        let eb = fc_semicontinuous(b, &fs, 1e-9).map(|r| r.element);
        rec.compare_elements(trial, ea, eb, tol);
    }
    rec.finish()
}

/// For a continuous `h` with both families, the infimum and supremum paths
/// of the calculus agree within `tol`. The infimum path is also checked
/// against the lattice-level meet over a finite family.
pub fn check_continuous_agreement(
    h: &PhFunction,
    trials: usize,
    tol: f64,
    seed: u64,
) -> CheckReport {
    let mut rec = Recorder::new(format!("continuous-agreement:{}", h.name()), seed);
    let finite_inf = matches!(
        h.representation(),
        Representation::Continuous {
            inf: Family::Finite(_),
            ..
        }
    );
    for trial in 0..trials {
        let mut rng = rec.rng(trial);
        let m = rng.random_range(1..=8usize);
        let fs = random_rm_tuple(&mut rng, h.dim(), m);
        rec.cases += 1;
        let inf = fc_side(h, Extremum::Inf, &fs, 1e-9).map(|r| r.element);
        let sup = fc_side(h, Extremum::Sup, &fs, 1e-9).map(|r| r.element);
        if finite_inf {
            rec.compare_elements(
                trial,
                fc_family_lattice(h, Extremum::Inf, &fs),
                inf.clone(),
                1e-12,
            );
        }
        rec.compare_elements(trial, inf, sup, tol);
    }
    rec.finish()
}

/// `ψ_env(f⃗) <= h(f⃗) <= φ_env(f⃗)` coordinatewise within `tol`, with the
/// norm envelopes from [`PhFunction::domination_envelopes`].
pub fn check_envelope_ordering(h: &PhFunction, trials: usize, tol: f64, seed: u64) -> CheckReport {
    let mut rec = Recorder::new(format!("envelope-ordering:{}", h.name()), seed);
    let env = match h.domination_envelopes(crate::homog::sphere::default_density(h.dim())) {
        Ok(env) => env,
        Err(e) => {
            rec.fail(0, tol, e.to_string());
            return rec.finish();
        }
    };
    for trial in 0..trials {
        let mut rng = rec.rng(trial);
        let m = rng.random_range(1..=16usize);
        let fs = random_rm_tuple(&mut rng, h.dim(), m);
        rec.cases += 1;
        let outcome = (|| -> Result<()> {
            let lo = fc_superlinear(&env.lower, &fs)?;
            let mid = fc_semicontinuous(h, &fs, 1e-9)?.element;
            let hi = fc_sublinear(&env.upper, &fs)?;
            let t = LatticeElement::tuples("envelope-ordering", &[lo, mid, hi])?;
            for p in &t.tuples {
                if p[0] > p[1] + tol {
                    rec.compare(trial, p[0], p[1], tol);
                }
                if p[1] > p[2] + tol {
                    rec.compare(trial, p[1], p[2], tol);
                }
            }
            Ok(())
        })();
        if let Err(e) = outcome {
            rec.fail(trial, tol, e.to_string());
        }
    }
    rec.finish()
}

/// How [`check_sublattice_invariance`] picks its sample grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    /// One point in every piece of the common partition, plus both ends.
    Refining,
    /// The two points `{1/4, 3/4}` only; generally not separating.
    Coarse,
}

/// `embed(h(f⃗)) = h(embed f⃗)` exactly, for random step tuples and a grid.
/// Each trial also requires the grid to separate the common partition, so
/// that the embedding is injective and the ℝᵐ computation determines the
/// step result.
pub fn check_sublattice_invariance(trials: usize, seed: u64, mode: GridMode) -> CheckReport {
    let name = match mode {
        GridMode::Refining => "sublattice-invariance".to_string(),
        GridMode::Coarse => "sublattice-invariance:coarse-grid".to_string(),
    };
    let mut rec = Recorder::new(name, seed);
    let functions: Vec<PhFunction> = [
        "example-7.1",
        "example-7.2",
        "abs-sum",
        "max-coord",
        "square-mean",
    ]
    .iter()
    .map(|n| builtin(n).expect("built-in"))
    .collect();
    for trial in 0..trials {
        let mut rng = rec.rng(trial);
        let h = &functions[trial % functions.len()];
        let steps: Vec<StepFunction> = (0..h.dim()).map(|_| random_step(&mut rng)).collect();
        let mut bp: Vec<f64> = steps
            .iter()
            .flat_map(|s| s.breakpoints().to_vec())
            .collect();
        bp.sort_by(f64::total_cmp);
        bp.dedup();
        let grid: Vec<f64> = match mode {
            GridMode::Refining => {
                let mut g = vec![0.0];
                g.extend(bp.windows(2).map(|w| 0.5 * (w[0] + w[1])));
                g.push(1.0);
                g
            }
            GridMode::Coarse => vec![0.25, 0.75],
        };
        rec.cases += 1;
        if !grid_separates(&bp, &grid) {
            rec.fail(
                trial,
                0.0,
                format!("grid {grid:?} does not separate partition {bp:?}"),
            );
            continue;
        }
        let step_elems: Vec<LatticeElement> =
            steps.iter().cloned().map(LatticeElement::Step).collect();
        let outcome = (|| -> Result<(LatticeElement, LatticeElement)> {
            let on_steps = fc_semicontinuous(h, &step_elems, 1e-9)?.element;
            let lhs = embed_step_to_grid(on_steps.as_step().expect("step in, step out"), &grid)?;
            let embedded = steps
                .iter()
                .map(|s| embed_step_to_grid(s, &grid))
                .collect::<Result<Vec<_>>>()?;
            let rhs = fc_semicontinuous(h, &embedded, 1e-9)?.element;
            Ok((lhs, rhs))
        })();
        match outcome {
            Ok((lhs, rhs)) => rec.compare_elements(trial, Ok(lhs), Ok(rhs), 0.0),
            Err(e) => rec.fail(trial, 0.0, e.to_string()),
        }
    }
    rec.finish()
}

/// The square-mean saddle from the unit disk and `count` angle singletons.
pub fn square_mean_saddle(count: usize) -> Result<SaddleFamily> {
    let disk = SublinearMap::new(ConvexCompactSet::ball(vec![0.0, 0.0], 1.0)?, "unit-disk");
    saddle_build(&[disk], &angle_family(count), 1e-9)
}

/// Per-point saddle gap on the circle grid, and `fc_saddle` against the
/// calculus through the supremum family it was built from.
fn check_saddle_family(
    name: &str,
    s: &SaddleFamily,
    psis: &[SuperlinearMap],
    trials: usize,
    tol: f64,
    seed: u64,
) -> CheckReport {
    let mut rec = Recorder::new(format!("saddle:{name}"), seed);
    for (i, x) in sphere_grid(s.dim(), 720).iter().enumerate() {
        rec.cases += 1;
        match saddle_eval(s, x) {
            Ok(v) => rec.compare(i, v.infsup, v.supinf, tol),
            Err(e) => rec.fail(i, tol, e.to_string()),
        }
    }
    let h = match PhFunction::new(name, Representation::Lsc(Family::Finite(psis.to_vec()))) {
        Ok(h) => h,
        Err(e) => {
            rec.fail(0, tol, e.to_string());
            return rec.finish();
        }
    };
    for trial in 0..trials {
        let mut rng = rec.rng(720 + trial);
        let m = rng.random_range(1..=8usize);
        let fs = random_rm_tuple(&mut rng, s.dim(), m);
        rec.cases += 1;
        let saddle = fc_saddle(s, &fs, tol);
        let family = fc_semicontinuous(&h, &fs, 1e-12).map(|r| r.element);
        // Values reach 5·√n, so allow relative round-off on top of `tol`.
        rec.compare_elements(720 + trial, saddle, family, tol.max(1e-12) * 10.0);
    }
    rec.finish()
}

/// Saddle checks on the 32-angle square-mean family and the hinge family,
/// or, with `corrupt`, on the hinge family with one coefficient replaced.
pub fn check_saddle(trials: usize, tol: f64, seed: u64, corrupt: bool) -> Vec<CheckReport> {
    let (phis, psis) = hinge_family();
    let hinge = saddle_build(&phis, &psis, 1e-9);
    if corrupt {
        let mut rec = Recorder::new("saddle:hinge-corrupted", seed);
        let mut s = match hinge {
            Ok(s) => s,
            Err(e) => {
                rec.fail(0, tol, e.to_string());
                return vec![rec.finish()];
            }
        };
        s.set_coefficient(1, 1, vec![1.0, 0.0]).expect("in range");
        for trial in 0..trials {
            let mut rng = rec.rng(trial);
            let m = rng.random_range(1..=8usize);
            let mut fs = random_rm_tuple(&mut rng, 2, m);
            // Make the first coordinate land on the corrupted direction.
            if let [LatticeElement::Rm(f), LatticeElement::Rm(g)] = fs.as_mut_slice() {
                f[0] = f[0].abs().max(0.5);
                g[0] = 0.0;
            }
            rec.cases += 1;
            if let Err(e) = fc_saddle(&s, &fs, tol) {
                rec.fail(trial, tol, e.to_string());
            }
        }
        return vec![rec.finish()];
    }
    let mut reports = Vec::new();
    match square_mean_saddle(32) {
        Ok(s) => reports.push(check_saddle_family(
            "square-mean-32",
            &s,
            &angle_family(32),
            trials,
            tol,
            seed,
        )),
        Err(e) => {
            let mut rec = Recorder::new("saddle:square-mean-32", seed);
            rec.fail(0, tol, e.to_string());
            reports.push(rec.finish());
        }
    }
    match hinge {
        Ok(s) => reports.push(check_saddle_family("hinge", &s, &psis, trials, tol, seed)),
        Err(e) => {
            let mut rec = Recorder::new("saddle:hinge", seed);
            rec.fail(0, tol, e.to_string());
            reports.push(rec.finish());
        }
    }
    reports
}

/// `fc_saddle(S, f⃗)` against `fc_sublinear(φ, f⃗)` on random pairs in
/// `(ℝᵐ)²`.
pub fn check_saddle_reference(
    s: &SaddleFamily,
    reference: &SublinearMap,
    trials: usize,
    m: usize,
    tol: f64,
    seed: u64,
) -> CheckReport {
    let mut rec = Recorder::new(format!("saddle-reference:{}", reference.label()), seed);
    for trial in 0..trials {
        let mut rng = rec.rng(trial);
        let fs = random_rm_tuple(&mut rng, s.dim(), m);
        rec.cases += 1;
        rec.compare_elements(
            trial,
            fc_saddle(s, &fs, crate::fcalc::DEFAULT_SADDLE_TOL),
            fc_sublinear(reference, &fs),
            tol,
        );
    }
    rec.finish()
}

/// Wrap a fault-injected check: passes exactly when the inner check failed.
pub fn expect_failure(inner: CheckReport) -> CheckReport {
    let failures = if inner.passed {
        vec![Failure {
            digest: format!("{}/seed={}", inner.name, inner.seed),
            observed: None,
            expected: None,
            tolerance: 0.0,
            note: Some("injected fault was not detected".into()),
        }]
    } else {
        Vec::new()
    };
    CheckReport {
        name: format!("{}/negative-control", inner.name),
        seed: inner.seed,
        cases: inner.cases,
        passed: failures.is_empty(),
        failures,
    }
}

/// Finite angle family for square-mean as a sup-superlinear function.
pub fn square_mean_angles(count: usize) -> Result<PhFunction> {
    PhFunction::new(
        format!("square-mean-angles-{count}"),
        Representation::Lsc(Family::Finite(angle_family(count))),
    )
}

/// Square-mean through the unit disk alone.
pub fn square_mean_disk() -> Result<PhFunction> {
    let disk = SublinearMap::new(ConvexCompactSet::ball(vec![0.0, 0.0], 1.0)?, "unit-disk");
    PhFunction::new(
        "square-mean-disk",
        Representation::Usc(Family::Finite(vec![disk])),
    )
}

/// Names accepted by [`run_check`].
pub const CHECK_NAMES: [&str; 9] = [
    "continuous-agreement",
    "coordinate-bound",
    "engine-vs-oracle",
    "envelope-ordering",
    "interchange",
    "rep-independence",
    "saddle",
    "semicontinuous-interchange",
    "sublattice-invariance",
];

/// Options for [`run_check`]; `None` picks the check's default.
#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    pub trials: Option<usize>,
    pub tol: Option<f64>,
    pub function: Option<PhFunction>,
}

/// Run a single named check, with its positive form only.
pub fn run_check(name: &str, seed: u64, opts: &CheckOptions) -> Result<Vec<CheckReport>> {
    let trials = |d: usize| opts.trials.unwrap_or(d);
    let tol = |d: f64| opts.tol.unwrap_or(d);
    let function = |d: &str| -> Result<PhFunction> {
        match &opts.function {
            Some(h) => Ok(h.clone()),
            None => builtin(d),
        }
    };
    Ok(match name {
        "continuous-agreement" => vec![check_continuous_agreement(
            &function("square-mean")?,
            trials(50),
            tol(1e-6),
            seed,
        )],
        "coordinate-bound" => vec![check_coordinate_bound(trials(200), seed)],
        "engine-vs-oracle" => vec![check_engine_vs_oracle(
            &function("example-7.1")?,
            trials(500),
            1..=16,
            tol(1e-6),
            seed,
        )],
        "envelope-ordering" => vec![check_envelope_ordering(
            &function("example-7.1")?,
            trials(200),
            tol(1e-9),
            seed,
        )],
        "interchange" => vec![check_interchange(
            trials(1000),
            tol(1e-12),
            seed,
            Fault::None,
        )],
        "rep-independence" => vec![check_rep_independence(
            "square-mean-720",
            &square_mean_disk()?,
            &square_mean_angles(720)?,
            trials(200),
            8,
            tol(1e-3),
            seed,
        )],
        "saddle" => check_saddle(trials(100), tol(1e-9), seed, false),
        "semicontinuous-interchange" => vec![check_semicontinuous_interchange(
            &function("example-7.2")?,
            trials(200),
            tol(1e-6),
            seed,
        )],
        "sublattice-invariance" => vec![check_sublattice_invariance(
            trials(200),
            seed,
            GridMode::Refining,
        )],
        other => {
            return Err(Error::InvalidInput {
                op: "check",
                reason: format!(
                    "unknown check {other:?}; expected one of {}",
                    CHECK_NAMES.join(", ")
                ),
            })
        }
    })
}

/// The full default suite, sorted by report name. Negative controls appear
/// as `<name>/negative-control` and pass when their fault was detected.
pub fn default_suite(seed: u64) -> Result<Vec<CheckReport>> {
    type Job = Box<dyn Fn() -> Result<Vec<CheckReport>> + Send + Sync>;
    let mut jobs: Vec<Job> = Vec::new();
    for name in ["example-7.1", "example-7.2", "square-mean"] {
        jobs.push(Box::new(move || {
            Ok(vec![check_engine_vs_oracle(
                &builtin(name)?,
                500,
                1..=16,
                1e-6,
                seed,
            )])
        }));
    }
    for name in ["example-7.1", "example-7.2"] {
        jobs.push(Box::new(move || {
            Ok(vec![check_envelope_ordering(
                &builtin(name)?,
                200,
                1e-9,
                seed,
            )])
        }));
        jobs.push(Box::new(move || {
            Ok(vec![check_semicontinuous_interchange(
                &builtin(name)?,
                200,
                1e-6,
                seed,
            )])
        }));
    }
    for name in ["abs-sum", "max-coord", "square-mean"] {
        jobs.push(Box::new(move || {
            Ok(vec![check_continuous_agreement(
                &builtin(name)?,
                50,
                1e-6,
                seed,
            )])
        }));
    }
    jobs.push(Box::new(move || {
        Ok(vec![
            check_interchange(1000, 1e-12, seed, Fault::None),
            expect_failure(check_interchange(100, 1e-12, seed, Fault::CorruptSupport)),
            check_coordinate_bound(200, seed),
        ])
    }));
    jobs.push(Box::new(move || {
        let disk = square_mean_disk()?;
        Ok(vec![
            check_rep_independence(
                "square-mean-720",
                &disk,
                &square_mean_angles(720)?,
                200,
                8,
                1e-3,
                seed,
            ),
            check_rep_independence("identical", &disk, &square_mean_disk()?, 100, 8, 0.0, seed),
            expect_failure(check_rep_independence(
                "square-mean-8",
                &disk,
                &square_mean_angles(8)?,
                50,
                8,
                1e-6,
                seed,
            )),
        ])
    }));
    jobs.push(Box::new(move || {
        Ok(vec![
            check_sublattice_invariance(200, seed, GridMode::Refining),
            expect_failure(check_sublattice_invariance(50, seed, GridMode::Coarse)),
        ])
    }));
    jobs.push(Box::new(move || Ok(check_saddle(100, 1e-9, seed, false))));
    jobs.push(Box::new(move || {
        Ok(check_saddle(20, 1e-6, seed, true)
            .into_iter()
            .map(expect_failure)
            .collect())
    }));

    let mut reports = Vec::new();
    for batch in run_bounded(&jobs) {
        reports.extend(batch?);
    }
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(reports)
}

/// Runs jobs on at most `SUITE_THREADS` workers; results keep job order.
fn run_bounded<T: Send>(jobs: &[Box<dyn Fn() -> T + Send + Sync>]) -> Vec<T> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(SUITE_THREADS)
        .min(jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new(jobs.iter().map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let value = job();
                slots.lock().unwrap()[i] = Some(value);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|v| v.expect("every job ran"))
        .collect()
}

const SUITE_THREADS: usize = 4;

#[cfg(test)]
mod tests {
    use super::*;

    fn rm(v: &[f64]) -> LatticeElement {
        LatticeElement::Rm(v.to_vec())
    }

    #[test]
    fn oracle_examples() {
        let ex1 = builtin("example-7.1").unwrap();
        assert_eq!(
            oracle_fc(&ex1, &[rm(&[1.0, -1.0, 0.0]), rm(&[1.0, 2.0, -1.0])]).unwrap(),
            rm(&[2.0, 0.0, 0.0])
        );
        let ex2 = builtin("example-7.2").unwrap();
        assert_eq!(
            oracle_fc(&ex2, &[rm(&[2.0, 5.0, -1.0]), rm(&[3.0, -1.0, 1.0])]).unwrap(),
            rm(&[2.0, -1.0, 0.0])
        );
        for name in ["example-7.1", "example-7.2", "square-mean"] {
            let h = builtin(name).unwrap();
            assert_eq!(
                oracle_fc(&h, &[rm(&[0.0; 4]), rm(&[0.0; 4])]).unwrap(),
                rm(&[0.0; 4])
            );
        }
        let no_oracle = square_mean_disk().unwrap();
        assert!(matches!(
            oracle_fc(&no_oracle, &[rm(&[1.0]), rm(&[1.0])]),
            Err(Error::MissingOracle { .. })
        ));
    }

    #[test]
    fn oracle_on_step_functions() {
        let ex2 = builtin("example-7.2").unwrap();
        let f = StepFunction::new(vec![0.0, 0.5, 1.0], vec![2.0, 5.0]).unwrap();
        let g = StepFunction::new(vec![0.0, 0.25, 1.0], vec![3.0, -1.0]).unwrap();
        let out = oracle_fc(&ex2, &[f.into(), g.into()]).unwrap();
        let s = out.as_step().unwrap();
        assert_eq!(s.breakpoints(), &[0.0, 0.25, 0.5, 1.0]);
        assert_eq!(s.values(), &[2.0, -1.0, -1.0]);
    }

    #[test]
    fn engine_matches_oracle() {
        for name in ["example-7.1", "example-7.2", "square-mean"] {
            let r = check_engine_vs_oracle(&builtin(name).unwrap(), 100, 1..=16, 1e-6, 7);
            assert!(r.passed, "{r:?}");
            assert_eq!(r.cases, 100);
        }
    }

    #[test]
    fn interchange_passes_and_fault_is_caught() {
        for seed in [1, 2, 3] {
            let r = check_interchange(300, 1e-12, seed, Fault::None);
            assert!(r.passed, "{r:?}");
        }
        let r = check_interchange(50, 1e-12, 1, Fault::CorruptSupport);
        assert!(!r.passed);
        assert!(r.failures[0]
            .digest
            .starts_with("interchange:corrupt-support/seed=1/trial="));
    }

    #[test]
    fn singleton_interchange_is_exact() {
        let phi = SublinearMap::linear(vec![2.0, -1.0], "a").unwrap();
        let fs = [rm(&[1.5, -0.25]), rm(&[3.0, 7.0])];
        let out = fc_sublinear(&phi, &fs).unwrap();
        for index in 0..2 {
            let hom = HomDescriptor::Coordinate { index };
            let tfs: Vec<f64> = fs.iter().map(|f| hom.eval(f).unwrap()).collect();
            assert_eq!(hom.eval(&out).unwrap(), phi.eval(&tfs).unwrap());
        }
    }

    #[test]
    fn rep_independence_examples() {
        let disk = square_mean_disk().unwrap();
        let fine = check_rep_independence(
            "720",
            &disk,
            &square_mean_angles(720).unwrap(),
            50,
            8,
            1e-3,
            1,
        );
        assert!(fine.passed, "{fine:?}");
        let same =
            check_rep_independence("same", &disk, &square_mean_disk().unwrap(), 20, 8, 0.0, 1);
        assert!(same.passed);
        let coarse =
            check_rep_independence("8", &disk, &square_mean_angles(8).unwrap(), 20, 8, 1e-6, 1);
        assert!(!coarse.passed);
    }

    #[test]
    fn sublattice_examples() {
        assert!(check_sublattice_invariance(100, 1, GridMode::Refining).passed);
        assert!(!check_sublattice_invariance(50, 1, GridMode::Coarse).passed);
    }

    #[test]
    fn single_piece_steps_reduce_to_scalars() {
        let h = builtin("example-7.1").unwrap();
        let f = StepFunction::constant(1.5).unwrap();
        let g = StepFunction::constant(2.0).unwrap();
        let out = fc_semicontinuous(&h, &[f.into(), g.into()], 1e-9)
            .unwrap()
            .element;
        assert_eq!(
            out.as_step().unwrap().values(),
            &[h.oracle_eval(&[1.5, 2.0]).unwrap()]
        );
    }

    #[test]
    fn saddle_checks() {
        for r in check_saddle(20, 1e-9, 1, false) {
            assert!(r.passed, "{r:?}");
        }
        for r in check_saddle(5, 1e-6, 1, true) {
            assert!(!r.passed);
        }
    }

    #[test]
    fn reports_serialize_with_spec_fields() {
        let r = expect_failure(check_interchange(10, 1e-12, 1, Fault::CorruptSupport));
        let v = serde_json::to_value(&r).unwrap();
        for key in ["name", "cases", "failures", "passed", "seed"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["passed"], true);
    }

    #[test]
    fn reruns_are_identical() {
        let a = check_engine_vs_oracle(&builtin("example-7.2").unwrap(), 30, 1..=16, 1e-6, 9);
        let b = check_engine_vs_oracle(&builtin("example-7.2").unwrap(), 30, 1..=16, 1e-6, 9);
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_check_is_an_input_error() {
        assert!(matches!(
            run_check("nope", 1, &CheckOptions::default()),
            Err(Error::InvalidInput { .. })
        ));
    }
}
