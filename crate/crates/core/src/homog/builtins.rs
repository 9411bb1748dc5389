//! Built-in positively homogeneous functions with explicit families and
//! closed-form oracles.
//!
//! | name          | kind | family                                           |
//! |---------------|------|--------------------------------------------------|
//! | `example-7.1` | usc  | `inf_{m,n>=1} (mx + ny)⁺`                         |
//! | `example-7.2` | lsc  | `sup_{λ∈{0,1}, n>=1} min{λx, ny}`                 |
//! | `square-mean` | cts  | `√(x² + y²)`: unit disk / linear maps on angles  |
//! | `abs-sum`     | cts  | `|x| + |y|`: square / four sign vectors           |
//! | `max-coord`   | cts  | `max{x, y}`: segment / two coordinate maps        |
//!
//! The two infinite families interleave a plain diagonal enumeration of the
//! index set with a dyadic one (indices that are powers of two). The dyadic
//! stream reaches large indices within a few hundred maps, which is where
//! near-axis inputs attain their extremum; the plain stream keeps every
//! index of the family in the enumeration.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{Family, MapGenerator, PhFunction, Representation, SublinearMap, SuperlinearMap};
use crate::convexsets::ConvexCompactSet;
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: [&str; 5] = [
    "example-7.1",
    "example-7.2",
    "square-mean",
    "abs-sum",
    "max-coord",
];

/// Largest exponent used by the dyadic index streams.
const MAX_DYADIC_EXPONENT: u32 = 60;
/// Coarsest angle grid of the square-mean sup-family.
const BASE_ANGLES: usize = 512;
/// Angles drawn from the square-mean sup-family: four dyadic refinements of
/// the base grid.
const ANGLE_BUDGET: usize = BASE_ANGLES << 4;

pub fn builtin(name: &str) -> Result<PhFunction> {
    match name {
        "example-7.1" => example_71(),
        "example-7.2" => example_72(),
        "square-mean" => square_mean(),
        "abs-sum" => abs_sum(),
        "max-coord" => max_coord(),
        other => Err(Error::UnknownBuiltin {
            op: "builtin",
            name: other.to_string(),
        }),
    }
}

fn example_71() -> Result<PhFunction> {
    let family = Family::generated(Arc::new(PositivePartGenerator));
    Ok(
        PhFunction::new("example-7.1", Representation::Usc(family))?.with_oracle(Arc::new(
            |x: &[f64]| {
                if x[0] >= 0.0 && x[1] >= 0.0 {
                    x[0] + x[1]
                } else {
                    0.0
                }
            },
        )),
    )
}

fn example_72() -> Result<PhFunction> {
    let family = Family::generated(Arc::new(MinPairGenerator));
    Ok(
        PhFunction::new("example-7.2", Representation::Lsc(family))?.with_oracle(Arc::new(
            |x: &[f64]| {
                if x[0] > 0.0 && x[1] > 0.0 {
                    x[0]
                } else if x[1] < 0.0 {
                    x[1]
                } else {
                    0.0
                }
            },
        )),
    )
}

fn square_mean() -> Result<PhFunction> {
    let disk = SublinearMap::new(ConvexCompactSet::ball(vec![0.0, 0.0], 1.0)?, "unit-disk");
    let sup = Family::Generated {
        generator: Arc::new(AngleGenerator { base: BASE_ANGLES }),
        budget: ANGLE_BUDGET,
        // Each refinement level improves at a single angle, so stalling is
        // meaningless here; the budget alone bounds the scan.
        window: ANGLE_BUDGET,
    };
    let repr = Representation::Continuous {
        inf: Family::Finite(vec![disk]),
        sup,
    };
    Ok(PhFunction::new("square-mean", repr)?.with_oracle(Arc::new(|x: &[f64]| x[0].hypot(x[1]))))
}

fn abs_sum() -> Result<PhFunction> {
    let signs = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]];
    let square = ConvexCompactSet::polytope(signs.iter().map(|s| s.to_vec()).collect())?;
    let sup = signs
        .iter()
        .map(|s| SuperlinearMap::linear(s.to_vec(), format!("({},{})", s[0], s[1])))
        .collect::<Result<Vec<_>>>()?;
    let repr = Representation::Continuous {
        inf: Family::Finite(vec![SublinearMap::new(square, "square")]),
        sup: Family::Finite(sup),
    };
    Ok(
        PhFunction::new("abs-sum", repr)?
            .with_oracle(Arc::new(|x: &[f64]| x[0].abs() + x[1].abs())),
    )
}

fn max_coord() -> Result<PhFunction> {
    let segment = ConvexCompactSet::polytope(vec![vec![1.0, 0.0], vec![0.0, 1.0]])?;
    let repr = Representation::Continuous {
        inf: Family::Finite(vec![SublinearMap::new(segment, "max")]),
        sup: Family::Finite(vec![
            SuperlinearMap::linear(vec![1.0, 0.0], "x")?,
            SuperlinearMap::linear(vec![0.0, 1.0], "y")?,
        ]),
    };
    Ok(PhFunction::new("max-coord", repr)?.with_oracle(Arc::new(|x: &[f64]| x[0].max(x[1]))))
}

/// `count` equally spaced unit vectors as linear (singleton) superlinear
/// maps, starting at angle zero.
pub fn angle_family(count: usize) -> Vec<SuperlinearMap> {
    unit_vectors(count)
        .into_iter()
        .enumerate()
        .map(|(k, u)| {
            SuperlinearMap::linear(u, format!("theta_{k}/{count}"))
                .expect("unit vectors are finite and nonempty")
        })
        .collect()
}

/// The regular `count`-gon inscribed in the unit circle, vertex at angle zero.
pub fn inscribed_polygon(count: usize) -> Result<ConvexCompactSet> {
    ConvexCompactSet::polytope(unit_vectors(count))
}

fn unit_vectors(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / count as f64;
            vec![theta.cos(), theta.sin()]
        })
        .collect()
}

/// Alternates between two iterators, draining whichever outlives the other.
struct Interleave<A, B> {
    a: A,
    b: B,
    take_a: bool,
}

impl<T, A: Iterator<Item = T>, B: Iterator<Item = T>> Iterator for Interleave<A, B> {
    type Item = T;

    fn next(&mut self) -> Option<T> {
        let first = if self.take_a {
            self.a.next()
        } else {
            self.b.next()
        };
        self.take_a = !self.take_a;
        first.or_else(|| {
            if self.take_a {
                self.a.next()
            } else {
                self.b.next()
            }
        })
    }
}

fn interleave<T>(
    a: impl Iterator<Item = T>,
    b: impl Iterator<Item = T>,
) -> Interleave<impl Iterator<Item = T>, impl Iterator<Item = T>> {
    Interleave { a, b, take_a: true }
}

/// Pairs `(m, n)` of positive integers by `m + n` ascending, then `m`
/// ascending.
fn diagonal_pairs() -> impl Iterator<Item = (f64, f64)> {
    (2u64..).flat_map(|s| (1..s).map(move |m| (m as f64, (s - m) as f64)))
}

/// Pairs `(2^k, 2^j)` by `k + j` ascending, then `k` ascending.
fn dyadic_pairs() -> impl Iterator<Item = (f64, f64)> {
    (0..=MAX_DYADIC_EXPONENT)
        .flat_map(|d| (0..=d).map(move |k| (2f64.powi(k as i32), 2f64.powi((d - k) as i32))))
}

/// `φ_{m,n}(x, y) = (mx + ny)⁺`, subdifferential `hull{(m, n), (0, 0)}`.
#[derive(Debug)]
struct PositivePartGenerator;

impl MapGenerator<SublinearMap> for PositivePartGenerator {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "positive-part"
    }

    fn maps(&self) -> Box<dyn Iterator<Item = SublinearMap> + '_> {
        Box::new(interleave(diagonal_pairs(), dyadic_pairs()).map(|(m, n)| {
            let set = ConvexCompactSet::polytope(vec![vec![m, n], vec![0.0, 0.0]])
                .expect("finite vertices");
            SublinearMap::new(set, format!("phi_{{{m},{n}}}"))
        }))
    }
}

/// `ψ_{λ,n}(x, y) = min{λx, ny}`, superdifferential `hull{(λ, 0), (0, n)}`.
#[derive(Debug)]
struct MinPairGenerator;

impl MapGenerator<SuperlinearMap> for MinPairGenerator {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "min-pair"
    }

    fn maps(&self) -> Box<dyn Iterator<Item = SuperlinearMap> + '_> {
        let plain = (1u64..).map(|n| n as f64);
        let dyadic = (0..=MAX_DYADIC_EXPONENT).map(|k| 2f64.powi(k as i32));
        Box::new(
            interleave(plain, dyadic)
                .flat_map(|n| [(0.0, n), (1.0, n)])
                .map(|(lambda, n)| {
                    let set = ConvexCompactSet::polytope(vec![vec![lambda, 0.0], vec![0.0, n]])
                        .expect("finite vertices");
                    SuperlinearMap::new(set, format!("psi_{{{lambda},{n}}}"))
                }),
        )
    }
}

/// Linear maps `(cos θ, sin θ)` on the `base`-angle grid, followed by the
/// new angles of each dyadic refinement in turn.
#[derive(Debug)]
struct AngleGenerator {
    base: usize,
}

impl MapGenerator<SuperlinearMap> for AngleGenerator {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "angles"
    }

    fn maps(&self) -> Box<dyn Iterator<Item = SuperlinearMap> + '_> {
        let base = self.base;
        let coarse = (0..base).map(move |k| (k, base));
        let refinements = (1u32..40).flat_map(move |level| {
            let count = base << level;
            (1..count).step_by(2).map(move |j| (j, count))
        });
        Box::new(coarse.chain(refinements).map(|(j, count)| {
            let theta = 2.0 * PI * j as f64 / count as f64;
            SuperlinearMap::linear(vec![theta.cos(), theta.sin()], format!("theta_{j}/{count}"))
                .expect("finite angle")
        }))
    }
}
