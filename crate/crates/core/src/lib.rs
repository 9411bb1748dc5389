//! Vector-lattice functional calculus for semicontinuous positively
//! homogeneous functions on ℝⁿ.
//!
//! The crate is organized bottom-up:
//!
//! - [`convexsets`]: convex compact sets (polytopes, balls) with support
//!   functions, projection and two-set feasibility.
//! - [`homog`]: sublinear / superlinear maps and positively homogeneous
//!   functions given as inf-sublinear or sup-superlinear families.
//! - [`lattice`]: the concrete lattices the calculus runs over (ℝᵐ and step
//!   functions on `[0, 1]`) and their real-valued homomorphisms.
//! - [`fcalc`]: the calculus itself, `h(f₁, …, fₙ)`, plus saddle
//!   representations.
//! - [`verify`]: brute-force oracles and randomized property checks.
//! - [`cli`]: the `homocalc` command-line front end.

pub mod cli;
pub mod convexsets;
pub mod error;
pub mod fcalc;
pub mod homog;
pub mod json;
pub mod lattice;
mod linalg;
pub mod verify;

pub use convexsets::{feasible_point, ConvexCompactSet, Shape};
pub use error::{Error, ErrorClass, Result};
pub use fcalc::{SaddleFamily, SaddleValue};
pub use homog::{PhFunction, Representation, SublinearMap, SuperlinearMap};
pub use lattice::{HomDescriptor, LatticeElement, StepFunction};
