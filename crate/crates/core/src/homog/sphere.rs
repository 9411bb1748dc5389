//! Deterministic point sets on the unit sphere `S^{n-1}`.
//!
//! - `n = 1`: the two points `±1`.
//! - `n = 2`: `density` equally spaced angles starting at angle zero.
//! - `n = 3`: a Fibonacci (golden-angle) spiral with `density` points.
//! - `n >= 4`: a Kronecker low-discrepancy sequence pushed through
//!   Box-Muller and normalized, plus the `2n` signed axes.

use std::f64::consts::PI;

use crate::linalg::norm;

/// Grid density used when validating orderings and envelopes in the plane.
pub const PLANE_DENSITY: usize = 720;
/// Grid density used for `n >= 3`.
pub const SPACE_DENSITY: usize = 2000;

/// The default validation grid density for dimension `n`.
pub fn default_density(n: usize) -> usize {
    if n <= 2 {
        PLANE_DENSITY
    } else {
        SPACE_DENSITY
    }
}

pub fn sphere_grid(n: usize, density: usize) -> Vec<Vec<f64>> {
    match n {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => circle(density),
        3 => fibonacci(density),
        _ => kronecker_gaussian(n, density),
    }
}

fn circle(density: usize) -> Vec<Vec<f64>> {
    (0..density)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / density as f64;
            vec![theta.cos(), theta.sin()]
        })
        .collect()
}

fn fibonacci(density: usize) -> Vec<Vec<f64>> {
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    (0..density)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / density as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

fn kronecker_gaussian(n: usize, density: usize) -> Vec<Vec<f64>> {
    let d = n + n % 2;
    // Generalized golden ratio: the positive root of g^(d+1) = g + 1.
    let mut g = 2.0f64;
    for _ in 0..64 {
        g = (1.0 + g).powf(1.0 / (d as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=d).map(|i| g.powi(-(i as i32)).fract()).collect();

    let mut points = Vec::with_capacity(density + 2 * n);
    for k in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[k] = sign;
            points.push(e);
        }
    }
    for k in 1..=density {
        let u: Vec<f64> = alpha
            .iter()
            .map(|a| (0.5 + k as f64 * a).fract().clamp(1e-12, 1.0 - 1e-12))
            .collect();
        let mut z = Vec::with_capacity(d);
        for pair in u.chunks(2) {
            let r = (-2.0 * pair[0].ln()).sqrt();
            let t = 2.0 * PI * pair[1];
            z.push(r * t.cos());
            z.push(r * t.sin());
        }
        z.truncate(n);
        let nz = norm(&z);
        if nz > 0.0 {
            points.push(z.iter().map(|v| v / nz).collect());
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_lie_on_the_sphere() {
        for n in 1..=8 {
            let grid = sphere_grid(n, 64);
            assert!(!grid.is_empty());
            for p in &grid {
                assert_eq!(p.len(), n);
                assert!((norm(p) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn circle_hits_the_diagonal_when_density_divisible_by_eight() {
        let grid = sphere_grid(2, 720);
        assert_eq!(grid.len(), 720);
        let diag = &grid[90];
        assert!((diag[0] - diag[1]).abs() < 1e-15);
    }

    #[test]
    fn grids_are_deterministic() {
        assert_eq!(sphere_grid(5, 100), sphere_grid(5, 100));
        assert_eq!(sphere_grid(3, 100), sphere_grid(3, 100));
    }
}
