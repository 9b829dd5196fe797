//! Test spaces: the round sphere, the Rickman rug, the snowflaked plane and
//! explicit matrices. All generators are deterministic in their inputs.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::space::{DiscreteSpace, DistanceMatrix, MetricSpec};

/// `n` points of a Fibonacci lattice on the unit sphere, rotated by a
/// seeded uniform rotation, with the chordal metric and weights `4π/n`.
pub fn gen_round_sphere(n: usize, seed: u64) -> Result<DiscreteSpace> {
    if n < 10 {
        return Err(Error::input(format!("sphere needs n >= 10, got {n}")));
    }
    let rot = random_rotation(&mut rng::stream(seed, "sphere-rotation"));
    let golden = PI * (3.0 - 5f64.sqrt());
    let points = (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            let p = [rho * phi.cos(), rho * phi.sin(), z];
            let q: Vec<f64> = (0..3)
                .map(|r| rot[r][0] * p[0] + rot[r][1] * p[1] + rot[r][2] * p[2])
                .collect();
            let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
            q.into_iter().map(|c| c / norm).collect()
        })
        .collect();
    DiscreteSpace::new(
        points,
        vec![4.0 * PI / n as f64; n],
        MetricSpec::ChordalSphere,
    )
}

/// Rotation matrix of a uniformly random unit quaternion.
fn random_rotation(rng: &mut impl Rng) -> [[f64; 3]; 3] {
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    let (w, x, y, z) = (
        a * (2.0 * PI * u2).sin(),
        a * (2.0 * PI * u2).cos(),
        b * (2.0 * PI * u3).sin(),
        b * (2.0 * PI * u3).cos(),
    );
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

/// A `n_x × n_y` grid of cell centres on `[0, extent]²` with the rug metric
/// of dimension `s`. Each point carries its cell's coordinate area.
pub fn gen_rickman_rug(n_x: usize, n_y: usize, s: f64, extent: f64) -> Result<DiscreteSpace> {
    if n_x < 2 || n_y < 2 {
        return Err(Error::input(format!(
            "rug grid must be at least 2x2, got {n_x}x{n_y}"
        )));
    }
    if !(s > 2.0 && s.is_finite()) {
        return Err(Error::input(format!(
            "rug dimension must exceed 2, got {s}"
        )));
    }
    check_extent(extent)?;
    let hx = extent / n_x as f64;
    let hy = extent / n_y as f64;
    let mut points = Vec::with_capacity(n_x * n_y);
    for j in 0..n_y {
        for i in 0..n_x {
            points.push(vec![(i as f64 + 0.5) * hx, (j as f64 + 0.5) * hy]);
        }
    }
    let w = extent * extent / (n_x * n_y) as f64;
    DiscreteSpace::new(
        points,
        vec![w; n_x * n_y],
        MetricSpec::RickmanRug { dimension: s },
    )
}

/// `n` uniform random points on `[0, extent]²` under `|p - q|^ε`, each with
/// weight `extent²/n`.
pub fn gen_snowflake_plane(
    n: usize,
    epsilon: f64,
    extent: f64,
    seed: u64,
) -> Result<DiscreteSpace> {
    if n < 2 {
        return Err(Error::input(format!(
            "snowflake plane needs n >= 2, got {n}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::input(format!(
            "snowflake exponent must lie in (0,1), got {epsilon}"
        )));
    }
    check_extent(extent)?;
    let mut rng = rng::stream(seed, "snowflake-points");
    let points = (0..n)
        .map(|_| vec![rng.gen::<f64>() * extent, rng.gen::<f64>() * extent])
        .collect();
    DiscreteSpace::new(
        points,
        vec![extent * extent / n as f64; n],
        MetricSpec::Snowflake { exponent: epsilon },
    )
}

/// Wraps a distance matrix after checking the metric axioms: every triple
/// for up to 256 points, a seeded sample of 10⁴ triples beyond.
pub fn gen_explicit(matrix: DistanceMatrix, weights: Vec<f64>) -> Result<DiscreteSpace> {
    matrix.validate(10_000, 0)?;
    DiscreteSpace::new(Vec::new(), weights, MetricSpec::ExplicitMatrix(matrix))
}

fn check_extent(extent: f64) -> Result<()> {
    if extent > 0.0 && extent.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!(
            "extent must be positive, got {extent}"
        )))
    }
}
