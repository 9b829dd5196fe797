//! Two-sided comparison of chain lengths with pair-ball measures.

use rayon::prelude::*;
use serde::Serialize;

use super::{centers, sample_pairs};
use crate::chain::{build_delta_graph, chain_distance, chain_profile, measure_root};
use crate::error::{Error, Result};
use crate::rng;
use crate::space::DiscreteSpace;

#[derive(Clone, Debug, Serialize)]
pub struct WmdmBounds {
    /// `max mu(B_xy)^(1/s) / q^δ(x,y)`: the lower-bound constant.
    pub c_w_hat: f64,
    /// `max q^δ(x,y) / mu(B_xy)^(1/2)`: the upper-bound constant.
    pub c_s_hat: f64,
    pub delta: f64,
    pub s: f64,
    pub min_separation: f64,
    pub pairs: usize,
    /// Sampling preconditions that did not hold; results are still reported.
    pub warnings: Vec<String>,
}

/// Compares `q^δ` with `mu(B_xy)` over random pairs at distance at least
/// `min_separation`. The upper bound is always taken at exponent 1/2.
pub fn estimate_wmdm_bounds(
    space: &DiscreteSpace,
    delta: f64,
    s: f64,
    n_pairs: usize,
    min_separation: f64,
    seed: u64,
) -> Result<WmdmBounds> {
    if n_pairs == 0 {
        return Err(Error::input("need at least one pair"));
    }
    let mut warnings = Vec::new();
    let mesh = space.mesh_scale();
    if min_separation < 4.0 * mesh {
        warnings.push(format!(
            "min separation {min_separation} is below 4x mesh scale {mesh}"
        ));
    }
    if delta > min_separation / 4.0 {
        warnings.push(format!(
            "delta {delta} exceeds a quarter of the min separation {min_separation}"
        ));
    }
    let graph = build_delta_graph(space, delta, s)?;
    if graph.below_mesh() {
        warnings.push(format!("delta {delta} is below the mesh scale {mesh}"));
    }
    let mut rng = rng::stream(seed, "wmdm-pairs");
    let pairs = sample_pairs(
        space,
        &mut rng,
        &centers(space, 0.0),
        n_pairs,
        min_separation,
    );
    if pairs.is_empty() {
        return Err(Error::Estimation(format!(
            "no pairs at distance >= {min_separation}"
        )));
    }
    let ratios: Vec<Result<(f64, f64)>> = pairs
        .par_iter()
        .map(|&(x, y)| {
            let q = chain_distance(&graph, x, y)?;
            if !q.reachable {
                return Err(Error::Unreachable { x, y, delta });
            }
            let m = space.pair_ball_measure_unchecked(x, y, 1.0);
            Ok((
                measure_root(m, s) / q.total_weight,
                q.total_weight / m.sqrt(),
            ))
        })
        .collect();
    let (mut c_w, mut c_s) = (0.0f64, 0.0f64);
    for r in ratios {
        let (w, u) = r?;
        c_w = c_w.max(w);
        c_s = c_s.max(u);
    }
    Ok(WmdmBounds {
        c_w_hat: c_w,
        c_s_hat: c_s,
        delta,
        s,
        min_separation,
        pairs: pairs.len(),
        warnings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityRow {
    pub delta: f64,
    pub q: f64,
    /// `mu(B_xy)^(1/s) / q^δ`.
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaStability {
    pub x: usize,
    pub y: usize,
    pub s: f64,
    pub measure_root: f64,
    pub rows: Vec<StabilityRow>,
    /// The last two ratios differ by at most 25%.
    pub stabilized: bool,
    /// Whether `d(x,y) >= 4·mesh`.
    pub separated: bool,
}

/// Tracks `mu(B_xy)^(1/s) / q^δ(x,y)` along a decreasing δ schedule.
pub fn delta_stability_check(
    space: &DiscreteSpace,
    s: f64,
    pair: (usize, usize),
    schedule: &[f64],
) -> Result<DeltaStability> {
    let (x, y) = pair;
    if x == y {
        return Err(Error::input("stability check needs two distinct points"));
    }
    let profile = chain_profile(space, x, y, schedule, s)?;
    if let Some(delta) = profile.unreachable_at {
        return Err(Error::Unreachable { x, y, delta });
    }
    let root = measure_root(space.pair_ball_measure_unchecked(x, y, 1.0), s);
    let rows: Vec<StabilityRow> = profile
        .entries
        .iter()
        .map(|&(delta, q)| StabilityRow {
            delta,
            q,
            ratio: root / q,
        })
        .collect();
    let stabilized = match rows.as_slice() {
        [.., a, b] => (a.ratio / b.ratio).max(b.ratio / a.ratio) <= 1.25,
        _ => true,
    };
    Ok(DeltaStability {
        x,
        y,
        s,
        measure_root: root,
        separated: space.d(x, y) >= 4.0 * space.mesh_scale(),
        rows,
        stabilized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{DistanceMatrix, MetricSpec};

    fn two_point() -> DiscreteSpace {
        let m = DistanceMatrix::from_lower_triangle(2, &[1.0]).unwrap();
        DiscreteSpace::new(vec![], vec![0.5, 0.5], MetricSpec::ExplicitMatrix(m)).unwrap()
    }

    #[test]
    fn two_point_space_bounds_are_one() {
        let b = estimate_wmdm_bounds(&two_point(), 1.0, 2.0, 5, 1.0, 0).unwrap();
        assert_eq!(b.c_w_hat, 1.0);
        assert_eq!(b.c_s_hat, 1.0);
        assert!(!b.warnings.is_empty());
    }

    #[test]
    fn unreachable_pair_is_an_error() {
        let e = estimate_wmdm_bounds(&two_point(), 0.5, 2.0, 5, 1.0, 0).unwrap_err();
        assert!(matches!(e, Error::Unreachable { .. }), "{e}");
    }

    #[test]
    fn line_stability_uses_exact_values() {
        let m = DistanceMatrix::from_lower_triangle(3, &[1.0, 2.0, 1.0]).unwrap();
        let s = DiscreteSpace::new(vec![], vec![1.0; 3], MetricSpec::ExplicitMatrix(m)).unwrap();
        let r = delta_stability_check(&s, 2.0, (0, 2), &[2.0, 1.0]).unwrap();
        let root = 3f64.sqrt();
        assert!((r.rows[0].ratio - 1.0).abs() < 1e-12);
        assert!((r.rows[1].ratio - root / (2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!(!r.separated);
        // 0.612 against 1.0 is more than 25% apart
        assert!(!r.stabilized);
    }
}
