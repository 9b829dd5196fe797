//! Linear local connectivity, read off the mesh-scale proximity graph.

use rayon::prelude::*;
use serde::Serialize;

use super::{centers, pick};
use crate::error::{Error, Result};
use crate::rng;
use crate::space::DiscreteSpace;

#[derive(Clone, Debug, Serialize)]
pub struct LlcResult {
    /// Smallest passing candidate; `None` when every candidate fails.
    pub lambda: Option<f64>,
    pub candidates: Vec<f64>,
    /// Number of sampled `(x, r)` each candidate passed.
    pub passed: Vec<usize>,
    pub samples: usize,
}

/// Smallest `λ` among `candidates` such that, for every sampled `(x, r)`,
/// `B(x, r)` lies in one component of the graph restricted to `B(x, λr)`,
/// and `X \ B(x, r)` lies in one component of the graph restricted to
/// `X \ B(x, r/λ)`.
///
/// Radii are drawn log-uniformly from `[2·mesh, diam/4]`; centres keep
/// their `r`-ball away from any patch boundary.
pub fn check_llc(
    space: &DiscreteSpace,
    candidates: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<LlcResult> {
    if candidates.is_empty() || candidates.iter().any(|&l| !(l >= 1.0 && l.is_finite())) {
        return Err(Error::input("LLC candidates must be finite and at least 1"));
    }
    if candidates.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("LLC candidates must be increasing"));
    }
    let lo = 2.0 * space.mesh_scale();
    let hi = (space.diameter() / 4.0).max(lo);
    let mut rng = rng::stream(seed, "llc");
    let draws: Vec<(usize, f64)> = (0..n_samples)
        .map(|_| {
            let u: f64 = rand::Rng::gen(&mut rng);
            let r = (lo.ln() + u * (hi.ln() - lo.ln())).exp();
            (pick(&mut rng, &centers(space, r)), r)
        })
        .collect();
    let mut passed = Vec::with_capacity(candidates.len());
    let mut lambda = None;
    for &l in candidates {
        let ok = draws
            .par_iter()
            .filter(|&&(x, r)| llc_holds(space, x, r, l))
            .count();
        passed.push(ok);
        if ok == n_samples && lambda.is_none() {
            lambda = Some(l);
        }
    }
    Ok(LlcResult {
        lambda,
        candidates: candidates.to_vec(),
        passed,
        samples: n_samples,
    })
}

fn llc_holds(space: &DiscreteSpace, x: usize, r: f64, lambda: f64) -> bool {
    let g = space.proximity_graph();
    let dist: Vec<f64> = (0..space.len()).map(|p| space.d(x, p)).collect();
    let inside: Vec<usize> = (0..space.len()).filter(|&p| dist[p] < r).collect();
    if !g.connects_all(&inside, |p| dist[p] < lambda * r) {
        return false;
    }
    let outside: Vec<usize> = (0..space.len()).filter(|&p| dist[p] >= r).collect();
    g.connects_all(&outside, |p| dist[p] >= r / lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{DistanceMatrix, MetricSpec};

    #[test]
    fn two_clusters_fail_every_candidate() {
        // six unit-spaced points, a gap of 100, six more
        let xs: Vec<f64> = (0..12)
            .map(|i| if i < 6 { i as f64 } else { 100.0 + i as f64 })
            .collect();
        let rows: Vec<Vec<f64>> = xs
            .iter()
            .map(|a| xs.iter().map(|b| (a - b).abs()).collect())
            .collect();
        let m = DistanceMatrix::from_rows(&rows).unwrap();
        let s = DiscreteSpace::new(vec![], vec![1.0; 12], MetricSpec::ExplicitMatrix(m)).unwrap();
        let res = check_llc(&s, &[1.0, 2.0, 4.0, 8.0], 40, 0).unwrap();
        assert_eq!(res.lambda, None);
    }

    #[test]
    fn rejects_bad_candidates() {
        let m = DistanceMatrix::from_lower_triangle(2, &[1.0]).unwrap();
        let s = DiscreteSpace::new(vec![], vec![1.0; 2], MetricSpec::ExplicitMatrix(m)).unwrap();
        assert!(check_llc(&s, &[0.5], 1, 0).unwrap_err().is_input());
        assert!(check_llc(&s, &[2.0, 1.0], 1, 0).is_err());
    }
}
