//! Quasisymmetry profile of the identity from `d` to the chain metric.

use rayon::prelude::*;
use serde::Serialize;

use super::{centers, pick};
use crate::chain::{build_delta_graph, ShortestPaths};
use crate::error::{Error, Result};
use crate::rng;
use crate::space::DiscreteSpace;

/// `η(t) = C max(t^(α/2), t^(1/(2α)))`.
pub fn eta(t: f64, c: f64, alpha: f64) -> f64 {
    c * t.powf(alpha / 2.0).max(t.powf(1.0 / (2.0 * alpha)))
}

/// Smallest `C >= 1` with `ratio <= η(t)` for every `(t, ratio)`.
pub fn fit_envelope(samples: &[(f64, f64)], alpha: f64) -> f64 {
    samples
        .iter()
        .map(|&(t, ratio)| ratio / eta(t, 1.0, alpha))
        .fold(1.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct QsSample {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    /// `d(x,y) / d(x,z)`.
    pub t: f64,
    /// `q(x,y) / q(x,z)`.
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct QsProfile {
    pub samples: Vec<QsSample>,
    pub c: f64,
    pub alpha: f64,
    pub delta: f64,
    pub s: f64,
    /// Triples rejected for having two points closer than 4·mesh.
    pub skipped: usize,
}

/// Samples `n_triples` triples with all pairwise distances at least
/// 4·mesh and fits the envelope constant at the given growth exponent.
pub fn qs_profile(
    space: &DiscreteSpace,
    s: f64,
    delta: f64,
    n_triples: usize,
    alpha: f64,
    seed: u64,
) -> Result<QsProfile> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::input(format!(
            "growth exponent must be >= 1, got {alpha}"
        )));
    }
    if n_triples == 0 {
        return Err(Error::input("need at least one triple"));
    }
    let graph = build_delta_graph(space, delta, s)?;
    let floor = 4.0 * space.mesh_scale();
    let pool = centers(space, 0.0);
    let mut rng = rng::stream(seed, "qs-triples");
    let mut triples = Vec::with_capacity(n_triples);
    let mut skipped = 0;
    while triples.len() < n_triples {
        if skipped > 200 * n_triples {
            return Err(Error::Estimation(format!(
                "could not find {n_triples} triples with pairwise distances >= {floor}"
            )));
        }
        let x = pick(&mut rng, &pool);
        let y = pick(&mut rng, &pool);
        let z = pick(&mut rng, &pool);
        if space.d(x, y) >= floor && space.d(x, z) >= floor && space.d(y, z) >= floor {
            triples.push((x, y, z));
        } else {
            skipped += 1;
        }
    }
    let samples: Vec<Result<QsSample>> = triples
        .par_iter()
        .map(|&(x, y, z)| {
            let (sp, _) = ShortestPaths::run(&graph, x, |_| true, |_| false);
            for target in [y, z] {
                if !sp.reachable(target) {
                    return Err(Error::Unreachable {
                        x,
                        y: target,
                        delta,
                    });
                }
            }
            Ok(QsSample {
                x,
                y,
                z,
                t: space.d(x, y) / space.d(x, z),
                ratio: sp.dist(y) / sp.dist(z),
            })
        })
        .collect();
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = samples.iter().map(|q| (q.t, q.ratio)).collect();
    Ok(QsProfile {
        c: fit_envelope(&pts, alpha),
        alpha,
        delta,
        s,
        skipped,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_shape() {
        assert_eq!(eta(1.0, 3.0, 2.0), 3.0);
        assert!(eta(0.01, 1.0, 2.0) < eta(0.1, 1.0, 2.0));
        assert!(eta(1e-12, 1.0, 2.0) < 1e-2);
    }

    #[test]
    fn identity_profile_has_unit_envelope() {
        let pts: Vec<(f64, f64)> = [0.1, 0.5, 1.0, 2.0, 7.0].iter().map(|&t| (t, t)).collect();
        assert_eq!(fit_envelope(&pts, 2.0), 1.0);
    }
}
