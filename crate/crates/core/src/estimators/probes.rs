//! Probes for the two counterexamples: low-dimension blowup and the rug's
//! failure to be quasisymmetric to the plane.

use serde::Serialize;

use crate::chain::{chain_profile, measure_root};
use crate::error::{Error, Result};
use crate::space::{rug_distance, DiscreteSpace, MetricSpec, PATCH_MARGIN};

/// Average per-halving growth factor at or above which the lower-bound
/// ratio counts as blowing up.
pub const BLOWUP_THRESHOLD: f64 = 1.15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupVerdict {
    Blowup,
    Stable,
    /// Fewer than two reachable scales.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupEntry {
    pub delta: f64,
    pub q: f64,
    /// `mu(B_xy)^(1/s) / q^δ`.
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupProbe {
    pub x: usize,
    pub y: usize,
    pub s: f64,
    pub entries: Vec<BlowupEntry>,
    /// Geometric mean of consecutive ratio quotients.
    pub factor_per_halving: Option<f64>,
    /// `max ratio / min ratio` over the entries.
    pub spread: Option<f64>,
    pub verdict: BlowupVerdict,
    pub truncated: bool,
    pub unreachable_at: Option<f64>,
    /// Set when the smallest scale falls below the mesh scale.
    pub below_mesh: bool,
}

/// Halves δ from `delta0` `n_halvings` times and follows
/// `mu(B_xy)^(1/s) / q^δ(x,y)`. Reuses the chain-profile computation, so at
/// `s = 2` the `q` column equals the profile's entries.
pub fn dimension_blowup_probe(
    space: &DiscreteSpace,
    s: f64,
    pair: (usize, usize),
    n_halvings: u32,
    delta0: f64,
) -> Result<BlowupProbe> {
    if !(s > 0.0 && s <= 2.0) {
        return Err(Error::input(format!(
            "blowup probe needs s in (0, 2], got {s}"
        )));
    }
    let (x, y) = pair;
    if x == y {
        return Err(Error::input("blowup probe needs two distinct points"));
    }
    let schedule: Vec<f64> = (0..=n_halvings)
        .map(|k| delta0 / 2f64.powi(k as i32))
        .collect();
    let profile = chain_profile(space, x, y, &schedule, s)?;
    let root = measure_root(space.pair_ball_measure_unchecked(x, y, 1.0), s);
    let entries: Vec<BlowupEntry> = profile
        .entries
        .iter()
        .map(|&(delta, q)| BlowupEntry {
            delta,
            q,
            ratio: root / q,
        })
        .collect();
    let (factor, spread, verdict) = if entries.len() < 2 {
        (None, None, BlowupVerdict::Inconclusive)
    } else {
        let first = entries[0].ratio;
        let last = entries[entries.len() - 1].ratio;
        let f = (last / first).powf(1.0 / (entries.len() - 1) as f64);
        let max = entries.iter().map(|e| e.ratio).fold(f64::MIN, f64::max);
        let min = entries.iter().map(|e| e.ratio).fold(f64::MAX, f64::min);
        let v = if f >= BLOWUP_THRESHOLD {
            BlowupVerdict::Blowup
        } else {
            BlowupVerdict::Stable
        };
        (Some(f), Some(max / min), v)
    };
    Ok(BlowupProbe {
        x,
        y,
        s,
        entries,
        factor_per_halving: factor,
        spread,
        verdict,
        truncated: profile.truncated,
        unreachable_at: profile.unreachable_at,
        below_mesh: *schedule.last().unwrap() < space.mesh_scale(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RugProbeRow {
    pub a: f64,
    /// `d(x,y) / d(x,z)`; 1 by construction.
    pub t: Option<f64>,
    /// `|x - y| / |x - z|` in the plane.
    pub distortion: Option<f64>,
    /// Set when `y` or `z` leaves the interior of the patch.
    pub skipped: bool,
}

/// For each `a`, takes `x` at the patch centre, `y = x + (a, 0)` and
/// `z = x + (0, a^(s-1))`. Both rug distances from `x` equal `a`, while the
/// Euclidean ratio is `a^(2-s)`. The triple is evaluated at exact
/// coordinates, not snapped to grid points.
pub fn rug_qs_failure_probe(space: &DiscreteSpace, scales: &[f64]) -> Result<Vec<RugProbeRow>> {
    let MetricSpec::RickmanRug { dimension: s } = *space.metric() else {
        return Err(Error::input("rug probe needs a Rickman rug space"));
    };
    let (lo, hi) = space.patch_bounds().expect("rug spaces have coordinates");
    let centre = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let inside = |p: [f64; 2]| {
        (0..2).all(|k| {
            let m = PATCH_MARGIN * (hi[k] - lo[k]);
            p[k] >= lo[k] + m && p[k] <= hi[k] - m
        })
    };
    scales
        .iter()
        .map(|&a| {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::input(format!(
                    "probe scale must be positive, got {a}"
                )));
            }
            let dy = a.powf(s - 1.0);
            let y = [centre[0] + a, centre[1]];
            let z = [centre[0], centre[1] + dy];
            if !inside(y) || !inside(z) {
                return Ok(RugProbeRow {
                    a,
                    t: None,
                    distortion: None,
                    skipped: true,
                });
            }
            let t = rug_distance(y[0] - centre[0], 0.0, s) / rug_distance(0.0, z[1] - centre[1], s);
            let distortion = (y[0] - centre[0]).abs() / (z[1] - centre[1]).abs();
            Ok(RugProbeRow {
                a,
                t: Some(t),
                distortion: Some(distortion),
                skipped: false,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_rickman_rug;
    use crate::space::DistanceMatrix;

    #[test]
    fn rug_distortion_matches_power_law() {
        let rug = gen_rickman_rug(10, 10, 3.0, 1.0).unwrap();
        let rows = rug_qs_failure_probe(&rug, &[0.01, 0.1, 0.6]).unwrap();
        assert!((rows[0].distortion.unwrap() - 100.0).abs() < 1e-6);
        assert!((rows[0].t.unwrap() - 1.0).abs() < 1e-9);
        assert!((rows[1].distortion.unwrap() - 10.0).abs() < 1e-9);
        assert!(rows[2].skipped);
    }

    #[test]
    fn rug_probe_rejects_other_spaces() {
        let m = DistanceMatrix::from_lower_triangle(2, &[1.0]).unwrap();
        let s = DiscreteSpace::new(vec![], vec![1.0; 2], MetricSpec::ExplicitMatrix(m)).unwrap();
        assert!(rug_qs_failure_probe(&s, &[0.1]).unwrap_err().is_input());
    }

    #[test]
    fn blowup_on_line_is_stable_with_two_entries() {
        let m = DistanceMatrix::from_lower_triangle(3, &[1.0, 2.0, 1.0]).unwrap();
        let s = DiscreteSpace::new(vec![], vec![1.0; 3], MetricSpec::ExplicitMatrix(m)).unwrap();
        let p = dimension_blowup_probe(&s, 2.0, (0, 2), 1, 2.0).unwrap();
        assert_eq!(p.entries.len(), 2);
        assert!((p.entries[0].q - 3f64.sqrt()).abs() < 1e-12);
        assert!((p.entries[1].q - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(p.verdict, BlowupVerdict::Stable);
        assert!(dimension_blowup_probe(&s, 2.5, (0, 2), 1, 2.0).is_err());
    }
}
