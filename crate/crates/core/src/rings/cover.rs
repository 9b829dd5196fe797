//! Disjoint ball covers of annuli with calibrated ball measures.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::DiscreteSpace;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoverBall {
    pub center: usize,
    pub radius: f64,
    pub measure: f64,
}

/// Covers the closed annulus `r_lo <= d(center, ·) <= r_hi`.
///
/// Every annulus point `w` gets the smallest open ball whose measure
/// reaches `ε²/(2 C_D)`; that measure must not exceed `ε²`. Balls are then
/// kept greedily in order of decreasing radius whenever they are disjoint
/// (`d > r_a + r_b`) from all balls kept so far. Every annulus point lies
/// in the closed double of some kept ball, so any inflation of at least 2
/// covers the annulus.
pub fn measure_calibrated_cover(
    space: &DiscreteSpace,
    center: usize,
    r_lo: f64,
    r_hi: f64,
    epsilon: f64,
    c_d: f64,
) -> Result<Vec<CoverBall>> {
    space.check_id(center)?;
    if !(0.0 <= r_lo && r_lo < r_hi) {
        return Err(Error::input(format!("bad annulus radii ({r_lo}, {r_hi})")));
    }
    let points = annulus_points(space, center, r_lo, r_hi);
    match points.as_slice() {
        [] => {
            return Err(Error::Construction(format!(
                "annulus ({r_lo}, {r_hi}) around {center} holds no points"
            )))
        }
        [p] => {
            return Err(Error::Calibration {
                point: *p,
                reason: "the annulus holds a single point".into(),
            })
        }
        _ => {}
    }
    // Relative slack so that ε = sqrt(k) admits mass exactly k.
    let hi = epsilon * epsilon * (1.0 + 1e-12);
    let lo = epsilon * epsilon / (2.0 * c_d) * (1.0 - 1e-12);
    let candidates: Vec<CoverBall> = points
        .par_iter()
        .map(|&w| calibrate(space, w, lo, hi))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&candidates[a], &candidates[b]);
        cb.radius
            .total_cmp(&ca.radius)
            .then(cb.measure.total_cmp(&ca.measure))
            .then(ca.center.cmp(&cb.center))
    });
    let mut kept: Vec<CoverBall> = Vec::new();
    for i in order {
        let c = candidates[i];
        if kept
            .iter()
            .all(|k| space.d(k.center, c.center) > k.radius + c.radius)
        {
            kept.push(c);
        }
    }
    Ok(kept)
}

pub(crate) fn annulus_points(
    space: &DiscreteSpace,
    center: usize,
    r_lo: f64,
    r_hi: f64,
) -> Vec<usize> {
    let mut out = Vec::new();
    space.for_each_within(center, r_hi, true, |p, d| {
        if d >= r_lo {
            out.push(p);
        }
    });
    out.sort_unstable();
    out
}

/// Smallest open ball around `w` with measure at least `lo`.
fn calibrate(space: &DiscreteSpace, w: usize, lo: f64, hi: f64) -> Result<CoverBall> {
    if space.weight(w) > hi {
        return Err(Error::Calibration {
            point: w,
            reason: format!("its atom {} exceeds ε² = {hi}", space.weight(w)),
        });
    }
    let mut reach = 2.0 * space.mesh_scale();
    loop {
        let mut near: Vec<(f64, usize)> = Vec::new();
        space.for_each_within(w, reach, true, |p, d| near.push((d, p)));
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut mass = 0.0;
        let mut k = 0;
        while k < near.len() {
            let d = near[k].0;
            while k < near.len() && near[k].0 == d {
                mass += space.weight(near[k].1);
                k += 1;
            }
            if mass >= lo {
                if mass > hi {
                    return Err(Error::Calibration {
                        point: w,
                        reason: format!(
                            "ball measure jumps past ε² = {hi} at radius {d} (mass {mass})"
                        ),
                    });
                }
                if k == near.len() {
                    // the next distance lies beyond what was collected
                    break;
                }
                return Ok(CoverBall {
                    center: w,
                    radius: 0.5 * (d + near[k].0),
                    measure: mass,
                });
            }
        }
        if near.len() == space.len() {
            return Err(Error::Calibration {
                point: w,
                reason: format!("the whole space has measure {mass} < ε²/(2 C_D) = {lo}"),
            });
        }
        reach *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::MetricSpec;

    fn line(n: usize) -> DiscreteSpace {
        DiscreteSpace::new(
            (0..n).map(|i| vec![i as f64]).collect(),
            vec![1.0; n],
            MetricSpec::Euclidean,
        )
        .unwrap()
    }

    #[test]
    fn cover_of_line_annulus_is_disjoint_and_complete() {
        let s = line(41);
        let eps = 3f64.sqrt(); // ε² = 3 points
        let cover = measure_calibrated_cover(&s, 20, 5.0, 15.0, eps, 1.0).unwrap();
        for (i, a) in cover.iter().enumerate() {
            assert!(a.measure >= 1.5 && a.measure <= 3.0);
            for b in &cover[i + 1..] {
                assert!(s.d(a.center, b.center) > a.radius + b.radius);
            }
        }
        for p in annulus_points(&s, 20, 5.0, 15.0) {
            assert!(cover.iter().any(|b| s.d(p, b.center) <= 2.0 * b.radius));
        }
    }

    #[test]
    fn single_point_annulus_cannot_calibrate() {
        let s = line(10);
        let e = measure_calibrated_cover(&s, 0, 4.5, 5.5, 2.0, 4.0).unwrap_err();
        assert!(matches!(e, Error::Calibration { point: 5, .. }), "{e}");
    }

    #[test]
    fn oversized_atom_is_named() {
        let s = line(10);
        let e = measure_calibrated_cover(&s, 0, 2.0, 6.0, 0.5, 4.0).unwrap_err();
        assert!(matches!(e, Error::Calibration { .. }), "{e}");
    }
}
