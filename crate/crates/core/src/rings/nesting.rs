//! Nesting of rings and ring covers of balls.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use super::annulus::cheapest_level_ring_in;
use super::{default_epsilon, Multipliers, RingChain, RingParams};
use crate::chain::{build_delta_graph, DeltaGraph};
use crate::error::{Error, Result};
use crate::space::DiscreteSpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Nesting {
    Intersecting,
    AInsideB,
    BInsideA,
    ExteriorDisjoint,
}

/// Classifies two verified rings. Rings whose removed sets share a point
/// or a proximity edge intersect. Otherwise ring `a` is inside `b` when
/// all of its removed points lie in `b`'s inside component, and vice
/// versa; when neither holds and neither meets the other's inside, the
/// rings are exterior to each other.
pub fn nesting_relation(space: &DiscreteSpace, a: &RingChain, b: &RingChain) -> Result<Nesting> {
    for ring in [a, b] {
        if !ring.certificate.verified {
            return Err(Error::input(format!(
                "ring around {} has an unverified certificate",
                ring.center
            )));
        }
    }
    let n = space.len();
    let ra = a.certificate.removed_mask(n);
    let rb = b.certificate.removed_mask(n);
    if space.proximity_graph().touches(&ra, &rb) {
        return Ok(Nesting::Intersecting);
    }
    let ia = a.certificate.inside_mask(space);
    let ib = b.certificate.inside_mask(space);
    let count = |set: &[usize], mask: &[bool]| set.iter().filter(|&&p| mask[p]).count();
    let a_in_b = count(&a.certificate.removed, &ib);
    let b_in_a = count(&b.certificate.removed, &ia);
    let (na, nb) = (a.certificate.removed.len(), b.certificate.removed.len());
    match (a_in_b, b_in_a) {
        (x, 0) if x == na => Ok(Nesting::AInsideB),
        (0, y) if y == nb => Ok(Nesting::BInsideA),
        (0, 0) => Ok(Nesting::ExteriorDisjoint),
        _ => Err(Error::Construction(format!(
            "rings around {} and {} split each other's insides ({a_in_b}/{na}, {b_in_a}/{nb})",
            a.center, b.center
        ))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RingCoverParams {
    /// Each small ball carries at most `1/L` of the big ball's measure.
    pub l: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub c_d: f64,
    pub multipliers: Multipliers,
    pub inflation: f64,
}

impl RingCoverParams {
    /// Defaults: `L = 32` and the ring defaults of [`RingParams::new`].
    pub fn new(space: &DiscreteSpace, delta: f64) -> Self {
        RingCoverParams {
            l: 32.0,
            delta,
            epsilon: default_epsilon(space),
            c_d: 4.0,
            multipliers: Multipliers::default(),
            inflation: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SmallBall {
    pub center: usize,
    pub radius: f64,
    pub measure: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RingCover {
    pub center: usize,
    pub radius: f64,
    pub measure: f64,
    pub balls: Vec<SmallBall>,
    pub rings: Vec<RingChain>,
    /// Indices of rings not inside any other ring.
    pub maximal: Vec<usize>,
    /// Removed points of all maximal rings, ascending.
    pub union: Vec<usize>,
    pub union_connected: bool,
}

impl RingCover {
    pub(crate) fn inside_masks(&self, space: &DiscreteSpace) -> Vec<Vec<bool>> {
        self.rings
            .par_iter()
            .map(|r| r.certificate.inside_mask(space))
            .collect()
    }
}

/// Covers the centre's proximity component `U` of `B(center, radius)` by
/// balls of measure at most `mu(B)/L` centred in `U`, attaches a cheapest
/// ring to each, and keeps the union of the maximal rings.
pub fn ring_cover_of_ball(
    space: &DiscreteSpace,
    center: usize,
    radius: f64,
    params: &RingCoverParams,
) -> Result<RingCover> {
    let graph = build_delta_graph(space, params.delta, 2.0)?;
    ring_cover_of_ball_in(space, &graph, center, radius, params, None)
}

/// Rings already built, keyed by small-ball center and radius bits. Only
/// valid for one space, δ-graph and parameter set.
pub(crate) type RingMemo = Mutex<HashMap<(usize, u64), RingChain>>;

/// Separation of the first-pass net, in small-ball radii.
const SPARSE_NET: f64 = 1.7;

fn small_ball(space: &DiscreteSpace, center: usize, radius: f64) -> SmallBall {
    SmallBall {
        center,
        radius,
        measure: space.mass_of(&space.ball_points(center, radius)),
    }
}

pub(crate) fn ring_cover_of_ball_in(
    space: &DiscreteSpace,
    graph: &DeltaGraph,
    center: usize,
    radius: f64,
    params: &RingCoverParams,
    memo: Option<&RingMemo>,
) -> Result<RingCover> {
    space.check_id(center)?;
    if !(params.l > 1.0) {
        return Err(Error::input(format!("L must exceed 1, got {}", params.l)));
    }
    let n = space.len();
    let measure = space.ball_measure(center, radius)?;
    let target = measure / params.l;
    if target < 2.0 * space.median_weight() {
        return Err(Error::Calibration {
            point: center,
            reason: format!(
                "mu(B)/L = {target} is below two point weights; lower L or grow the ball"
            ),
        });
    }
    let cap = space.diameter() / (2.0 * params.multipliers.guard);
    let in_ball: Vec<bool> = (0..n).map(|p| space.d(center, p) < radius).collect();
    let reach = space.proximity_graph().reach(center, |p| in_ball[p]);
    let u: Vec<usize> = (0..n).filter(|&p| reach[p]).collect();

    let radii: Vec<f64> = u
        .par_iter()
        .map(|&p| largest_radius_below(space, p, target).min(cap))
        .collect();
    let mut balls: Vec<SmallBall> = Vec::new();
    // A sparse net first, then fill what it missed.
    for (&p, &r) in u.iter().zip(&radii) {
        if balls
            .iter()
            .all(|b| space.d(b.center, p) >= SPARSE_NET * b.radius.max(r))
        {
            balls.push(small_ball(space, p, r));
        }
    }
    for (&p, &r) in u.iter().zip(&radii) {
        if !balls.iter().any(|b| space.d(b.center, p) < b.radius) {
            balls.push(small_ball(space, p, r));
        }
    }

    let rings: Vec<Result<RingChain>> = balls
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let rp = RingParams {
                center: b.center,
                r: b.radius,
                delta: params.delta,
                epsilon: params.epsilon,
                c_d: params.c_d,
                lambda: 1.0,
                multipliers: params.multipliers,
                inflation: params.inflation,
            };
            let key = (b.center, b.radius.to_bits());
            if let Some(hit) = memo.and_then(|m| m.lock().unwrap().get(&key).cloned()) {
                return Ok(hit);
            }
            let ring =
                cheapest_level_ring_in(space, graph, &rp).map_err(|e| annotate(e, i, b.center))?;
            if let Some(m) = memo {
                m.lock().unwrap().insert(key, ring.clone());
            }
            Ok(ring)
        })
        .collect();
    let rings = rings.into_iter().collect::<Result<Vec<_>>>()?;
    let mut cover = RingCover {
        center,
        radius,
        measure,
        balls,
        rings,
        maximal: Vec::new(),
        union: Vec::new(),
        union_connected: false,
    };
    let insides = cover.inside_masks(space);
    let removed: Vec<Vec<bool>> = cover
        .rings
        .iter()
        .map(|r| r.certificate.removed_mask(n))
        .collect();
    let prox = space.proximity_graph();
    let nested: Vec<bool> = (0..cover.rings.len())
        .into_par_iter()
        .map(|i| {
            let ri = &cover.rings[i].certificate.removed;
            (0..cover.rings.len()).any(|j| {
                j != i
                    && ri.iter().all(|&p| insides[j][p])
                    && !prox.touches(&removed[i], &removed[j])
            })
        })
        .collect();
    cover.maximal = (0..cover.rings.len()).filter(|&i| !nested[i]).collect();
    let mut union: Vec<usize> = cover
        .maximal
        .iter()
        .flat_map(|&i| cover.rings[i].certificate.removed.iter().copied())
        .collect();
    union.sort_unstable();
    union.dedup();
    let mut in_union = vec![false; n];
    for &p in &union {
        in_union[p] = true;
    }
    cover.union_connected = prox.connects_all(&union, |p| in_union[p]);
    cover.union = union;
    Ok(cover)
}

fn annotate(e: Error, ball: usize, center: usize) -> Error {
    match e {
        Error::Calibration { point, reason } => Error::Calibration {
            point,
            reason: format!("{reason} (ring of small ball {ball} at point {center})"),
        },
        Error::Construction(m) => {
            Error::Construction(format!("{m} (ring of small ball {ball} at point {center})"))
        }
        Error::Input(m) => {
            Error::Input(format!("{m} (ring of small ball {ball} at point {center})"))
        }
        other => other,
    }
}

/// Largest radius whose open ball around `p` has measure at most `target`.
fn largest_radius_below(space: &DiscreteSpace, p: usize, target: f64) -> f64 {
    let mut reach = 2.0 * space.mesh_scale();
    loop {
        let mut near: Vec<(f64, usize)> = Vec::new();
        space.for_each_within(p, reach, true, |q, d| near.push((d, q)));
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut mass = 0.0;
        let mut k = 0;
        while k < near.len() {
            let d = near[k].0;
            let mut group = 0.0;
            let mut k2 = k;
            while k2 < near.len() && near[k2].0 == d {
                group += space.weight(near[k2].1);
                k2 += 1;
            }
            if mass + group > target {
                return d;
            }
            mass += group;
            k = k2;
        }
        if near.len() == space.len() {
            return space.diameter() * 2.0;
        }
        reach *= 2.0;
    }
}
