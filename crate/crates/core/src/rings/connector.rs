//! Joining two points through nested ring covers.

use serde::Serialize;

use super::nesting::{ring_cover_of_ball_in, RingCover, RingCoverParams, RingMemo};
use super::{default_epsilon, Multipliers};
use crate::chain::{build_delta_graph, DeltaGraph, ShortestPaths};
use crate::error::{Error, Result};
use crate::space::DiscreteSpace;

/// Recursion depth beyond which the connector gives up.
const MAX_LEVELS: usize = 64;

#[derive(Clone, Debug, Serialize)]
pub struct ConnectorParams {
    pub delta: f64,
    /// Measure ratio between a level ball and its small balls. The decay
    /// factor is about `guard^s / L` on an `s`-regular space, so `L` must
    /// exceed `guard^s`.
    pub l: f64,
    pub epsilon: f64,
    pub c_d: f64,
    pub multipliers: Multipliers,
    pub inflation: f64,
}

impl ConnectorParams {
    /// Defaults: `L = 96` with ring multipliers `(2, 6, 8)`.
    pub fn new(space: &DiscreteSpace, delta: f64) -> Self {
        ConnectorParams {
            delta,
            l: 96.0,
            epsilon: default_epsilon(space),
            c_d: 4.0,
            multipliers: Multipliers::default(),
            inflation: 2.0,
        }
    }

    fn cover_params(&self) -> RingCoverParams {
        RingCoverParams {
            l: self.l,
            delta: self.delta,
            epsilon: self.epsilon,
            c_d: self.c_d,
            multipliers: self.multipliers,
            inflation: self.inflation,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    X,
    Y,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelRecord {
    pub level: usize,
    pub side: Side,
    pub endpoint: usize,
    pub ball_center: usize,
    pub ball_radius: f64,
    pub ball_measure: f64,
    pub small_balls: usize,
    pub maximal_rings: usize,
    /// Index of the small ball holding the endpoint.
    pub small_ball: usize,
    /// Index of the maximal ring enclosing that small ball.
    pub ring: usize,
    pub ring_weight: f64,
    /// `mu(B^l) / mu(B^(l-1))`; absent on level 1.
    pub tau: Option<f64>,
    /// More than one maximal ring encloses the endpoint.
    pub ambiguous: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NestedConnectorTrace {
    pub x: usize,
    pub y: usize,
    pub delta: f64,
    pub levels: Vec<LevelRecord>,
    /// Why each side's recursion stopped, in side order.
    pub stop_reasons: Vec<(Side, String)>,
    pub chain: Vec<usize>,
    pub total_weight: f64,
    /// Largest decay factor over recorded levels.
    pub tau_max: Option<f64>,
}

/// Builds a δ-chain from `x` to `y` inside the union of maximal rings of
/// nested ring covers around both endpoints. See [`Connector::connect`].
pub fn connect_via_rings(
    space: &DiscreteSpace,
    x: usize,
    y: usize,
    params: &ConnectorParams,
) -> Result<NestedConnectorTrace> {
    Connector::new(space, params.clone())?.connect(x, y)
}

/// A connector bound to one space and parameter set. Reusing it across
/// pairs shares the δ-graph and every ring already built.
pub struct Connector<'a> {
    space: &'a DiscreteSpace,
    params: ConnectorParams,
    graph: DeltaGraph,
    memo: RingMemo,
}

impl<'a> Connector<'a> {
    pub fn new(space: &'a DiscreteSpace, params: ConnectorParams) -> Result<Self> {
        params.multipliers.validate()?;
        let graph = build_delta_graph(space, params.delta, 2.0)?;
        Ok(Connector {
            space,
            params,
            graph,
            memo: RingMemo::default(),
        })
    }

    /// The first ball is `B(x, inner·d(x,y))`. At each level the small ball
    /// holding the endpoint is found, then a maximal ring enclosing it, and
    /// the next ball is that small ball scaled by the guard factor. A side
    /// stops when the ball radius drops below δ/2 or when the next cover can
    /// no longer be calibrated. The final chain is the cheapest δ-chain
    /// through the ring unions, thickened by one proximity radius, plus the
    /// cheapest tails from each endpoint to them.
    pub fn connect(&self, x: usize, y: usize) -> Result<NestedConnectorTrace> {
        let (space, params, graph) = (self.space, &self.params, &self.graph);
        space.check_id(x)?;
        space.check_id(y)?;
        let delta = params.delta;
        let mut trace = NestedConnectorTrace {
            x,
            y,
            delta,
            levels: Vec::new(),
            stop_reasons: Vec::new(),
            chain: vec![x],
            total_weight: 0.0,
            tau_max: None,
        };
        if x == y {
            return Ok(trace);
        }
        let d = space.d(x, y);
        if d <= delta {
            trace.chain = vec![x, y];
            trace.total_weight = graph
                .edge_weight(x, y)
                .expect("points within δ are adjacent");
            return Ok(trace);
        }
        if d < 8.0 * space.mesh_scale() {
            return Err(Error::input(format!(
                "d(x,y) = {d} is below 8 × mesh scale {}",
                space.mesh_scale()
            )));
        }
        let cp = params.cover_params();
        let first = ring_cover_of_ball_in(
            space,
            graph,
            x,
            params.multipliers.inner * d,
            &cp,
            Some(&self.memo),
        )?;
        let n = space.len();
        let mut allowed = vec![false; n];
        mark_union(space, &first, &mut allowed);

        for (side, z) in [(Side::X, x), (Side::Y, y)] {
            let mut cover = first.clone();
            let mut prev_measure: Option<f64> = None;
            let mut level = 1;
            let reason = loop {
                let (small, ring, ambiguous) = enclosing_ring(space, &cover, z)?;
                let tau = prev_measure.map(|m| cover.measure / m);
                trace.levels.push(LevelRecord {
                    level,
                    side,
                    endpoint: z,
                    ball_center: cover.center,
                    ball_radius: cover.radius,
                    ball_measure: cover.measure,
                    small_balls: cover.balls.len(),
                    maximal_rings: cover.maximal.len(),
                    small_ball: small,
                    ring,
                    ring_weight: cover.rings[ring].total_weight,
                    tau,
                    ambiguous,
                });
                if let Some(t) = tau {
                    trace.tau_max = Some(trace.tau_max.map_or(t, |m: f64| m.max(t)));
                    if t >= 1.0 {
                        return Err(Error::Construction(format!(
                            "level {level} on side {side:?} did not shrink: tau = {t}; trace so far: {}",
                            serde_json::to_string(&trace.levels).unwrap_or_default()
                        )));
                    }
                }
                if level >= MAX_LEVELS {
                    break format!("stopped at the level cap {MAX_LEVELS}");
                }
                let b = cover.balls[ring];
                let next_radius = params.multipliers.guard * b.radius;
                if next_radius < delta / 2.0 {
                    break format!("ball radius {next_radius} fell below δ/2");
                }
                match ring_cover_of_ball_in(
                    space,
                    graph,
                    b.center,
                    next_radius,
                    &cp,
                    Some(&self.memo),
                ) {
                    Ok(next) => {
                        mark_union(space, &next, &mut allowed);
                        prev_measure = Some(cover.measure);
                        cover = next;
                        level += 1;
                    }
                    Err(
                        e @ (Error::Calibration { .. } | Error::Input(_) | Error::Construction(_)),
                    ) => {
                        break format!("resolution floor at level {}: {e}", level + 1);
                    }
                    Err(e) => return Err(e),
                }
            };
            trace.stop_reasons.push((side, reason));
        }

        // Tails from the endpoints to the ring unions.
        let mut region = allowed.clone();
        for z in [x, y] {
            if region[z] {
                continue;
            }
            let (sp, hit) = ShortestPaths::run(graph, z, |_| true, |v| allowed[v]);
            let Some(t) = hit else {
                return Err(Error::Unreachable { x: z, y: z, delta });
            };
            for p in sp.path_to(t) {
                region[p] = true;
            }
        }
        let (sp, _) = ShortestPaths::run(graph, x, |v| region[v], |v| v == y);
        if !sp.reachable(y) {
            return Err(Error::Construction(format!(
                "ring unions do not join {x} to {y} at δ = {delta}"
            )));
        }
        trace.chain = sp.path_to(y);
        trace.total_weight = sp.dist(y);
        Ok(trace)
    }
}

/// The small ball holding `z` (lowest index) and a maximal ring enclosing
/// it: the ball's own ring when maximal, else a maximal ring whose inside
/// holds that ring, else the first maximal ring whose inside or removed set
/// holds `z`.
fn enclosing_ring(
    space: &DiscreteSpace,
    cover: &RingCover,
    z: usize,
) -> Result<(usize, usize, bool)> {
    let small = cover
        .balls
        .iter()
        .position(|b| space.d(b.center, z) < b.radius)
        .ok_or_else(|| {
            Error::Construction(format!(
                "no small ball of the cover around {} holds point {z}",
                cover.center
            ))
        })?;
    let insides = cover.inside_masks(space);
    let holds =
        |i: usize| insides[i][z] || cover.rings[i].certificate.removed.binary_search(&z).is_ok();
    let candidates: Vec<usize> = cover
        .maximal
        .iter()
        .copied()
        .filter(|&i| holds(i))
        .collect();
    let ambiguous = candidates.len() > 1;
    if candidates.contains(&small) {
        return Ok((small, small, ambiguous));
    }
    let own = &cover.rings[small].certificate.removed;
    if let Some(&j) = candidates
        .iter()
        .find(|&&j| own.iter().all(|&p| insides[j][p]))
    {
        return Ok((small, j, ambiguous));
    }
    match candidates.first() {
        Some(&j) => Ok((small, j, ambiguous)),
        None => Err(Error::Construction(format!(
            "no maximal ring of the cover around {} encloses point {z}",
            cover.center
        ))),
    }
}

/// Marks the cover's maximal-ring union and every point within one
/// proximity radius of it.
fn mark_union(space: &DiscreteSpace, cover: &RingCover, allowed: &mut [bool]) {
    let rho = space.proximity_radius();
    for &p in &cover.union {
        space.for_each_within(p, rho, true, |q, _| allowed[q] = true);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::chain_distance;
    use crate::generators::gen_round_sphere;

    #[test]
    fn base_cases() {
        let s = gen_round_sphere(500, 1).unwrap();
        let p = ConnectorParams::new(&s, 0.3);
        let t = connect_via_rings(&s, 4, 4, &p).unwrap();
        assert_eq!((t.chain.clone(), t.total_weight), (vec![4], 0.0));
        let y = (0..s.len()).find(|&q| q != 4 && s.d(4, q) <= 0.3).unwrap();
        let t = connect_via_rings(&s, 4, y, &p).unwrap();
        assert_eq!(t.chain, vec![4, y]);
        assert!(t.levels.is_empty());
        let exact = s.pair_ball_measure(4, y, 1.0).unwrap().sqrt();
        assert!((t.total_weight - exact).abs() < 1e-12);
    }

    #[test]
    fn close_pair_above_delta_is_rejected() {
        let s = gen_round_sphere(500, 1).unwrap();
        let p = ConnectorParams::new(&s, 0.05);
        let y = (0..s.len())
            .find(|&q| s.d(0, q) > 0.05 && s.d(0, q) < 8.0 * s.mesh_scale())
            .unwrap();
        assert!(connect_via_rings(&s, 0, y, &p).unwrap_err().is_input());
    }

    #[test]
    fn sphere_pair_decays_and_beats_no_bound() {
        let s = gen_round_sphere(2000, 7).unwrap();
        let p = ConnectorParams::new(&s, 0.1);
        let c = Connector::new(&s, p).unwrap();
        let (x, y) = (17, 1203);
        assert!(s.d(x, y) > 0.7);
        let t = c.connect(x, y).unwrap();
        assert_eq!((t.chain[0], *t.chain.last().unwrap()), (x, y));
        let graph = build_delta_graph(&s, 0.1, 2.0).unwrap();
        let w = graph.chain_weight(&t.chain).unwrap();
        assert!((w - t.total_weight).abs() < 1e-9);
        let best = chain_distance(&graph, x, y).unwrap().total_weight;
        assert!(t.total_weight >= best);
        assert!(t.total_weight <= 100.0 * s.pair_ball_measure(x, y, 1.0).unwrap().sqrt());
        assert!(t.levels.iter().filter_map(|l| l.tau).all(|tau| tau <= 0.9));
        assert!(t.levels.iter().any(|l| l.level >= 2));
        assert_eq!(t.stop_reasons.len(), 2);
        // a reused connector gives the same trace
        let again = c.connect(x, y).unwrap();
        assert_eq!(
            serde_json::to_string(&again).unwrap(),
            serde_json::to_string(&t).unwrap()
        );
    }
}
