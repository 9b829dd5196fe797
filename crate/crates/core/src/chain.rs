//! Measure-weighted chain lengths.
//!
//! A δ-chain from `x` to `y` is a point sequence starting at `x`, ending at
//! `y`, with consecutive points at distance at most δ. Its weight is the
//! sum of `mu(B_{ab})^(1/s)` over consecutive pairs, where `B_{ab}` is the
//! union of the two open balls of radius `d(a,b)` around `a` and `b`. The
//! cheapest chain is a shortest path in the δ-proximity graph.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::space::DiscreteSpace;

/// `m^(1/s)`, with the square root taken exactly at `s = 2`.
#[inline]
pub fn measure_root(m: f64, s: f64) -> f64 {
    if s == 2.0 {
        m.sqrt()
    } else {
        m.powf(1.0 / s)
    }
}

/// Grid spacing for edge weights: the power of two for which every chain
/// weight up to `(n - 1) · mu(X)^(1/s)` is a multiple below `2^53`.
///
/// Edge weights are rounded to this grid, so chain sums are exact in any
/// order: `q(x, y) == q(y, x)` and the triangle inequality hold without
/// rounding slack. The rounding error is at most half a grid step per edge.
pub fn weight_quantum(n: usize, total_mass: f64, s: f64) -> f64 {
    let bound = n.saturating_sub(1).max(1) as f64 * measure_root(total_mass, s);
    if !(bound > 0.0 && bound.is_finite()) {
        return f64::MIN_POSITIVE;
    }
    2f64.powi(bound.log2().ceil() as i32 - 52)
}

/// `w` rounded to the nearest multiple of `quantum`.
#[inline]
pub fn quantize(w: f64, quantum: f64) -> f64 {
    (w / quantum).round() * quantum
}

/// The δ-proximity graph with edge weights `mu(B_uv)^(1/s)`, rounded to
/// [`weight_quantum`].
#[derive(Clone, Debug)]
pub struct DeltaGraph {
    delta: f64,
    s: f64,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    below_mesh: bool,
    quantum: f64,
}

/// Builds the graph with an edge for every pair at distance in `(0, δ]`.
///
/// Each unordered pair's weight is computed once. A δ below the mesh scale
/// is allowed but flagged, since the graph is then likely disconnected.
pub fn build_delta_graph(space: &DiscreteSpace, delta: f64, s: f64) -> Result<DeltaGraph> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::input(format!("delta must be positive, got {delta}")));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::input(format!(
            "dimension s must be positive, got {s}"
        )));
    }
    let n = space.len();
    let quantum = weight_quantum(n, space.total_mass(), s);
    let upper: Vec<Vec<(u32, f64)>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut out = Vec::new();
            space.for_each_within(u, delta, true, |v, d| {
                if v > u && d > 0.0 {
                    let m = space.pair_ball_measure_unchecked(u, v, 1.0);
                    out.push((v as u32, quantize(measure_root(m, s), quantum)));
                }
            });
            out
        })
        .collect();

    let mut degree = vec![0usize; n];
    for (u, list) in upper.iter().enumerate() {
        degree[u] += list.len();
        for &(v, _) in list {
            degree[v as usize] += 1;
        }
    }
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for d in &degree {
        offsets.push(offsets.last().unwrap() + d);
    }
    let total = *offsets.last().unwrap();
    let mut targets = vec![0u32; total];
    let mut weights = vec![0.0; total];
    let mut fill = offsets[..n].to_vec();
    for (u, list) in upper.iter().enumerate() {
        for &(v, w) in list {
            let v = v as usize;
            targets[fill[u]] = v as u32;
            weights[fill[u]] = w;
            fill[u] += 1;
            targets[fill[v]] = u as u32;
            weights[fill[v]] = w;
            fill[v] += 1;
        }
    }
    for u in 0..n {
        let range = offsets[u]..offsets[u + 1];
        let mut pairs: Vec<(u32, f64)> = targets[range.clone()]
            .iter()
            .copied()
            .zip(weights[range.clone()].iter().copied())
            .collect();
        pairs.sort_unstable_by_key(|p| p.0);
        for (k, (v, w)) in pairs.into_iter().enumerate() {
            targets[range.start + k] = v;
            weights[range.start + k] = w;
        }
    }
    Ok(DeltaGraph {
        delta,
        s,
        offsets,
        targets,
        weights,
        below_mesh: delta < space.mesh_scale(),
        quantum,
    })
}

impl DeltaGraph {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Grid step of the edge weights.
    pub fn quantum(&self) -> f64 {
        self.quantum
    }

    /// True when δ is below the mesh scale.
    pub fn below_mesh(&self) -> bool {
        self.below_mesh
    }

    /// Neighbours of `u` with edge weights, ascending by id.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[u]..self.offsets[u + 1];
        self.targets[r.clone()]
            .iter()
            .zip(&self.weights[r])
            .map(|(&v, &w)| (v as usize, w))
    }

    pub fn edge_weight(&self, u: usize, v: usize) -> Option<f64> {
        let r = self.offsets[u]..self.offsets[u + 1];
        let t = &self.targets[r.clone()];
        t.binary_search(&(v as u32))
            .ok()
            .map(|k| self.weights[r.start + k])
    }

    /// Weight of a chain, summed from its first point. `None` if some step
    /// is not an edge of this graph.
    pub fn chain_weight(&self, chain: &[usize]) -> Option<f64> {
        let mut total = 0.0;
        for w in chain.windows(2) {
            total += self.edge_weight(w[0], w[1])?;
        }
        Some(total)
    }
}

fn serialize_weight<S: Serializer>(w: &f64, ser: S) -> std::result::Result<S::Ok, S::Error> {
    if w.is_finite() {
        ser.serialize_f64(*w)
    } else {
        ser.serialize_none()
    }
}

/// An optimal δ-chain.
#[derive(Clone, Debug, Serialize)]
pub struct ChainResult {
    pub path: Vec<usize>,
    /// Infinite when `reachable` is false; serialized as `null`.
    #[serde(serialize_with = "serialize_weight")]
    pub total_weight: f64,
    pub delta: f64,
    pub s: f64,
    pub reachable: bool,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NO_PRED: usize = usize::MAX;

/// Single-source shortest paths in a [`DeltaGraph`].
///
/// Among equal-weight shortest paths the lexicographically smallest node
/// sequence (read from the source) is kept.
#[derive(Clone, Debug)]
pub struct ShortestPaths {
    source: usize,
    dist: Vec<f64>,
    pred: Vec<usize>,
}

impl ShortestPaths {
    /// Runs Dijkstra from `source`, restricted to vertices accepted by
    /// `allowed`, stopping once a vertex accepted by `stop` is settled.
    pub fn run(
        graph: &DeltaGraph,
        source: usize,
        allowed: impl Fn(usize) -> bool,
        stop: impl Fn(usize) -> bool,
    ) -> (Self, Option<usize>) {
        let n = graph.len();
        let mut sp = ShortestPaths {
            source,
            dist: vec![f64::INFINITY; n],
            pred: vec![NO_PRED; n],
        };
        let mut done = vec![false; n];
        sp.dist[source] = 0.0;
        let mut heap = BinaryHeap::from([HeapEntry {
            dist: 0.0,
            node: source,
        }]);
        while let Some(HeapEntry { dist, node: u }) = heap.pop() {
            if done[u] || dist > sp.dist[u] {
                continue;
            }
            done[u] = true;
            if stop(u) {
                return (sp, Some(u));
            }
            for (v, w) in graph.neighbors(u) {
                if done[v] || !allowed(v) {
                    continue;
                }
                let cand = dist + w;
                if cand < sp.dist[v] {
                    sp.dist[v] = cand;
                    sp.pred[v] = u;
                    heap.push(HeapEntry {
                        dist: cand,
                        node: v,
                    });
                } else if cand == sp.dist[v]
                    && sp.pred[v] != u
                    && sp.path_to(u) < sp.path_to(sp.pred[v])
                {
                    sp.pred[v] = u;
                }
            }
        }
        (sp, None)
    }

    pub fn all(graph: &DeltaGraph, source: usize) -> Self {
        Self::run(graph, source, |_| true, |_| false).0
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn dist(&self, v: usize) -> f64 {
        self.dist[v]
    }

    pub fn reachable(&self, v: usize) -> bool {
        self.dist[v].is_finite()
    }

    /// The chosen path from the source to `v`; empty if unreachable.
    pub fn path_to(&self, v: usize) -> Vec<usize> {
        if !self.reachable(v) {
            return Vec::new();
        }
        let mut path = vec![v];
        let mut cur = v;
        while cur != self.source {
            cur = self.pred[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    pub fn result(&self, graph: &DeltaGraph, target: usize) -> ChainResult {
        ChainResult {
            path: self.path_to(target),
            total_weight: self.dist[target],
            delta: graph.delta,
            s: graph.s,
            reachable: self.reachable(target),
        }
    }
}

/// The cheapest δ-chain from `x` to `y`.
pub fn chain_distance(graph: &DeltaGraph, x: usize, y: usize) -> Result<ChainResult> {
    for id in [x, y] {
        if id >= graph.len() {
            return Err(Error::input(format!(
                "point id {id} out of range (graph has {} points)",
                graph.len()
            )));
        }
    }
    let (sp, _) = ShortestPaths::run(graph, x, |_| true, |v| v == y);
    Ok(sp.result(graph, y))
}

/// Chain weights of one pair across a decreasing δ schedule.
#[derive(Clone, Debug, Serialize)]
pub struct ChainProfile {
    pub x: usize,
    pub y: usize,
    pub s: f64,
    /// `(δ, weight)` for every δ at which the pair was reachable.
    pub entries: Vec<(f64, f64)>,
    /// Max weight over the two smallest reachable δ; stands in for the
    /// limsup as δ goes to zero.
    pub q_estimate: Option<f64>,
    /// Set when some δ left the pair unreachable; later δ are not tried.
    pub truncated: bool,
    /// The δ at which reachability failed, if any.
    pub unreachable_at: Option<f64>,
    /// Set when some δ of the schedule is below the mesh scale.
    pub below_mesh: bool,
}

impl ChainProfile {
    fn finish(&mut self) {
        let k = self.entries.len();
        self.q_estimate = match k {
            0 => None,
            1 => Some(self.entries[0].1),
            _ => Some(self.entries[k - 1].1.max(self.entries[k - 2].1)),
        };
    }
}

pub(crate) fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::input("δ schedule is empty"));
    }
    if schedule.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(Error::input("δ schedule entries must be positive"));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::input("δ schedule must be strictly decreasing"));
    }
    Ok(())
}

/// Profile of a single pair.
pub fn chain_profile(
    space: &DiscreteSpace,
    x: usize,
    y: usize,
    schedule: &[f64],
    s: f64,
) -> Result<ChainProfile> {
    Ok(chain_profiles(space, &[(x, y)], schedule, s)?.remove(0))
}

/// Profiles of many pairs, building each δ-graph once.
pub fn chain_profiles(
    space: &DiscreteSpace,
    pairs: &[(usize, usize)],
    schedule: &[f64],
    s: f64,
) -> Result<Vec<ChainProfile>> {
    check_schedule(schedule)?;
    for &(x, y) in pairs {
        space.check_id(x)?;
        space.check_id(y)?;
    }
    let below_mesh = schedule.iter().any(|&d| d < space.mesh_scale());
    let mut profiles: Vec<ChainProfile> = pairs
        .iter()
        .map(|&(x, y)| ChainProfile {
            x,
            y,
            s,
            entries: Vec::new(),
            q_estimate: None,
            truncated: false,
            unreachable_at: None,
            below_mesh,
        })
        .collect();
    for &delta in schedule {
        if profiles.iter().all(|p| p.truncated) {
            break;
        }
        let graph = build_delta_graph(space, delta, s)?;
        let results: Vec<Option<ChainResult>> = profiles
            .par_iter()
            .map(|p| {
                if p.truncated {
                    None
                } else {
                    Some(chain_distance(&graph, p.x, p.y).expect("ids checked"))
                }
            })
            .collect();
        for (p, r) in profiles.iter_mut().zip(results) {
            let Some(r) = r else { continue };
            if r.reachable {
                p.entries.push((delta, r.total_weight));
            } else {
                p.truncated = true;
                p.unreachable_at = Some(delta);
            }
        }
    }
    for p in &mut profiles {
        p.finish();
    }
    Ok(profiles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{DistanceMatrix, MetricSpec};

    fn line3() -> DiscreteSpace {
        let m = DistanceMatrix::from_lower_triangle(3, &[1.0, 2.0, 1.0]).unwrap();
        DiscreteSpace::new(vec![], vec![1.0; 3], MetricSpec::ExplicitMatrix(m)).unwrap()
    }

    #[test]
    fn line_graph_at_unit_delta() {
        let g = build_delta_graph(&line3(), 1.0, 2.0).unwrap();
        assert_eq!(g.edge_count(), 2);
        let q = g.quantum();
        assert_eq!(q, 2f64.powi(-50));
        assert_eq!(g.edge_weight(0, 1), Some(quantize(2f64.sqrt(), q)));
        assert!((g.edge_weight(1, 2).unwrap() - 2f64.sqrt()).abs() <= q / 2.0);
        assert_eq!(g.edge_weight(0, 2), None);
    }

    #[test]
    fn line_graph_at_delta_two_adds_long_edge() {
        let g = build_delta_graph(&line3(), 2.0, 2.0).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(
            g.edge_weight(0, 2),
            Some(quantize(3f64.sqrt(), g.quantum()))
        );
    }

    #[test]
    fn quantized_sums_are_exact() {
        let q = weight_quantum(2000, 4.0 * std::f64::consts::PI, 2.0);
        let w: Vec<f64> = (1..40)
            .map(|k| quantize((k as f64).sqrt() / 7.0, q))
            .collect();
        let forward: f64 = w.iter().sum();
        let backward: f64 = w.iter().rev().sum();
        assert_eq!(forward, backward);
        assert_eq!(weight_quantum(2, 1.0, 2.0), 2f64.powi(-52));
    }

    #[test]
    fn line_chain_distances() {
        let s = line3();
        let g1 = build_delta_graph(&s, 1.0, 2.0).unwrap();
        let r = chain_distance(&g1, 0, 2).unwrap();
        assert_eq!(r.path, vec![0, 1, 2]);
        assert!((r.total_weight - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let g2 = build_delta_graph(&s, 2.0, 2.0).unwrap();
        let r = chain_distance(&g2, 0, 2).unwrap();
        assert_eq!(r.path, vec![0, 2]);
        assert!((r.total_weight - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn chain_to_self_is_empty() {
        let g = build_delta_graph(&line3(), 1.0, 2.0).unwrap();
        let r = chain_distance(&g, 1, 1).unwrap();
        assert_eq!(r.path, vec![1]);
        assert_eq!(r.total_weight, 0.0);
        assert!(r.reachable);
    }

    #[test]
    fn tiny_delta_leaves_everything_unreachable() {
        let g = build_delta_graph(&line3(), 0.5, 2.0).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(g.below_mesh());
        let r = chain_distance(&g, 0, 2).unwrap();
        assert!(!r.reachable);
        assert!(r.total_weight.is_infinite());
        assert!(r.path.is_empty());
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"total_weight\":null"), "{json}");
    }

    #[test]
    fn line_profile() {
        let p = chain_profile(&line3(), 0, 2, &[2.0, 1.0], 2.0).unwrap();
        assert_eq!(p.entries.len(), 2);
        assert!((p.entries[0].1 - 3f64.sqrt()).abs() < 1e-12);
        assert!((p.entries[1].1 - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((p.q_estimate.unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(!p.truncated);
    }

    #[test]
    fn profile_of_point_with_itself_is_zero() {
        let p = chain_profile(&line3(), 1, 1, &[2.0, 1.0], 2.0).unwrap();
        assert!(p.entries.iter().all(|e| e.1 == 0.0));
        assert_eq!(p.q_estimate, Some(0.0));
    }

    #[test]
    fn profile_truncates_at_first_unreachable_delta() {
        let p = chain_profile(&line3(), 0, 2, &[2.0, 1.0, 0.5, 0.25], 2.0).unwrap();
        assert!(p.truncated);
        assert_eq!(p.unreachable_at, Some(0.5));
        assert_eq!(p.entries.len(), 2);
        assert!(p.below_mesh);
    }

    #[test]
    fn schedule_must_decrease() {
        assert!(chain_profile(&line3(), 0, 2, &[1.0, 2.0], 2.0)
            .unwrap_err()
            .is_input());
        assert!(chain_profile(&line3(), 0, 2, &[], 2.0).is_err());
        assert!(build_delta_graph(&line3(), 0.0, 2.0).is_err());
        assert!(build_delta_graph(&line3(), 1.0, -1.0).is_err());
    }

    #[test]
    fn ties_pick_lexicographically_smallest_path() {
        // a 4-cycle with unit weights: 0-1-3 and 0-2-3 cost the same
        let m = DistanceMatrix::from_rows(&[
            vec![0.0, 1.0, 1.0, 1.5],
            vec![1.0, 0.0, 1.5, 1.0],
            vec![1.0, 1.5, 0.0, 1.0],
            vec![1.5, 1.0, 1.0, 0.0],
        ])
        .unwrap();
        let s = DiscreteSpace::new(vec![], vec![1.0; 4], MetricSpec::ExplicitMatrix(m)).unwrap();
        let g = build_delta_graph(&s, 1.0, 2.0).unwrap();
        assert_eq!(chain_distance(&g, 0, 3).unwrap().path, vec![0, 1, 3]);
        assert_eq!(chain_distance(&g, 3, 0).unwrap().path, vec![3, 1, 0]);
    }
}
