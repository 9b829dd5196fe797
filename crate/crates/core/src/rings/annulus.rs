//! Cheapest-level separating rings.

use std::collections::VecDeque;

use super::cover::measure_calibrated_cover;
use super::{CoverBall, RingChain, RingParams, SeparationCertificate};
use crate::chain::{build_delta_graph, DeltaGraph, ShortestPaths};
use crate::error::{Error, Result};
use crate::space::DiscreteSpace;

/// Builds a ring in the annulus `[inner·r, outer·r]` around the centre that
/// separates `B(center, r)` from the points beyond `guard·r`.
///
/// The annulus is covered by calibrated disjoint balls. Their inflations
/// form a graph (two inflations are adjacent when they share a point or a
/// proximity edge joins them). Breadth-first levels from the balls meeting
/// an inner shell give a counting function on points; level set `A_j`
/// collects the inflated balls holding a point of level `j`. Levels are
/// tried cheapest first by `Σ mu(inflated)^(1/2)`, and within a level the
/// first connected component that separates is pruned to a minimal
/// separating set and walked depth-first into a δ-chain.
pub fn cheapest_level_ring(space: &DiscreteSpace, params: &RingParams) -> Result<RingChain> {
    params.validate(space)?;
    let graph = build_delta_graph(space, params.delta, 2.0)?;
    cheapest_level_ring_in(space, &graph, params)
}

/// As [`cheapest_level_ring`], reusing a δ-graph built at `s = 2`.
pub fn cheapest_level_ring_in(
    space: &DiscreteSpace,
    graph: &DeltaGraph,
    params: &RingParams,
) -> Result<RingChain> {
    params.validate(space)?;
    if graph.s() != 2.0 || graph.delta() != params.delta {
        return Err(Error::input(
            "ring chains need the δ-graph at s = 2 and the ring's δ",
        ));
    }
    let x = params.center;
    let m = params.multipliers;
    let (r_in, r_out) = (m.inner * params.r, m.outer * params.r);
    let r_seed = m.inner.powf(2.0 / 3.0) * m.outer.powf(1.0 / 3.0) * params.r;
    let r_tgt = m.inner.powf(1.0 / 3.0) * m.outer.powf(2.0 / 3.0) * params.r;
    let rho = space.proximity_radius();
    if r_tgt + rho > r_out {
        return Err(Error::Construction(format!(
            "annulus ({r_in}, {r_out}) is too thin for the proximity radius {rho}"
        )));
    }
    let prox = space.proximity_graph();
    let n = space.len();
    let dist: Vec<f64> = (0..n).map(|p| space.d(x, p)).collect();

    let outer_witness = (0..n)
        .filter(|&p| dist[p] >= m.guard * params.r)
        .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
        .ok_or_else(|| {
            Error::input(format!(
                "no point lies beyond the guard radius {}",
                m.guard * params.r
            ))
        })?;

    let cover = measure_calibrated_cover(space, x, r_in, r_out, params.epsilon, params.c_d)?;
    let inflated: Vec<Vec<usize>> = cover
        .iter()
        .map(|b| space.closed_ball_points(b.center, params.inflation * b.radius))
        .collect();
    let mut member: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, set) in inflated.iter().enumerate() {
        for &p in set {
            member[p].push(i as u32);
        }
    }
    let adjacency = ball_adjacency(&inflated, &member, |p| prox.neighbors(p));

    let shell = |radius: f64| -> Vec<usize> {
        (0..n)
            .filter(|&p| dist[p] >= radius && prox.neighbors(p).any(|q| dist[q] < radius))
            .collect()
    };
    let seeds = shell(r_seed);
    if seeds.is_empty() {
        return Err(Error::Construction(format!(
            "inner shell at radius {r_seed} around {x} is empty"
        )));
    }
    let targets = shell(r_tgt);
    if targets.is_empty() {
        return Err(Error::Construction(format!(
            "outer shell at radius {r_tgt} around {x} is empty"
        )));
    }

    // Ball levels by breadth-first search from the balls meeting the inner shell.
    let mut level = vec![usize::MAX; cover.len()];
    let mut queue = VecDeque::new();
    for &p in &seeds {
        for &b in &member[p] {
            if level[b as usize] == usize::MAX {
                level[b as usize] = 1;
                queue.push_back(b as usize);
            }
        }
    }
    while let Some(a) = queue.pop_front() {
        for &b in &adjacency[a] {
            if level[b] == usize::MAX {
                level[b] = level[a] + 1;
                queue.push_back(b);
            }
        }
    }
    let point_level = |p: usize| member[p].iter().map(|&b| level[b as usize]).min();
    let depth = targets
        .iter()
        .filter_map(|&p| point_level(p))
        .filter(|&l| l != usize::MAX)
        .min()
        .ok_or_else(|| {
            Error::Construction("the cover does not reach the outer shell; try a smaller ε".into())
        })?;

    // Level sets over the thinner annulus between the two shells.
    let is_target: Vec<bool> = {
        let mut t = vec![false; n];
        for &p in &targets {
            t[p] = true;
        }
        t
    };
    let mut level_sets: Vec<Vec<usize>> = vec![Vec::new(); depth + 1];
    for p in 0..n {
        if !((dist[p] >= r_seed && dist[p] < r_tgt) || is_target[p]) {
            continue;
        }
        if let Some(u) = point_level(p) {
            if u >= 1 && u <= depth {
                level_sets[u].extend(member[p].iter().map(|&b| b as usize));
            }
        }
    }
    let ball_weight: Vec<f64> = inflated.iter().map(|s| space.mass_of(s).sqrt()).collect();
    for set in &mut level_sets {
        set.sort_unstable();
        set.dedup();
    }
    let level_weights: Vec<f64> = level_sets[1..]
        .iter()
        .map(|set| set.iter().map(|&b| ball_weight[b]).sum())
        .collect();
    let mut levels: Vec<usize> = (1..=depth).collect();
    levels.sort_by(|&a, &b| {
        level_weights[a - 1]
            .total_cmp(&level_weights[b - 1])
            .then(a.cmp(&b))
    });
    let argmin_level = levels[0];

    let ctx = Ctx {
        space,
        x,
        dist: &dist,
        r_seed,
        r_out,
        cover: &cover,
        inflated: &inflated,
        adjacency: &adjacency,
    };
    for &j in &levels {
        for comp in components(&level_sets[j], &adjacency, &ball_weight) {
            if ctx.separates(&comp).is_none() {
                continue;
            }
            let kept = ctx.prune(comp, &ball_weight);
            let removed = ctx.removed(&kept);
            let inner_witness = ctx
                .inner_witness(&removed)
                .expect("pruning keeps a witness");
            let mask = {
                let mut m = vec![false; n];
                for &p in &removed {
                    m[p] = true;
                }
                m
            };
            let reach = prox.reach(inner_witness, |p| !mask[p]);
            let chain = ctx.walk_chain(graph, &kept)?;
            let total_weight = graph
                .chain_weight(&chain)
                .expect("refined chains follow δ-graph edges");
            return Ok(RingChain {
                center: x,
                r: params.r,
                chain,
                total_weight,
                level: j,
                argmin_level,
                depth,
                cover_size: cover.len(),
                level_weights,
                balls: kept.iter().map(|&b| cover[b]).collect::<Vec<CoverBall>>(),
                certificate: SeparationCertificate {
                    removed,
                    inner_witness,
                    outer_witness,
                    verified: !reach[outer_witness],
                },
            });
        }
    }
    Err(Error::Construction(format!(
        "no level set separates around {x} at r = {}; try a smaller ε",
        params.r
    )))
}

struct Ctx<'a> {
    space: &'a DiscreteSpace,
    x: usize,
    dist: &'a [f64],
    r_seed: f64,
    r_out: f64,
    cover: &'a [CoverBall],
    inflated: &'a [Vec<usize>],
    adjacency: &'a [Vec<usize>],
}

impl Ctx<'_> {
    fn removed(&self, balls: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = balls
            .iter()
            .flat_map(|&b| self.inflated[b].iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The centre if it survives the removal, else the nearest surviving
    /// point inside the inner shell.
    fn inner_witness(&self, removed: &[usize]) -> Option<usize> {
        if removed.binary_search(&self.x).is_err() {
            return Some(self.x);
        }
        let mut best: Option<usize> = None;
        self.space
            .for_each_within(self.x, self.r_seed, false, |p, d| {
                if removed.binary_search(&p).is_err() {
                    let better = match best {
                        None => true,
                        Some(b) => d < self.dist[b] || (d == self.dist[b] && p < b),
                    };
                    if better {
                        best = Some(p);
                    }
                }
            });
        best
    }

    /// Whether removing these balls traps the inner witness inside the
    /// outer annulus radius. Returns the witness when it does.
    fn separates(&self, balls: &[usize]) -> Option<usize> {
        let removed = self.removed(balls);
        let w = self.inner_witness(&removed)?;
        let prox = self.space.proximity_graph();
        let mut seen = std::collections::HashSet::from([w]);
        let mut queue = VecDeque::from([w]);
        while let Some(u) = queue.pop_front() {
            if self.dist[u] > self.r_out {
                return None;
            }
            for v in prox.neighbors(u) {
                if removed.binary_search(&v).is_err() && seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        Some(w)
    }

    /// Drops balls, heaviest first, while the rest stays connected and
    /// still separates.
    fn prune(&self, mut comp: Vec<usize>, weight: &[f64]) -> Vec<usize> {
        let mut order = comp.clone();
        // Outermost first, so the survivors hug the inner side of the annulus.
        let far = |b: usize| self.dist[self.cover[b].center];
        order.sort_by(|&a, &b| {
            far(b)
                .total_cmp(&far(a))
                .then(weight[b].total_cmp(&weight[a]))
                .then(a.cmp(&b))
        });
        for b in order {
            if comp.len() == 1 {
                break;
            }
            let trial: Vec<usize> = comp.iter().copied().filter(|&c| c != b).collect();
            if connected(&trial, self.adjacency) && self.separates(&trial).is_some() {
                comp = trial;
            }
        }
        comp
    }

    /// Depth-first preorder over the balls from the lowest index, neighbours
    /// in ascending order. Consecutive centres are joined by cheapest
    /// δ-chains, which never cost more than walking back up the tree.
    fn walk_chain(&self, graph: &DeltaGraph, balls: &[usize]) -> Result<Vec<usize>> {
        let inset = |b: usize| balls.binary_search(&b).is_ok();
        let mut order = Vec::new();
        let mut visited = vec![false; self.adjacency.len()];
        let mut stack = vec![balls[0]];
        while let Some(b) = stack.pop() {
            if visited[b] {
                continue;
            }
            visited[b] = true;
            order.push(b);
            for &c in self.adjacency[b].iter().rev() {
                if inset(c) && !visited[c] {
                    stack.push(c);
                }
            }
        }
        let centers: Vec<usize> = order.iter().map(|&b| self.cover[b].center).collect();
        let mut chain = vec![centers[0]];
        for w in centers.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            let (sp, _) = ShortestPaths::run(graph, w[0], |_| true, |v| v == w[1]);
            if !sp.reachable(w[1]) {
                return Err(Error::Unreachable {
                    x: w[0],
                    y: w[1],
                    delta: graph.delta(),
                });
            }
            chain.extend_from_slice(&sp.path_to(w[1])[1..]);
        }
        Ok(chain)
    }
}

/// Adjacency between inflated balls: shared points or a proximity edge.
fn ball_adjacency<I: Iterator<Item = usize>>(
    inflated: &[Vec<usize>],
    member: &[Vec<u32>],
    neighbors: impl Fn(usize) -> I,
) -> Vec<Vec<usize>> {
    inflated
        .iter()
        .enumerate()
        .map(|(a, set)| {
            let mut adj: Vec<usize> = Vec::new();
            for &p in set {
                for q in std::iter::once(p).chain(neighbors(p)) {
                    adj.extend(member[q].iter().map(|&b| b as usize).filter(|&b| b != a));
                }
            }
            adj.sort_unstable();
            adj.dedup();
            adj
        })
        .collect()
}

/// Connected components of the induced ball graph, cheapest first.
fn components(balls: &[usize], adjacency: &[Vec<usize>], weight: &[f64]) -> Vec<Vec<usize>> {
    let inset = |b: usize| balls.binary_search(&b).is_ok();
    let mut seen = std::collections::HashSet::new();
    let mut comps = Vec::new();
    for &start in balls {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for &b in &adjacency[a] {
                if inset(b) && seen.insert(b) {
                    comp.push(b);
                    queue.push_back(b);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    let w = |c: &Vec<usize>| c.iter().map(|&b| weight[b]).sum::<f64>();
    comps.sort_by(|a, b| w(a).total_cmp(&w(b)).then(a[0].cmp(&b[0])));
    comps
}

fn connected(balls: &[usize], adjacency: &[Vec<usize>]) -> bool {
    let inset = |b: usize| balls.binary_search(&b).is_ok();
    let mut seen = std::collections::HashSet::from([balls[0]]);
    let mut queue = VecDeque::from([balls[0]]);
    while let Some(a) = queue.pop_front() {
        for &b in &adjacency[a] {
            if inset(b) && seen.insert(b) {
                queue.push_back(b);
            }
        }
    }
    seen.len() == balls.len()
}
