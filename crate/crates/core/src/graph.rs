//! Unweighted proximity graphs: the discrete stand-in for continua.
//!
//! Two points are adjacent when they are within the proximity radius
//! (closed). A set is "connected" when its induced subgraph is.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::space::DiscreteSpace;

#[derive(Clone, Debug)]
pub struct ProximityGraph {
    radius: f64,
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl ProximityGraph {
    pub fn build(space: &DiscreteSpace, radius: f64) -> Self {
        let lists: Vec<Vec<u32>> = (0..space.len())
            .into_par_iter()
            .map(|u| {
                let mut nb = Vec::new();
                space.for_each_within(u, radius, true, |v, _| {
                    if v != u {
                        nb.push(v as u32);
                    }
                });
                nb.sort_unstable();
                nb
            })
            .collect();
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        for nb in lists {
            targets.extend_from_slice(&nb);
            offsets.push(targets.len());
        }
        ProximityGraph {
            radius,
            offsets,
            targets,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.targets[self.offsets[u]..self.offsets[u + 1]]
            .iter()
            .map(|&v| v as usize)
    }

    /// Vertices reachable from `start` through vertices accepted by
    /// `allowed`. `start` itself must be allowed. Returns a membership mask.
    pub fn reach(&self, start: usize, allowed: impl Fn(usize) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        if !allowed(start) {
            return seen;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if !seen[v] && allowed(v) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// True when every vertex of `set` is reachable from every other using
    /// only vertices accepted by `allowed`.
    pub fn connects_all(&self, set: &[usize], allowed: impl Fn(usize) -> bool) -> bool {
        match set.first() {
            None => true,
            Some(&s) => {
                if !set.iter().all(|&p| allowed(p)) {
                    return false;
                }
                let seen = self.reach(s, allowed);
                set.iter().all(|&p| seen[p])
            }
        }
    }

    /// True when some edge joins a vertex with `a[u]` to a vertex with
    /// `b[v]`, or the two masks share a vertex.
    pub fn touches(&self, a: &[bool], b: &[bool]) -> bool {
        (0..self.len())
            .filter(|&u| a[u])
            .any(|u| b[u] || self.neighbors(u).any(|v| b[v]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::MetricSpec;

    fn path4() -> DiscreteSpace {
        DiscreteSpace::new(
            (0..4).map(|i| vec![i as f64]).collect(),
            vec![1.0; 4],
            MetricSpec::Euclidean,
        )
        .unwrap()
    }

    #[test]
    fn reach_respects_removed_vertices() {
        let s = path4();
        let g = ProximityGraph::build(&s, 1.0);
        assert_eq!(g.neighbors(1).collect::<Vec<_>>(), vec![0, 2]);
        let seen = g.reach(0, |v| v != 2);
        assert_eq!(seen, vec![true, true, false, false]);
        assert!(g.connects_all(&[0, 3], |_| true));
        assert!(!g.connects_all(&[0, 3], |v| v != 1));
    }

    #[test]
    fn touches_via_edge_or_shared_vertex() {
        let s = path4();
        let g = ProximityGraph::build(&s, 1.0);
        let a = [true, false, false, false];
        let b = [false, true, false, false];
        let c = [false, false, false, true];
        assert!(g.touches(&a, &b));
        assert!(!g.touches(&a, &c));
        assert!(g.touches(&a, &a));
    }
}
