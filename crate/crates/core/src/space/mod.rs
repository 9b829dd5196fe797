//! Discrete metric measure spaces: weighted point clouds with a metric,
//! answering distance and ball-measure queries.

mod index;
pub mod io;
mod metric;

use std::sync::OnceLock;

use rayon::prelude::*;

pub use index::BallIndex;
pub use metric::{rug_distance, DistanceMatrix, MetricSpec};

use crate::error::{Error, Result};
use crate::graph::ProximityGraph;

/// Point counts up to this size get an exact diameter.
const EXACT_DIAMETER_LIMIT: usize = 4096;
/// Width of the boundary band that interior probes avoid on coordinate
/// patches, as a fraction of the patch extent.
pub const PATCH_MARGIN: f64 = 0.1;

/// A finite weighted point cloud with a metric.
///
/// Point ids are `0..n`. Balls are open: `B(x, r) = { p : d(x, p) < r }`.
/// The space is immutable once built; cached derived structures are
/// computed on first use.
#[derive(Debug)]
pub struct DiscreteSpace {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    metric: MetricSpec,
    index: BallIndex,
    diameter: f64,
    diameter_exact: bool,
    total_mass: f64,
    mesh_scale: f64,
    zero_weight: Vec<usize>,
    proximity: OnceLock<ProximityGraph>,
}

impl DiscreteSpace {
    /// Builds a space from coordinates and weights. Explicit-matrix spaces
    /// may pass empty coordinate vectors.
    ///
    /// Zero weights are accepted only for explicit matrices; they are
    /// listed by [`DiscreteSpace::zero_weight_points`].
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>, metric: MetricSpec) -> Result<Self> {
        metric.validate()?;
        let n = weights.len();
        if n < 2 {
            return Err(Error::input("a space needs at least two points"));
        }
        let explicit = matches!(metric, MetricSpec::ExplicitMatrix(_));
        if let MetricSpec::ExplicitMatrix(m) = &metric {
            if m.len() != n {
                return Err(Error::input(format!(
                    "matrix has {} rows but {n} weights were given",
                    m.len()
                )));
            }
        }
        let dim = if explicit {
            points.first().map_or(0, Vec::len)
        } else {
            if points.len() != n {
                return Err(Error::input(format!(
                    "{} points but {n} weights",
                    points.len()
                )));
            }
            let dim = points[0].len();
            let want = match metric {
                MetricSpec::ChordalSphere => Some(3),
                MetricSpec::RickmanRug { .. } => Some(2),
                _ => None,
            };
            if dim == 0 || want.is_some_and(|w| w != dim) {
                return Err(Error::input(format!(
                    "{} metric cannot use {dim}-dimensional coordinates",
                    metric.name()
                )));
            }
            dim
        };
        let mut coords = Vec::with_capacity(n * dim);
        if !(explicit && points.is_empty()) {
            for (i, p) in points.iter().enumerate() {
                if p.len() != dim {
                    return Err(Error::input(format!(
                        "point {i} has {} coordinates, expected {dim}",
                        p.len()
                    )));
                }
                if p.iter().any(|c| !c.is_finite()) {
                    return Err(Error::input(format!(
                        "point {i} has a non-finite coordinate"
                    )));
                }
                coords.extend_from_slice(p);
            }
        }
        let mut zero_weight = Vec::new();
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::input(format!("weight of point {i} is {w}")));
            }
            if w == 0.0 {
                if !explicit {
                    return Err(Error::input(format!(
                        "point {i} has zero weight; only explicit-matrix spaces may"
                    )));
                }
                zero_weight.push(i);
            }
        }
        let total_mass: f64 = weights.iter().sum();
        if total_mass <= 0.0 {
            return Err(Error::input("total mass must be positive"));
        }
        let index = BallIndex::build(&metric, &coords, dim, n);
        let mut space = DiscreteSpace {
            dim,
            coords,
            weights,
            metric,
            index,
            diameter: 0.0,
            diameter_exact: true,
            total_mass,
            mesh_scale: 0.0,
            zero_weight,
            proximity: OnceLock::new(),
        };
        let (diameter, exact) = space.compute_diameter();
        space.diameter = diameter;
        space.diameter_exact = exact;
        space.mesh_scale = space.compute_mesh_scale()?;
        Ok(space)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &MetricSpec {
        &self.metric
    }

    pub fn index(&self) -> &BallIndex {
        &self.index
    }

    /// Coordinates of point `i`; empty for explicit-matrix spaces without
    /// coordinates.
    pub fn coords(&self, i: usize) -> &[f64] {
        if self.coords.is_empty() {
            &[]
        } else {
            &self.coords[i * self.dim..(i + 1) * self.dim]
        }
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Diameter; exact up to 4096 points, otherwise a two-sweep estimate
    /// that is at least half the true value.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn diameter_is_exact(&self) -> bool {
        self.diameter_exact
    }

    /// Largest nearest-neighbour distance: the resolution floor for every
    /// scale-dependent estimate.
    pub fn mesh_scale(&self) -> f64 {
        self.mesh_scale
    }

    pub fn zero_weight_points(&self) -> &[usize] {
        &self.zero_weight
    }

    /// Checks symmetry and the triangle inequality on `samples` random
    /// triples from the named stream `"space-validation"`. Returns the number
    /// of triples checked.
    pub fn check_triangles(&self, samples: usize, seed: u64) -> Result<usize> {
        use rand::Rng;
        let n = self.len();
        if n < 3 {
            return Ok(0);
        }
        let mut rng = crate::rng::stream(seed, "space-validation");
        for _ in 0..samples {
            let (i, j, k) = (
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                rng.gen_range(0..n),
            );
            let (ij, ji) = (self.d(i, j), self.d(j, i));
            if ij != ji {
                return Err(Error::MetricAxiom(format!(
                    "asymmetric distances d({i},{j}) = {ij}, d({j},{i}) = {ji}"
                )));
            }
            let (ik, jk) = (self.d(i, k), self.d(j, k));
            if ik > (ij + jk) * (1.0 + 1e-12) + 1e-15 {
                return Err(Error::MetricAxiom(format!(
                    "triangle inequality fails for triple ({i},{j},{k}): {ik} > {ij} + {jk}"
                )));
            }
        }
        Ok(samples)
    }

    pub fn median_weight(&self) -> f64 {
        let mut w = self.weights.clone();
        w.sort_by(f64::total_cmp);
        let n = w.len();
        if n % 2 == 1 {
            w[n / 2]
        } else {
            0.5 * (w[n / 2 - 1] + w[n / 2])
        }
    }

    pub(crate) fn check_id(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::input(format!(
                "point id {i} out of range (space has {} points)",
                self.len()
            )))
        }
    }

    /// Distance between two points.
    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check_id(i)?;
        self.check_id(j)?;
        Ok(self.d(i, j))
    }

    /// Unchecked distance.
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        match &self.metric {
            MetricSpec::ExplicitMatrix(m) => m.get(i, j),
            metric => metric.coord_distance(self.coords(i), self.coords(j)),
        }
    }

    /// Calls `f(p, d(center, p))` for every point within `r` of `center`,
    /// including the center itself. `closed` selects `<=` over `<`.
    pub fn for_each_within(
        &self,
        center: usize,
        r: f64,
        closed: bool,
        mut f: impl FnMut(usize, f64),
    ) {
        let hit = |d: f64| if closed { d <= r } else { d < r };
        match &self.index {
            BallIndex::SortedRows(rows) => {
                if hit(0.0) {
                    f(center, 0.0);
                }
                for &(d, p) in rows.within(center, r, closed) {
                    f(p as usize, d);
                }
            }
            BallIndex::KdTree(tree) => {
                if !(r > 0.0) && !closed {
                    return;
                }
                let half = self.metric.box_half_widths(r.max(0.0), self.dim);
                let c = self.coords(center);
                let lo: Vec<f64> = c.iter().zip(&half).map(|(x, h)| x - h).collect();
                let hi: Vec<f64> = c.iter().zip(&half).map(|(x, h)| x + h).collect();
                tree.for_each_in_box(&self.coords, &lo, &hi, &mut |p| {
                    let d = self.d(center, p);
                    if hit(d) {
                        f(p, d);
                    }
                });
            }
        }
    }

    /// Ids of the open ball `B(center, r)`, ascending.
    pub fn ball_points(&self, center: usize, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(center, r, false, |p, _| out.push(p));
        out.sort_unstable();
        out
    }

    /// Ids of the closed ball `{p : d(center, p) <= r}`, ascending.
    pub fn closed_ball_points(&self, center: usize, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(center, r, true, |p, _| out.push(p));
        out.sort_unstable();
        out
    }

    /// Total weight of a set of ids, summed in the order given.
    pub fn mass_of(&self, ids: &[usize]) -> f64 {
        ids.iter().map(|&p| self.weights[p]).sum()
    }

    /// `mu(B(center, r))` for the open ball.
    pub fn ball_measure(&self, center: usize, r: f64) -> Result<f64> {
        self.check_id(center)?;
        if !(r > 0.0) {
            return Err(Error::input(format!(
                "ball radius must be positive, got {r}"
            )));
        }
        Ok(self.mass_of(&self.ball_points(center, r)))
    }

    /// `mu(cB_ij)`, the measure of `B(i, c d(i,j)) ∪ B(j, c d(i,j))` with
    /// every point counted once.
    pub fn pair_ball_measure(&self, i: usize, j: usize, scale: f64) -> Result<f64> {
        self.check_id(i)?;
        self.check_id(j)?;
        if i == j {
            return Err(Error::input("pair ball of a point with itself is empty"));
        }
        if !(scale > 0.0) {
            return Err(Error::input(format!("scale must be positive, got {scale}")));
        }
        Ok(self.pair_ball_measure_unchecked(i, j, scale))
    }

    pub(crate) fn pair_ball_measure_unchecked(&self, i: usize, j: usize, scale: f64) -> f64 {
        let r = scale * self.d(i, j);
        let mut ids = Vec::new();
        self.for_each_within(i, r, false, |p, _| ids.push(p));
        self.for_each_within(j, r, false, |p, _| ids.push(p));
        ids.sort_unstable();
        ids.dedup();
        self.mass_of(&ids)
    }

    /// Radius of the proximity graph that stands in for continua: twice
    /// the mesh scale.
    pub fn proximity_radius(&self) -> f64 {
        2.0 * self.mesh_scale
    }

    /// The proximity graph, built on first use.
    pub fn proximity_graph(&self) -> &ProximityGraph {
        self.proximity
            .get_or_init(|| ProximityGraph::build(self, self.proximity_radius()))
    }

    /// Coordinate bounding box, or `None` when the space has no
    /// coordinates or lives on the sphere.
    pub fn patch_bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.coords.is_empty()
            || matches!(
                self.metric,
                MetricSpec::ChordalSphere | MetricSpec::ExplicitMatrix(_)
            )
        {
            return None;
        }
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for i in 0..self.len() {
            for (k, &c) in self.coords(i).iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        Some((lo, hi))
    }

    /// Points whose balls of radius `radius` stay clear of the patch
    /// boundary (and of the outer 10% band). Every point qualifies on
    /// boundaryless spaces.
    pub fn interior_points(&self, radius: f64) -> Vec<usize> {
        let Some((lo, hi)) = self.patch_bounds() else {
            return (0..self.len()).collect();
        };
        let half = self.metric.box_half_widths(radius, self.dim);
        let margin: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .zip(&half)
            .map(|((a, b), h)| (PATCH_MARGIN * (b - a)).max(*h))
            .collect();
        (0..self.len())
            .filter(|&i| {
                self.coords(i)
                    .iter()
                    .enumerate()
                    .all(|(k, &c)| c >= lo[k] + margin[k] && c <= hi[k] - margin[k])
            })
            .collect()
    }

    fn compute_diameter(&self) -> (f64, bool) {
        let n = self.len();
        if n <= EXACT_DIAMETER_LIMIT {
            let d = (0..n)
                .into_par_iter()
                .map(|i| (i + 1..n).map(|j| self.d(i, j)).fold(0.0, f64::max))
                .reduce(|| 0.0, f64::max);
            (d, true)
        } else {
            let far = |from: usize| {
                (0..n)
                    .map(|j| (self.d(from, j), j))
                    .fold((0.0, from), |a, b| if b.0 > a.0 { b } else { a })
            };
            let (_, a) = far(0);
            let (d, _) = far(a);
            (d, false)
        }
    }

    fn compute_mesh_scale(&self) -> Result<f64> {
        let n = self.len();
        let nearest: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| self.nearest_distance(i))
            .collect();
        if let Some(i) = nearest.iter().position(|&d| d <= 0.0) {
            return Err(Error::input(format!("point {i} duplicates another point")));
        }
        Ok(nearest.into_iter().fold(0.0, f64::max))
    }

    fn nearest_distance(&self, i: usize) -> f64 {
        if let BallIndex::SortedRows(rows) = &self.index {
            return rows.nearest(i).unwrap_or(0.0);
        }
        let mut r = self.diameter / (self.len() as f64).sqrt();
        loop {
            let mut best = f64::INFINITY;
            self.for_each_within(i, r, true, |p, d| {
                if p != i {
                    best = best.min(d);
                }
            });
            if best.is_finite() {
                return best;
            }
            r *= 2.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn line3() -> DiscreteSpace {
        let m = DistanceMatrix::from_lower_triangle(3, &[1.0, 2.0, 1.0]).unwrap();
        DiscreteSpace::new(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![1.0; 3],
            MetricSpec::ExplicitMatrix(m),
        )
        .unwrap()
    }

    #[test]
    fn explicit_distance_reads_matrix() {
        let s = line3();
        assert_eq!(s.distance(0, 2).unwrap(), 2.0);
        assert_eq!(s.distance(1, 1).unwrap(), 0.0);
        assert!(s.distance(0, 3).unwrap_err().is_input());
    }

    #[test]
    fn open_ball_excludes_boundary() {
        let s = line3();
        assert_eq!(s.ball_measure(0, 1.5).unwrap(), 2.0);
        assert_eq!(s.ball_measure(0, 1.0).unwrap(), 1.0);
        assert_eq!(s.ball_measure(0, 10.0).unwrap(), s.total_mass());
        assert!(s.ball_measure(0, 0.0).is_err());
        assert!(s.ball_measure(0, -1.0).is_err());
    }

    #[test]
    fn pair_ball_counts_union_once() {
        let s = line3();
        assert_eq!(s.pair_ball_measure(0, 2, 1.0).unwrap(), 3.0);
        assert_eq!(s.pair_ball_measure(0, 1, 1.0).unwrap(), 2.0);
        assert!(s.pair_ball_measure(1, 1, 1.0).is_err());
    }

    #[test]
    fn two_point_pair_ball_holds_both_centers() {
        let m = DistanceMatrix::from_lower_triangle(2, &[1.0]).unwrap();
        let s = DiscreteSpace::new(vec![], vec![0.5, 0.5], MetricSpec::ExplicitMatrix(m)).unwrap();
        assert_eq!(s.pair_ball_measure(0, 1, 1.0).unwrap(), 1.0);
        assert_eq!(s.diameter(), 1.0);
    }

    #[test]
    fn mesh_scale_is_largest_nearest_neighbour() {
        let s = line3();
        assert_eq!(s.mesh_scale(), 1.0);
        let e = DiscreteSpace::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![4.0, 0.0]],
            vec![1.0; 3],
            MetricSpec::Euclidean,
        )
        .unwrap();
        assert_eq!(e.mesh_scale(), 3.0);
        assert_eq!(e.diameter(), 4.0);
    }

    #[test]
    fn rejects_zero_weight_outside_explicit() {
        let r = DiscreteSpace::new(
            vec![vec![0.0], vec![1.0]],
            vec![1.0, 0.0],
            MetricSpec::Euclidean,
        );
        assert!(r.unwrap_err().is_input());
    }

    #[test]
    fn flags_zero_weight_in_explicit() {
        let m = DistanceMatrix::from_lower_triangle(3, &[1.0, 2.0, 1.0]).unwrap();
        let s =
            DiscreteSpace::new(vec![], vec![1.0, 0.0, 1.0], MetricSpec::ExplicitMatrix(m)).unwrap();
        assert_eq!(s.zero_weight_points(), &[1]);
    }

    #[test]
    fn rejects_duplicate_points() {
        let r = DiscreteSpace::new(
            vec![vec![0.0], vec![0.0], vec![1.0]],
            vec![1.0; 3],
            MetricSpec::Euclidean,
        );
        assert!(r.is_err());
    }
}
