//! Range-query structures behind ball measures.

use super::metric::{DistanceMatrix, MetricSpec};

const LEAF: usize = 8;

/// Spatial index over the point set.
///
/// Coordinate metrics use an implicit kd-tree queried with the metric's
/// bounding box and filtered exactly; explicit matrices keep each row's
/// distances sorted.
#[derive(Clone, Debug)]
pub enum BallIndex {
    KdTree(KdTree),
    SortedRows(SortedRows),
}

#[derive(Clone, Debug)]
pub struct KdTree {
    dim: usize,
    /// Point ids in tree order; node `[lo, hi)` splits at `(lo + hi) / 2`.
    order: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct SortedRows {
    /// Per row: (distance, id) ascending, excluding the row's own point.
    rows: Vec<Vec<(f64, u32)>>,
}

impl BallIndex {
    pub(crate) fn build(metric: &MetricSpec, coords: &[f64], dim: usize, n: usize) -> Self {
        match metric {
            MetricSpec::ExplicitMatrix(m) => BallIndex::SortedRows(SortedRows::build(m)),
            _ => BallIndex::KdTree(KdTree::build(coords, dim, n)),
        }
    }
}

impl KdTree {
    fn build(coords: &[f64], dim: usize, n: usize) -> Self {
        let mut order: Vec<u32> = (0..n as u32).collect();
        if dim > 0 {
            split(&mut order, coords, dim, 0);
        }
        KdTree { dim, order }
    }

    /// Calls `f` for every point inside the closed box `[lo, hi]`.
    pub(crate) fn for_each_in_box(
        &self,
        coords: &[f64],
        lo: &[f64],
        hi: &[f64],
        f: &mut dyn FnMut(usize),
    ) {
        self.visit(coords, 0, self.order.len(), 0, lo, hi, f);
    }

    #[allow(clippy::too_many_arguments)]
    fn visit(
        &self,
        coords: &[f64],
        start: usize,
        end: usize,
        depth: usize,
        lo: &[f64],
        hi: &[f64],
        f: &mut dyn FnMut(usize),
    ) {
        let dim = self.dim;
        let inside = |p: usize| {
            let c = &coords[p * dim..(p + 1) * dim];
            c.iter()
                .zip(lo.iter().zip(hi))
                .all(|(x, (a, b))| *x >= *a && *x <= *b)
        };
        if end - start <= LEAF {
            for &p in &self.order[start..end] {
                if inside(p as usize) {
                    f(p as usize);
                }
            }
            return;
        }
        let mid = (start + end) / 2;
        let axis = depth % dim;
        let p = self.order[mid] as usize;
        let split = coords[p * dim + axis];
        if inside(p) {
            f(p);
        }
        if lo[axis] <= split {
            self.visit(coords, start, mid, depth + 1, lo, hi, f);
        }
        if hi[axis] >= split {
            self.visit(coords, mid + 1, end, depth + 1, lo, hi, f);
        }
    }
}

fn split(order: &mut [u32], coords: &[f64], dim: usize, depth: usize) {
    if order.len() <= LEAF {
        return;
    }
    let axis = depth % dim;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        let ca = coords[a as usize * dim + axis];
        let cb = coords[b as usize * dim + axis];
        ca.total_cmp(&cb).then(a.cmp(&b))
    });
    let (left, rest) = order.split_at_mut(mid);
    split(left, coords, dim, depth + 1);
    split(&mut rest[1..], coords, dim, depth + 1);
}

impl SortedRows {
    fn build(m: &DistanceMatrix) -> Self {
        let n = m.len();
        let rows = (0..n)
            .map(|i| {
                let mut row: Vec<(f64, u32)> = m
                    .row(i)
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(j, &d)| (d, j as u32))
                    .collect();
                row.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                row
            })
            .collect();
        SortedRows { rows }
    }

    /// Points other than `i` within `r` of `i`, ascending by distance.
    pub(crate) fn within(&self, i: usize, r: f64, closed: bool) -> &[(f64, u32)] {
        let row = &self.rows[i];
        let end = if closed {
            row.partition_point(|&(d, _)| d <= r)
        } else {
            row.partition_point(|&(d, _)| d < r)
        };
        &row[..end]
    }

    pub(crate) fn nearest(&self, i: usize) -> Option<f64> {
        self.rows[i].first().map(|&(d, _)| d)
    }
}
