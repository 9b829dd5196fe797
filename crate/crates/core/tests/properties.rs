use proptest::prelude::*;

use qslab::chain::{build_delta_graph, chain_distance};
use qslab::generators::gen_explicit;
use qslab::{DiscreteSpace, DistanceMatrix, MetricSpec};

/// Distances and weights of a small space, kept outside the library.
#[derive(Clone, Debug)]
struct Raw {
    d: Vec<Vec<f64>>,
    w: Vec<f64>,
}

impl Raw {
    fn space(&self) -> DiscreteSpace {
        gen_explicit(DistanceMatrix::from_rows(&self.d).unwrap(), self.w.clone()).unwrap()
    }

    fn edge(&self, u: usize, v: usize, s: f64) -> f64 {
        let r = self.d[u][v];
        let mut m = 0.0;
        for p in 0..self.w.len() {
            if self.d[u][p] < r || self.d[v][p] < r {
                m += self.w[p];
            }
        }
        let w = if s == 2.0 { m.sqrt() } else { m.powf(1.0 / s) };
        let q = self.quantum(s);
        (w / q).round() * q
    }

    /// Power of two making sums of up to n - 1 full-mass edges exact.
    fn quantum(&self, s: f64) -> f64 {
        let total: f64 = self.w.iter().sum();
        let bound = (self.w.len() - 1) as f64 * total.powf(1.0 / s);
        let mut e = -1074i32;
        while 2f64.powi(e + 52) < bound {
            e += 1;
        }
        2f64.powi(e)
    }

    /// Cheapest simple δ-path by exhaustive search.
    fn brute(&self, x: usize, y: usize, delta: f64, s: f64) -> f64 {
        let n = self.w.len();
        let edge: Vec<Vec<Option<f64>>> = (0..n)
            .map(|u| {
                (0..n)
                    .map(|v| {
                        (self.d[u][v] <= delta && self.d[u][v] > 0.0).then(|| self.edge(u, v, s))
                    })
                    .collect()
            })
            .collect();
        fn go(
            edge: &[Vec<Option<f64>>],
            at: usize,
            y: usize,
            seen: &mut [bool],
            acc: f64,
            best: &mut f64,
        ) {
            if at == y {
                *best = best.min(acc);
                return;
            }
            for v in 0..edge.len() {
                if let (false, Some(w)) = (seen[v], edge[at][v]) {
                    seen[v] = true;
                    go(edge, v, y, seen, acc + w, best);
                    seen[v] = false;
                }
            }
        }
        if x == y {
            return 0.0;
        }
        let mut seen = vec![false; n];
        seen[x] = true;
        let mut best = f64::INFINITY;
        go(&edge, x, y, &mut seen, 0.0, &mut best);
        best
    }
}

fn raw_space(max_n: usize) -> impl Strategy<Value = Raw> {
    (2..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), n),
            prop::collection::vec(0.1f64..2.0, n),
        )
            .prop_map(|(pts, w)| {
                let d = pts
                    .iter()
                    .map(|a| {
                        pts.iter()
                            .map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
                            .collect()
                    })
                    .collect();
                Raw { d, w }
            })
    })
}

fn plane(points: Vec<(f64, f64)>) -> DiscreteSpace {
    let n = points.len();
    DiscreteSpace::new(
        points.into_iter().map(|(a, b)| vec![a, b]).collect(),
        vec![1.0; n],
        MetricSpec::Euclidean,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dijkstra_matches_exhaustive_search(raw in raw_space(8), delta in 1.0f64..12.0, s in prop::sample::select(vec![1.5, 2.0, 3.0])) {
        let space = raw.space();
        let g = build_delta_graph(&space, delta, s).unwrap();
        let n = raw.w.len();
        for x in 0..n {
            for y in 0..n {
                let want = raw.brute(x, y, delta, s);
                let got = chain_distance(&g, x, y).unwrap();
                prop_assert_eq!(got.total_weight, want);
                if want.is_finite() {
                    prop_assert_eq!(g.chain_weight(&got.path), Some(want));
                }
            }
        }
    }

    #[test]
    fn chain_metric_axioms(pts in prop::collection::vec((0.0f64..5.0, 0.0f64..5.0), 3..30), delta in 1.5f64..4.0) {
        let space = plane(pts);
        let g = build_delta_graph(&space, delta, 2.0).unwrap();
        let coarse = build_delta_graph(&space, 2.0 * delta, 2.0).unwrap();
        let n = space.len();
        let q = |g, x, y| chain_distance(g, x, y).unwrap().total_weight;
        for x in 0..n.min(6) {
            prop_assert_eq!(q(&g, x, x), 0.0);
            for y in 0..n {
                prop_assert_eq!(q(&g, x, y), q(&g, y, x));
                prop_assert!(q(&coarse, x, y) <= q(&g, x, y));
                for z in 0..n.min(6) {
                    let (xy, yz, xz) = (q(&g, x, y), q(&g, y, z), q(&g, x, z));
                    if xy.is_finite() && yz.is_finite() {
                        prop_assert!(xz <= xy + yz);
                    }
                }
            }
        }
    }

    #[test]
    fn weights_scale_by_root(raw in raw_space(7), c in 0.1f64..50.0, s in prop::sample::select(vec![1.0, 2.0, 3.0])) {
        let space = raw.space();
        let scaled = Raw { d: raw.d.clone(), w: raw.w.iter().map(|w| w * c).collect() }.space();
        let delta = 20.0;
        let a = chain_distance(&build_delta_graph(&space, delta, s).unwrap(), 0, 1).unwrap().total_weight;
        let b = chain_distance(&build_delta_graph(&scaled, delta, s).unwrap(), 0, 1).unwrap().total_weight;
        let want = a * c.powf(1.0 / s);
        prop_assert!((b - want).abs() <= 1e-9 * want.max(1.0), "{} vs {}", b, want);
    }

    #[test]
    fn pair_ball_grows_with_scale(raw in raw_space(9), c1 in 0.1f64..3.0, c2 in 0.1f64..3.0) {
        let space = raw.space();
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let n = raw.w.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if raw.d[i][j] > 0.0 {
                    prop_assert!(space.pair_ball_measure(i, j, lo).unwrap() <= space.pair_ball_measure(i, j, hi).unwrap());
                }
            }
        }
    }

    #[test]
    fn ball_queries_match_scan(pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..200), r in 0.01f64..4.0, exponent in 0.3f64..1.0) {
        for metric in [MetricSpec::Euclidean, MetricSpec::Snowflake { exponent }, MetricSpec::RickmanRug { dimension: 3.0 }] {
            let n = pts.len();
            let space = DiscreteSpace::new(pts.iter().map(|p| vec![p.0, p.1]).collect(), vec![1.0; n], metric).unwrap();
            let want: Vec<usize> = (0..n).filter(|&p| space.d(0, p) < r).collect();
            prop_assert_eq!(space.ball_points(0, r), want);
            let want: Vec<usize> = (0..n).filter(|&p| space.d(0, p) <= r).collect();
            prop_assert_eq!(space.closed_ball_points(0, r), want);
        }
    }

    #[test]
    fn coordinate_metrics_are_metrics(pts in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3), dim in 2.1f64..5.0, exponent in 0.2f64..1.0) {
        let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.0, p.1]).collect();
        for metric in [MetricSpec::Euclidean, MetricSpec::Snowflake { exponent }, MetricSpec::RickmanRug { dimension: dim }] {
            let d = |a: &[f64], b: &[f64]| metric.coord_distance(a, b);
            for a in &rows {
                prop_assert_eq!(d(a, a), 0.0);
                for b in &rows {
                    prop_assert_eq!(d(a, b), d(b, a));
                    for c in &rows {
                        prop_assert!(d(a, c) <= (d(a, b) + d(b, c)) * (1.0 + 1e-12) + 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn sphere_points_are_metric(n in 10usize..200, seed in any::<u64>()) {
        let s = qslab::generators::gen_round_sphere(n, seed).unwrap();
        prop_assert_eq!(s.check_triangles(500, seed).unwrap(), 500);
        prop_assert!(s.diameter() <= 2.0 + 1e-12);
    }
}
