//! One function per subcommand. Each returns the report body, an optional
//! CSV table and the named random streams it consumed.

use serde::Serialize;
use serde_json::{json, Value};

use qslab::chain::{chain_profiles, ChainProfile};
use qslab::estimators::{
    dimension_blowup_probe, estimate_constants, estimate_doubling, qs_profile, random_pairs,
    rug_qs_failure_probe, ConstantsConfig,
};
use qslab::rings::{cheapest_level_ring, ConnectorParams, Multipliers, RingParams};
use qslab::{DiscreteSpace, Error, Result};

use crate::args::{
    ChainArgs, ConnectArgs, ConstantsArgs, ProbeDimensionArgs, ProbeRugArgs, QsProfileArgs,
    RingArgs, RingShape, ValidateArgs,
};

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Output {
    pub report: Value,
    pub table: Option<Table>,
    pub streams: Vec<&'static str>,
    /// A report was produced but the computation fell short; exit 2.
    pub failure: Option<String>,
}

impl Output {
    fn new(report: impl Serialize) -> Self {
        Output {
            report: serde_json::to_value(report).expect("reports serialize"),
            table: None,
            streams: Vec::new(),
            failure: None,
        }
    }

    fn table(mut self, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        self.table = Some(Table { header, rows });
        self
    }

    fn streams(mut self, names: &[&'static str]) -> Self {
        self.streams = names.to_vec();
        self
    }
}

fn cell(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(cell).unwrap_or_default()
}

pub fn chain(space: &DiscreteSpace, a: &ChainArgs) -> Result<Output> {
    let pairs = match (a.x, a.y) {
        (Some(x), Some(y)) => vec![(x, y)],
        _ => {
            let first = a.deltas.first().copied().unwrap_or(0.0);
            let min_sep = a
                .min_separation
                .unwrap_or((4.0 * space.mesh_scale()).max(first));
            let pairs = random_pairs(space, a.pairs, min_sep, a.seed);
            if pairs.len() < a.pairs {
                return Err(Error::Input(format!(
                    "found only {} of {} pairs at distance ≥ {min_sep}",
                    pairs.len(),
                    a.pairs
                )));
            }
            pairs
        }
    };
    let profiles = chain_profiles(space, &pairs, &a.deltas, a.s)?;
    let mut rows = Vec::new();
    for (i, p) in profiles.iter().enumerate() {
        let d = space.distance(p.x, p.y)?;
        for &(delta, q) in &p.entries {
            rows.push(vec![
                i.to_string(),
                p.x.to_string(),
                p.y.to_string(),
                cell(d),
                cell(delta),
                cell(q),
            ]);
        }
    }
    #[derive(Serialize)]
    struct Report<'a> {
        s: f64,
        deltas: &'a [f64],
        truncated_pairs: usize,
        profiles: &'a [ChainProfile],
    }
    let report = Report {
        s: a.s,
        deltas: &a.deltas,
        truncated_pairs: profiles.iter().filter(|p| p.truncated).count(),
        profiles: &profiles,
    };
    Ok(Output::new(report)
        .table(vec!["pair", "x", "y", "d", "delta", "q"], rows)
        .streams(&["pairs"]))
}

pub fn constants(space: &DiscreteSpace, a: &ConstantsArgs) -> Result<Output> {
    let defaults = ConstantsConfig::default();
    let scale_range = match (a.scale_lo, a.scale_hi) {
        (None, None) => None,
        (lo, hi) => Some((
            lo.unwrap_or(2.0 * space.mesh_scale()),
            hi.unwrap_or(space.diameter() / 4.0),
        )),
    };
    let cfg = ConstantsConfig {
        seed: a.seed,
        s: a.s,
        delta: a.delta,
        n_samples: a.samples,
        n_pairs: a.pairs,
        scale_range,
        min_separation: a.min_separation,
        lambda_candidates: a.lambdas.clone().unwrap_or(defaults.lambda_candidates),
    };
    let report = estimate_constants(space, &cfg)?;
    let rows = report
        .eta_samples
        .iter()
        .map(|&(t, eta)| vec![cell(t), cell(eta)])
        .collect();
    Ok(Output::new(&report)
        .table(vec!["t", "eta"], rows)
        .streams(&["doubling", "ahlfors", "llc", "wmdm-pairs"]))
}

pub fn probe_dimension(space: &DiscreteSpace, a: &ProbeDimensionArgs) -> Result<Output> {
    let pair = match (a.x, a.y) {
        (Some(x), Some(y)) => (x, y),
        _ => *random_pairs(space, 1, space.diameter() / 4.0, a.seed)
            .first()
            .ok_or_else(|| Error::Input("no pair at distance ≥ diameter / 4".into()))?,
    };
    let delta0 = a.delta0.unwrap_or(space.diameter() / 5.0);
    let probe = dimension_blowup_probe(space, a.s, pair, a.halvings, delta0)?;
    let rows = probe
        .entries
        .iter()
        .map(|e| vec![cell(e.delta), cell(e.q), cell(e.ratio)])
        .collect();
    let failure = probe.truncated.then(|| {
        format!(
            "δ-graph disconnects {} and {} at δ = {}; the profile is truncated",
            probe.x,
            probe.y,
            opt(probe.unreachable_at)
        )
    });
    let mut out = Output::new(&probe)
        .table(vec!["delta", "q", "ratio"], rows)
        .streams(&["pairs"]);
    out.failure = failure;
    Ok(out)
}

pub fn probe_rug(space: &DiscreteSpace, a: &ProbeRugArgs) -> Result<Output> {
    let rows = rug_qs_failure_probe(space, &a.scales)?;
    let table = rows
        .iter()
        .map(|r| {
            vec![
                cell(r.a),
                opt(r.t),
                opt(r.distortion),
                r.skipped.to_string(),
            ]
        })
        .collect();
    Ok(Output::new(json!({ "rows": rows })).table(vec!["a", "t", "distortion", "skipped"], table))
}

fn multipliers(shape: &RingShape) -> Option<Multipliers> {
    shape.multipliers.as_ref().map(|m| Multipliers {
        inner: m[0],
        outer: m[1],
        guard: m[2],
    })
}

pub fn ring(space: &DiscreteSpace, a: &RingArgs) -> Result<Output> {
    let mut p = RingParams::new(space, a.center, a.r, a.delta);
    p.lambda = a.lambda;
    if a.strict {
        p = p.strict();
    }
    if let Some(e) = a.shape.epsilon {
        p.epsilon = e;
    }
    p.c_d = a.shape.c_d;
    if let Some(m) = multipliers(&a.shape) {
        p.multipliers = m;
    }
    if let Some(i) = a.shape.inflation {
        p.inflation = i;
    }
    let ring = cheapest_level_ring(space, &p)?;
    let rows = ring
        .level_weights
        .iter()
        .enumerate()
        .map(|(j, &w)| {
            vec![
                (j + 1).to_string(),
                cell(w),
                ((j + 1) == ring.level).to_string(),
            ]
        })
        .collect();
    Ok(Output::new(json!({ "params": p, "ring": ring }))
        .table(vec!["level", "weight", "chosen"], rows))
}

pub fn connect(space: &DiscreteSpace, a: &ConnectArgs) -> Result<Output> {
    let mut p = ConnectorParams::new(space, a.delta);
    if let Some(l) = a.l {
        p.l = l;
    }
    if let Some(e) = a.shape.epsilon {
        p.epsilon = e;
    }
    p.c_d = a.shape.c_d;
    if let Some(m) = multipliers(&a.shape) {
        p.multipliers = m;
    }
    if let Some(i) = a.shape.inflation {
        p.inflation = i;
    }
    let trace = qslab::rings::connect_via_rings(space, a.x, a.y, &p)?;
    let rows = trace
        .levels
        .iter()
        .map(|l| {
            vec![
                l.level.to_string(),
                format!("{:?}", l.side).to_lowercase(),
                cell(l.ball_radius),
                cell(l.ball_measure),
                cell(l.ring_weight),
                opt(l.tau),
            ]
        })
        .collect();
    Ok(Output::new(json!({ "params": p, "trace": trace })).table(
        vec![
            "level",
            "side",
            "ball_radius",
            "ball_measure",
            "ring_weight",
            "tau",
        ],
        rows,
    ))
}

pub fn qs(space: &DiscreteSpace, a: &QsProfileArgs) -> Result<Output> {
    let (alpha, source, streams): (f64, &str, &[&'static str]) = match a.alpha {
        Some(alpha) => (alpha, "flag", &["qs-triples"]),
        None => {
            let range = (2.0 * space.mesh_scale(), space.diameter() / 4.0);
            let fit = estimate_doubling(space, a.samples, range, a.seed)?;
            (fit.growth.alpha, "growth_fit", &["doubling", "qs-triples"])
        }
    };
    let profile = qs_profile(space, a.s, a.delta, a.triples, alpha, a.seed)?;
    let rows = profile
        .samples
        .iter()
        .map(|q| {
            vec![
                q.x.to_string(),
                q.y.to_string(),
                q.z.to_string(),
                cell(q.t),
                cell(q.ratio),
            ]
        })
        .collect();
    Ok(
        Output::new(json!({ "alpha_source": source, "profile": profile }))
            .table(vec!["x", "y", "z", "t", "ratio"], rows)
            .streams(streams),
    )
}

pub fn validate(space: &DiscreteSpace, a: &ValidateArgs) -> Result<Output> {
    let checked = space.check_triangles(a.samples, a.seed)?;
    let report = json!({
        "points": space.len(),
        "dimension": space.dim(),
        "metric": space.metric().name(),
        "diameter": space.diameter(),
        "diameter_exact": space.diameter_is_exact(),
        "mesh_scale": space.mesh_scale(),
        "total_mass": space.total_mass(),
        "median_weight": space.median_weight(),
        "zero_weight_points": space.zero_weight_points().len(),
        "triples_checked": checked,
    });
    Ok(Output::new(report).streams(&["space-validation"]))
}
