//! All constants in one report.

use serde::Serialize;

use super::{
    check_llc, estimate_ahlfors, estimate_doubling, estimate_wmdm_bounds, eta, AhlforsFit,
    GrowthFit, ScaleRange,
};
use crate::error::Result;
use crate::space::DiscreteSpace;

/// Inputs of [`estimate_constants`]. `None` scales fall back to
/// `[2·mesh, diam/4]`; a `None` separation to `max(4·mesh, 4δ)`.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantsConfig {
    pub seed: u64,
    pub s: f64,
    pub delta: f64,
    pub n_samples: usize,
    pub n_pairs: usize,
    pub scale_range: Option<(f64, f64)>,
    pub min_separation: Option<f64>,
    pub lambda_candidates: Vec<f64>,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig {
            seed: 0,
            s: 2.0,
            delta: 0.1,
            n_samples: 200,
            n_pairs: 50,
            scale_range: None,
            min_separation: None,
            lambda_candidates: vec![1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantsReport {
    pub c_d: f64,
    pub ahlfors: AhlforsFit,
    /// `None` when no candidate passed.
    pub lambda_llc: Option<f64>,
    pub c_w_hat: f64,
    pub c_s_hat: f64,
    pub growth: GrowthFit,
    /// `(t, η(t))` on a log grid, with `C = max(C_W_hat, C_S_hat)`.
    pub eta_samples: Vec<(f64, f64)>,
    /// Set when `s` exceeds the fitted dimension by more than 0.25: chain
    /// lengths then diverge as δ shrinks and the lower bound holds vacuously.
    pub vacuous_regime: bool,
    pub seed: u64,
    pub s: f64,
    pub delta: f64,
    pub scale_range: ScaleRange,
    pub min_separation: f64,
    pub samples: usize,
    pub pairs: usize,
    pub skipped_samples: usize,
    pub zero_weight_points: Vec<usize>,
    pub warnings: Vec<String>,
}

pub fn estimate_constants(space: &DiscreteSpace, cfg: &ConstantsConfig) -> Result<ConstantsReport> {
    let mesh = space.mesh_scale();
    let (lo, hi) = cfg
        .scale_range
        .unwrap_or((2.0 * mesh, space.diameter() / 4.0));
    let doubling = estimate_doubling(space, cfg.n_samples, (lo, hi), cfg.seed)?;
    let ahlfors = estimate_ahlfors(space, cfg.n_samples, (lo, hi), cfg.seed)?;
    let llc = check_llc(
        space,
        &cfg.lambda_candidates,
        cfg.n_samples.min(50),
        cfg.seed,
    )?;
    let min_sep = cfg
        .min_separation
        .unwrap_or((4.0 * mesh).max(4.0 * cfg.delta));
    let wmdm = estimate_wmdm_bounds(space, cfg.delta, cfg.s, cfg.n_pairs, min_sep, cfg.seed)?;
    let c = wmdm.c_w_hat.max(wmdm.c_s_hat).max(1.0);
    let eta_samples = (-8..=8)
        .map(|k| {
            let t = 2f64.powf(k as f64 / 2.0);
            (t, eta(t, c, doubling.growth.alpha))
        })
        .collect();
    Ok(ConstantsReport {
        c_d: doubling.c_d,
        vacuous_regime: cfg.s > ahlfors.s_fit + 0.25,
        lambda_llc: llc.lambda,
        c_w_hat: wmdm.c_w_hat,
        c_s_hat: wmdm.c_s_hat,
        growth: doubling.growth,
        eta_samples,
        seed: cfg.seed,
        s: cfg.s,
        delta: cfg.delta,
        scale_range: doubling.scale_range,
        min_separation: min_sep,
        samples: cfg.n_samples,
        pairs: wmdm.pairs,
        skipped_samples: doubling.skipped + ahlfors.skipped,
        zero_weight_points: space.zero_weight_points().to_vec(),
        warnings: wmdm.warnings,
        ahlfors,
    })
}
