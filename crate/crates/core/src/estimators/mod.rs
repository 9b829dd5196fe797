//! Estimates of the constants in the doubling, regularity, connectivity and
//! chain-length inequalities, and the two counterexample probes.
//!
//! Every estimator takes an explicit seed and draws from its own named
//! random stream. Samples are drawn sequentially, evaluated in parallel and
//! reduced in sample order, so results do not depend on the thread count.

mod constants;
mod growth;
mod llc;
mod probes;
mod qs;
mod wmdm;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use constants::{estimate_constants, ConstantsConfig, ConstantsReport};
pub use growth::{estimate_ahlfors, estimate_doubling, AhlforsFit, DoublingEstimate, GrowthFit};
pub use llc::{check_llc, LlcResult};
pub use probes::{
    dimension_blowup_probe, rug_qs_failure_probe, BlowupEntry, BlowupProbe, BlowupVerdict,
    RugProbeRow, BLOWUP_THRESHOLD,
};
pub use qs::{eta, fit_envelope, qs_profile, QsProfile, QsSample};
pub use wmdm::{
    delta_stability_check, estimate_wmdm_bounds, DeltaStability, StabilityRow, WmdmBounds,
};

use crate::error::{Error, Result};
use crate::rng;
use crate::space::DiscreteSpace;

/// Fraction of skipped samples above which an estimate is rejected.
pub const MAX_SKIP_FRACTION: f64 = 0.2;

/// A radius range after clamping to `[mesh scale, diameter/4]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScaleRange {
    pub lo: f64,
    pub hi: f64,
}

impl ScaleRange {
    pub fn clamped(space: &DiscreteSpace, lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::input(format!("bad scale range [{lo}, {hi}]")));
        }
        let floor = space.mesh_scale();
        let ceil = space.diameter() / 4.0;
        let (a, b) = (lo.max(floor), hi.min(ceil));
        if a > b {
            return Err(Error::input(format!(
                "scale range [{lo}, {hi}] misses the usable band [{floor}, {ceil}]"
            )));
        }
        Ok(ScaleRange { lo: a, hi: b })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.hi == self.lo {
            return self.lo;
        }
        let u: f64 = rng.gen();
        (self.lo.ln() + u * (self.hi.ln() - self.lo.ln())).exp()
    }
}

fn pick(rng: &mut ChaCha8Rng, from: &[usize]) -> usize {
    from[rng.gen_range(0..from.len())]
}

/// Sample centres for balls up to `radius`: interior points when any exist,
/// else the points clear of the patch margin, else every point.
fn centers(space: &DiscreteSpace, radius: f64) -> Vec<usize> {
    let inner = space.interior_points(radius);
    if !inner.is_empty() {
        return inner;
    }
    let band = space.interior_points(0.0);
    if !band.is_empty() {
        return band;
    }
    (0..space.len()).collect()
}

/// True when the open ball holds no point besides its centre.
fn atom_only(space: &DiscreteSpace, center: usize, r: f64) -> bool {
    let mut others = false;
    space.for_each_within(center, r, false, |p, _| others |= p != center);
    !others
}

fn check_skips(skipped: usize, total: usize, what: &str) -> Result<()> {
    if total == 0 || skipped as f64 > MAX_SKIP_FRACTION * total as f64 {
        return Err(Error::Estimation(format!(
            "{what}: {skipped} of {total} samples fell in the atomic regime"
        )));
    }
    Ok(())
}

/// Up to `count` pairs of distinct points at distance at least `min_sep`,
/// drawn from the named stream `"pairs"`.
pub fn random_pairs(
    space: &DiscreteSpace,
    count: usize,
    min_sep: f64,
    seed: u64,
) -> Vec<(usize, usize)> {
    let all: Vec<usize> = (0..space.len()).collect();
    sample_pairs(space, &mut rng::stream(seed, "pairs"), &all, count, min_sep)
}

/// Draws up to `count` pairs of distinct points at distance at least
/// `min_sep`, from `from`. Gives up after `200 * count` attempts.
fn sample_pairs(
    space: &DiscreteSpace,
    rng: &mut ChaCha8Rng,
    from: &[usize],
    count: usize,
    min_sep: f64,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(count);
    let mut attempts = 0;
    while pairs.len() < count && attempts < 200 * count.max(1) {
        attempts += 1;
        let x = pick(rng, from);
        let y = pick(rng, from);
        if x != y && space.d(x, y) >= min_sep {
            pairs.push((x, y));
        }
    }
    pairs
}
