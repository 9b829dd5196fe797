//! Doubling constant, two-sided growth envelope and Ahlfors regularity.

use rayon::prelude::*;
use serde::Serialize;

use super::{atom_only, centers, check_skips, pick, ScaleRange};
use crate::error::{Error, Result};
use crate::rng;
use crate::space::DiscreteSpace;

/// Envelope `rho <= C max(t^alpha, t^(1/alpha))` for ball-measure ratios
/// `rho = mu(B(x, r2)) / mu(B(x, r1))` at radius ratio `t = r2 / r1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthFit {
    pub c: f64,
    pub alpha: f64,
}

impl GrowthFit {
    pub fn bound(&self, t: f64) -> f64 {
        self.c * t.powf(self.alpha).max(t.powf(1.0 / self.alpha))
    }

    /// Fits `alpha` as the least-squares slope through the origin of
    /// `log rho` against `log t` over samples with `t > 1`, then lifts `C`
    /// until the envelope covers every sample.
    pub fn fit(samples: &[(f64, f64)]) -> Result<Self> {
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for &(t, rho) in samples.iter().filter(|s| s.0 > 1.0) {
            let (lx, ly) = (t.ln(), rho.ln());
            sxy += lx * ly;
            sxx += lx * lx;
        }
        if sxx == 0.0 {
            return Err(Error::Estimation("no growth samples with r2 > r1".into()));
        }
        let slope = sxy / sxx;
        let alpha = slope.max(1.0 / slope).max(1.0 + 1e-9);
        let mut fit = GrowthFit { c: 1.0, alpha };
        let c = samples
            .iter()
            .map(|&(t, rho)| rho / fit.bound(t))
            .fold(1.0, f64::max);
        fit.c = c;
        Ok(fit)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DoublingEstimate {
    pub c_d: f64,
    pub growth: GrowthFit,
    pub scale_range: ScaleRange,
    pub samples: usize,
    pub skipped: usize,
}

/// `C_D` as the largest sampled `mu(B(x, 2R)) / mu(B(x, R))` with `R` in the
/// clamped scale range, together with a growth envelope fitted on radius
/// pairs drawn from the same range.
pub fn estimate_doubling(
    space: &DiscreteSpace,
    n_samples: usize,
    scale_range: (f64, f64),
    seed: u64,
) -> Result<DoublingEstimate> {
    let range = ScaleRange::clamped(space, scale_range.0, scale_range.1)?;
    let pool = centers(space, range.hi);
    let mut rng = rng::stream(seed, "doubling");
    let draws: Vec<(usize, f64, f64)> = (0..n_samples)
        .map(|_| {
            let x = pick(&mut rng, &pool);
            (x, range.sample(&mut rng), range.sample(&mut rng))
        })
        .collect();
    let evaluated: Vec<Option<(f64, (f64, f64), (f64, f64))>> = draws
        .par_iter()
        .map(|&(x, r, r2)| {
            let lo = r.min(r2);
            if atom_only(space, x, lo) {
                return None;
            }
            let m = |radius: f64| space.mass_of(&space.ball_points(x, radius));
            let (m_r, m_2r, m_r2) = (m(r), m(2.0 * r), m(r2));
            Some((m_2r / m_r, (2.0, m_2r / m_r), (r2 / r, m_r2 / m_r)))
        })
        .collect();
    let skipped = evaluated.iter().filter(|e| e.is_none()).count();
    check_skips(skipped, n_samples, "doubling estimate")?;
    let mut c_d: f64 = 1.0;
    let mut growth = Vec::with_capacity(2 * n_samples);
    for (ratio, a, b) in evaluated.into_iter().flatten() {
        c_d = c_d.max(ratio);
        growth.push(a);
        growth.push(b);
    }
    Ok(DoublingEstimate {
        c_d,
        growth: GrowthFit::fit(&growth)?,
        scale_range: range,
        samples: n_samples,
        skipped,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AhlforsFit {
    /// Regularity constant: `max(mu / r^s_fit, r^s_fit / mu)` over samples.
    pub a: f64,
    /// Slope of the `log mu(B(x,r))` against `log r` regression.
    pub s_fit: f64,
    pub scale_range: ScaleRange,
    pub samples: usize,
    pub skipped: usize,
}

pub fn estimate_ahlfors(
    space: &DiscreteSpace,
    n_samples: usize,
    scale_range: (f64, f64),
    seed: u64,
) -> Result<AhlforsFit> {
    let range = ScaleRange::clamped(space, scale_range.0, scale_range.1)?;
    let pool = centers(space, range.hi);
    let mut rng = rng::stream(seed, "ahlfors");
    let draws: Vec<(usize, f64)> = (0..n_samples)
        .map(|_| (pick(&mut rng, &pool), range.sample(&mut rng)))
        .collect();
    let evaluated: Vec<Option<(f64, f64)>> = draws
        .par_iter()
        .map(|&(x, r)| {
            if atom_only(space, x, r) {
                None
            } else {
                Some((r, space.mass_of(&space.ball_points(x, r))))
            }
        })
        .collect();
    let skipped = evaluated.iter().filter(|e| e.is_none()).count();
    check_skips(skipped, n_samples, "Ahlfors fit")?;
    let pts: Vec<(f64, f64)> = evaluated
        .into_iter()
        .flatten()
        .map(|(r, m)| (r.ln(), m.ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Estimation(
            "Ahlfors fit needs at least two distinct radii".into(),
        ));
    }
    let s_fit = sxy / sxx;
    let a = pts
        .iter()
        .map(|&(lr, lm)| (lm - s_fit * lr).exp())
        .map(|v| v.max(1.0 / v))
        .fold(1.0, f64::max);
    Ok(AhlforsFit {
        a,
        s_fit,
        scale_range: range,
        samples: n_samples,
        skipped,
    })
}
