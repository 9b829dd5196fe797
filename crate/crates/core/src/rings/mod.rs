//! Separating rings in annuli, their nesting, ring covers of balls and the
//! ring-based connector.
//!
//! Continua are modelled as vertex sets of the mesh-scale proximity graph:
//! a ring "separates" when removing the vertices covered by its inflated
//! cover balls disconnects an inner witness from an outer witness.

mod annulus;
mod connector;
mod cover;
mod nesting;

use serde::Serialize;

pub use annulus::{cheapest_level_ring, cheapest_level_ring_in};
pub use connector::{
    connect_via_rings, Connector, ConnectorParams, LevelRecord, NestedConnectorTrace, Side,
};
pub use cover::{measure_calibrated_cover, CoverBall};
pub use nesting::{nesting_relation, ring_cover_of_ball, Nesting, RingCover, RingCoverParams};

use crate::error::{Error, Result};
use crate::space::DiscreteSpace;

/// Radius factors of the annulus `[inner·r, outer·r]` and of the guard ball
/// `guard·r` whose outside the ring must separate from `B(center, r)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Multipliers {
    pub inner: f64,
    pub outer: f64,
    pub guard: f64,
}

impl Default for Multipliers {
    fn default() -> Self {
        Multipliers {
            inner: 2.0,
            outer: 6.0,
            guard: 8.0,
        }
    }
}

impl Multipliers {
    /// The factors `2^(2k)`, `2^(5k)`, `2^(7k)` for the smallest `k` with
    /// `2^k > λ`.
    pub fn strict(lambda: f64) -> Self {
        let k = smallest_k(lambda);
        let p = |e: u32| 2f64.powi((e * k) as i32);
        Multipliers {
            inner: p(2),
            outer: p(5),
            guard: p(7),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1.0 < self.inner && self.inner < self.outer && self.outer < self.guard) {
            return Err(Error::input(format!(
                "multipliers must satisfy 1 < inner < outer < guard, got ({}, {}, {})",
                self.inner, self.outer, self.guard
            )));
        }
        Ok(())
    }
}

/// Smallest integer `k >= 1` with `2^k > λ`.
pub fn smallest_k(lambda: f64) -> u32 {
    let mut k = 1;
    while 2f64.powi(k as i32) <= lambda {
        k += 1;
    }
    k
}

#[derive(Clone, Debug, Serialize)]
pub struct RingParams {
    pub center: usize,
    pub r: f64,
    pub delta: f64,
    /// Cover balls are calibrated to measures in `[ε²/(2 C_D), ε²]`.
    pub epsilon: f64,
    /// Doubling constant used for the lower end of the calibration band.
    pub c_d: f64,
    pub lambda: f64,
    pub multipliers: Multipliers,
    /// Cover balls are inflated by this factor (closed balls).
    pub inflation: f64,
}

impl RingParams {
    /// Defaults: `ε² = 20 × median weight`, `C_D = 4`, `λ = 1`, multipliers
    /// `(2, 6, 8)`, inflation 2.
    pub fn new(space: &DiscreteSpace, center: usize, r: f64, delta: f64) -> Self {
        RingParams {
            center,
            r,
            delta,
            epsilon: default_epsilon(space),
            c_d: 4.0,
            lambda: 1.0,
            multipliers: Multipliers::default(),
            inflation: 2.0,
        }
    }

    /// Switches to the multipliers 2^{2k}, 2^{5k}, 2^{7k} and inflation 5.
    pub fn strict(mut self) -> Self {
        self.multipliers = Multipliers::strict(self.lambda);
        self.inflation = 5.0;
        self
    }

    pub fn k(&self) -> u32 {
        smallest_k(self.lambda)
    }

    pub(crate) fn validate(&self, space: &DiscreteSpace) -> Result<()> {
        space.check_id(self.center)?;
        self.multipliers.validate()?;
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::input(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if !(self.r >= space.mesh_scale()) {
            return Err(Error::input(format!(
                "ring radius {} is below the mesh scale {}",
                self.r,
                space.mesh_scale()
            )));
        }
        if !(self.multipliers.guard * self.r < space.diameter()) {
            return Err(Error::input(format!(
                "guard radius {} reaches the diameter {}",
                self.multipliers.guard * self.r,
                space.diameter()
            )));
        }
        let floor = 5.0 * space.median_weight();
        if !(self.epsilon * self.epsilon >= floor * (1.0 - 1e-12)) {
            return Err(Error::input(format!(
                "ε² = {} is below 5 × median weight = {floor}",
                self.epsilon * self.epsilon
            )));
        }
        if !(self.c_d >= 1.0) {
            return Err(Error::input("doubling constant must be at least 1"));
        }
        if !(self.inflation >= 2.0) {
            return Err(Error::input(
                "inflation below 2 does not guarantee that the cover is complete",
            ));
        }
        Ok(())
    }
}

pub fn default_epsilon(space: &DiscreteSpace) -> f64 {
    (20.0 * space.median_weight()).sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationCertificate {
    /// Points covered by the ring's inflated cover balls, ascending.
    pub removed: Vec<usize>,
    pub inner_witness: usize,
    pub outer_witness: usize,
    pub verified: bool,
}

impl SeparationCertificate {
    pub fn removed_mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &p in &self.removed {
            m[p] = true;
        }
        m
    }

    /// The component of the proximity graph minus the removed set that
    /// holds the inner witness.
    pub fn inside_mask(&self, space: &DiscreteSpace) -> Vec<bool> {
        let removed = self.removed_mask(space.len());
        space
            .proximity_graph()
            .reach(self.inner_witness, |p| !removed[p])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RingChain {
    pub center: usize,
    pub r: f64,
    /// A δ-chain through the ring's cover-ball centres.
    pub chain: Vec<usize>,
    /// `Σ mu(B_{x_j x_{j-1}})^(1/2)` along the chain.
    pub total_weight: f64,
    /// The level set the ring was taken from.
    pub level: usize,
    /// The level with the smallest level weight.
    pub argmin_level: usize,
    /// Depth `n` of the counting function: its least value on the outer
    /// shell.
    pub depth: usize,
    /// Number of cover balls.
    pub cover_size: usize,
    /// `W_j = Σ mu(inflated ball)^(1/2)` over balls in level set `j`.
    pub level_weights: Vec<f64>,
    /// Cover balls forming the ring, after pruning.
    pub balls: Vec<CoverBall>,
    pub certificate: SeparationCertificate,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_multipliers_follow_k() {
        assert_eq!(smallest_k(1.0), 1);
        assert_eq!(smallest_k(2.0), 2);
        assert_eq!(smallest_k(3.9), 2);
        let m = Multipliers::strict(3.0);
        assert_eq!((m.inner, m.outer, m.guard), (16.0, 1024.0, 16384.0));
    }

    #[test]
    fn unordered_multipliers_are_rejected() {
        let m = Multipliers {
            inner: 2.0,
            outer: 8.0,
            guard: 6.0,
        };
        assert!(m.validate().unwrap_err().is_input());
    }

    #[test]
    fn params_reject_guard_beyond_diameter() {
        let s = crate::generators::gen_round_sphere(500, 1).unwrap();
        let p = RingParams::new(&s, 0, 0.3, 0.2);
        assert!(p.validate(&s).unwrap_err().is_input());
        let p = RingParams::new(&s, 0, 0.2, 0.2).strict();
        assert!(p.validate(&s).unwrap_err().is_input());
    }
}
