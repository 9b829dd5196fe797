//! Weak metric doubling measures on finite metric measure spaces.
//!
//! A [`DiscreteSpace`] is a weighted point cloud with a metric. On top of
//! it the crate computes measure-weighted chain lengths ([`chain`]),
//! estimates doubling, regularity and connectivity constants
//! ([`estimators`]), and builds separating rings and ring-based connectors
//! ([`rings`]).

pub mod chain;
pub mod error;
pub mod estimators;
pub mod generators;
pub mod graph;
pub mod rings;
pub mod rng;
pub mod space;

pub use error::{Error, Result};
pub use space::{DiscreteSpace, DistanceMatrix, MetricSpec};
