//! JSON space files.
//!
//! ```json
//! { "metric": { "variant": "rickman_rug", "dimension": 3.0 },
//!   "points": [[0.005, 0.005], ...],
//!   "weights": [0.0001, ...] }
//! ```
//!
//! Explicit matrices carry `"matrix"`: the strict lower triangle in
//! row-major order (`d(1,0), d(2,0), d(2,1), ...`). Their `"points"` may be
//! empty.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DiscreteSpace, DistanceMatrix, MetricSpec};
use crate::error::Result;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    pub metric: MetricFile,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricFile {
    Euclidean {},
    ChordalSphere {},
    Snowflake { exponent: f64 },
    RickmanRug { dimension: f64 },
    ExplicitMatrix { matrix: Vec<f64> },
}

impl SpaceFile {
    pub fn from_space(space: &DiscreteSpace) -> Self {
        let metric = match space.metric() {
            MetricSpec::Euclidean => MetricFile::Euclidean {},
            MetricSpec::ChordalSphere => MetricFile::ChordalSphere {},
            MetricSpec::Snowflake { exponent } => MetricFile::Snowflake {
                exponent: *exponent,
            },
            MetricSpec::RickmanRug { dimension } => MetricFile::RickmanRug {
                dimension: *dimension,
            },
            MetricSpec::ExplicitMatrix(m) => MetricFile::ExplicitMatrix {
                matrix: m.lower_triangle(),
            },
        };
        let points = if space.dim() == 0 {
            Vec::new()
        } else {
            (0..space.len()).map(|i| space.coords(i).to_vec()).collect()
        };
        SpaceFile {
            metric,
            points,
            weights: space.weights().to_vec(),
        }
    }

    pub fn into_space(self) -> Result<DiscreteSpace> {
        let n = self.weights.len();
        let metric = match self.metric {
            MetricFile::Euclidean {} => MetricSpec::Euclidean,
            MetricFile::ChordalSphere {} => MetricSpec::ChordalSphere,
            MetricFile::Snowflake { exponent } => MetricSpec::Snowflake { exponent },
            MetricFile::RickmanRug { dimension } => MetricSpec::RickmanRug { dimension },
            MetricFile::ExplicitMatrix { matrix } => {
                let m = DistanceMatrix::from_lower_triangle(n, &matrix)?;
                m.validate(10_000, 0)?;
                MetricSpec::ExplicitMatrix(m)
            }
        };
        DiscreteSpace::new(self.points, self.weights, metric)
    }
}

pub fn to_json(space: &DiscreteSpace) -> String {
    serde_json::to_string(&SpaceFile::from_space(space)).expect("space file serializes")
}

pub fn from_json(text: &str) -> Result<DiscreteSpace> {
    let file: SpaceFile = serde_json::from_str(text)?;
    file.into_space()
}

pub fn read(path: impl AsRef<Path>) -> Result<DiscreteSpace> {
    from_json(&std::fs::read_to_string(path)?)
}

pub fn write(space: &DiscreteSpace, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json(space))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_round_trip() {
        let text = r#"{"metric":{"variant":"explicit_matrix","matrix":[1.0,2.0,1.0]},
                       "points":[],"weights":[1.0,1.0,1.0]}"#;
        let s = from_json(text).unwrap();
        assert_eq!(s.distance(0, 2).unwrap(), 2.0);
        let again = from_json(&to_json(&s)).unwrap();
        assert_eq!(to_json(&again), to_json(&s));
    }

    #[test]
    fn rejects_unknown_variant() {
        let text =
            r#"{"metric":{"variant":"hyperbolic"},"points":[[0.0],[1.0]],"weights":[1.0,1.0]}"#;
        assert!(from_json(text).unwrap_err().is_input());
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = r#"{"metric":{"variant":"euclidean","extra":1},"points":[[0.0],[1.0]],"weights":[1.0,1.0]}"#;
        assert!(from_json(text).is_err());
        let text = r#"{"metric":{"variant":"euclidean"},"points":[[0.0],[1.0]],"weights":[1.0,1.0],"x":0}"#;
        assert!(from_json(text).is_err());
    }

    #[test]
    fn rejects_triangle_violation() {
        let text = r#"{"metric":{"variant":"explicit_matrix","matrix":[1.0,5.0,1.0]},
                       "points":[],"weights":[1.0,1.0,1.0]}"#;
        let err = from_json(text).unwrap_err();
        assert!(matches!(err, crate::Error::MetricAxiom(_)), "{err}");
    }
}
