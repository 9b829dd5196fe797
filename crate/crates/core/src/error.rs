use thiserror::Error;

/// Errors produced by the library.
///
/// Input errors are caller mistakes (bad ids, bad parameters, malformed
/// files). The remaining variants are computation failures on valid input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("metric axiom violated: {0}")]
    MetricAxiom(String),

    #[error("points {x} and {y} are not joined by any chain at scale {delta}")]
    Unreachable { x: usize, y: usize, delta: f64 },

    #[error("calibration impossible at point {point}: {reason}")]
    Calibration { point: usize, reason: String },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed space file: {0}")]
    Format(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the caller's input rather than by the
    /// computation itself.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::Input(_) | Error::MetricAxiom(_) | Error::Io(_) | Error::Format(_)
        )
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
