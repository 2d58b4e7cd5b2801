use crate::model::Point3;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("non-finite coordinate in point ({x}, {y}, {z})")]
    NonFinitePoint { x: f64, y: f64, z: f64 },

    #[error("field is not C² at {point:?}: {reason}")]
    NotC2 { point: Point3, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("no certificate found within budget: {0}")]
    NoCertificate(String),

    #[error("trajectory escaped numeric range at step {step}")]
    Escaped { step: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
