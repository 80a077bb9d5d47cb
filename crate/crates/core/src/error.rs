use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameters outside the admissible window: 9 M^2 Lambda = {0}, need 0 < 9 M^2 Lambda < 1")]
    Inadmissible(f64),
    #[error("radius {r} outside the exterior region ({lo}, {hi})")]
    RadiusDomain { r: f64, lo: f64, hi: f64 },
    #[error("iteration failed to converge: {0}")]
    NoConvergence(String),
    #[error("Im lambda = {im} is below the Jost analyticity strip limit -{limit}")]
    StripViolation { im: f64, limit: f64 },
    #[error("contour grazes a zero of the Wronskian: min |w| = {0} on the boundary")]
    BoundaryGraze(f64),
    #[error("contour of radius {radius} around {center} leaves the admissible region: {reason}")]
    ContourDomain {
        center: String,
        radius: f64,
        reason: String,
    },
    #[error("consistency failure: {0}")]
    Consistency(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("divergence detected at step {step} (t = {time}): non-finite field value")]
    Divergence { step: usize, time: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
