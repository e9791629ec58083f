use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value while evaluating at {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge: estimate {estimate}, achieved error {achieved_error}")]
    QuadratureNonConvergence { estimate: f64, achieved_error: f64 },

    #[error("parameter {theta:?} is outside the valid region of family `{family}`")]
    OutsideRegion { family: String, theta: Vec<f64> },

    #[error("singular metric (condition estimate {condition:e})")]
    SingularMetric { condition: f64 },

    #[error("geodesic left the valid region at {point:?} after {fraction:.3} of the arc time")]
    BoundaryExit { point: Vec<f64>, fraction: f64 },

    #[error("shooting did not converge after {iterations} iterations (best residual {residual:e})")]
    ShootingNonConvergence { iterations: usize, residual: f64 },

    #[error("tangent vanishes at t = {t}")]
    SingularTangent { t: f64 },

    #[error("map is critical at {z} (|f'| = {modulus:e}); conformality fails there")]
    CriticalPoint { z: Complex64, modulus: f64 },

    #[error("map is not holomorphic at {z} (Cauchy-Riemann residual {residual:e})")]
    NotHolomorphic { z: Complex64, residual: f64 },

    #[error("arc leaves the map's domain at t = {t}")]
    OutsideMapDomain { t: f64 },

    #[error("arcs do not intersect at the shared parameter (gap {gap:e})")]
    ArcsDoNotIntersect { gap: f64 },

    #[error("invalid parametrization: {0}")]
    InvalidParametrization(String),

    #[error("parametrizations {first} and {second} disagree")]
    ParametrizationMismatch { first: usize, second: usize },

    #[error("degenerate ray for plane {plane}: {from} and {to} coincide")]
    DegenerateRay { plane: String, from: String, to: String },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
