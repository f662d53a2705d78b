use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Every failure the library can report.
///
/// Variants carry enough structure to be serialized as JSON by the CLI.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("geodesic through {a} and {b} is a diameter")]
    DiameterCase {
        #[serde(serialize_with = "ser_complex")]
        a: Complex64,
        #[serde(serialize_with = "ser_complex")]
        b: Complex64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite integrand sample at {point}")]
    SingularSample {
        #[serde(serialize_with = "ser_complex")]
        point: Complex64,
    },

    #[error("integral does not converge under boundary refinement; ring contributions {ring_contributions:?}")]
    NonTraceClass { ring_contributions: Vec<f64> },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("cross-check failed: {what} (difference {difference:e})")]
    CrossCheck { what: String, difference: f64 },

    #[error("region JSON: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    /// Snake-case name of the variant, as used in the JSON `error` field.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Domain(_) => "domain",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::DiameterCase { .. } => "diameter_case",
            Error::Unsupported(_) => "unsupported",
            Error::SingularSample { .. } => "singular_sample",
            Error::NonTraceClass { .. } => "non_trace_class",
            Error::NoConvergence { .. } => "no_convergence",
            Error::CrossCheck { .. } => "cross_check",
            Error::Parse(_) => "parse",
        }
    }

    /// JSON rendering used on stderr by the command-line front end.
    pub fn to_json(&self) -> String {
        let mut map = match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(map)) => map,
            _ => serde_json::Map::new(),
        };
        map.insert("error".into(), self.kind().into());
        map.insert("message".into(), self.to_string().into());
        serde_json::Value::Object(map).to_string()
    }
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
