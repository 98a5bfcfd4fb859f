use thiserror::Error;

/// Errors raised by the array toolkit.
///
/// Variants split along the exit-code contract used by the CLI: everything
/// here is a domain/analysis failure, I/O lives with the callers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("spacing error: elements {first} and {second} are {distance:.6} m apart, below the required {required:.6} m")]
    Spacing {
        first: usize,
        second: usize,
        distance: f64,
        required: f64,
    },

    #[error("subarray footprint of {footprint:.6} m does not fit the platform pitch of {pitch:.6} m")]
    SubarrayOverlap { footprint: f64, pitch: f64 },

    #[error("synthesis failure: {0}")]
    Synthesis(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("beam too wide: {0}; use a larger angular grid")]
    BeamTooWide(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl Error {
    /// Short machine-readable tag for error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Spacing { .. } => "spacing",
            Error::SubarrayOverlap { .. } => "spacing",
            Error::Synthesis(_) => "synthesis",
            Error::Domain(_) => "domain",
            Error::BeamTooWide(_) => "beam_too_wide",
            Error::Resolution(_) => "resolution",
            Error::Infeasible(_) => "infeasible",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
