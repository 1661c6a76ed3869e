//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors reported by the simulation library.
///
/// Variants are grouped by cause: bad arguments (`Domain`), inconsistent
/// shapes (`Shape`), invalid experiment configuration (`Config`) and
/// numerical breakdowns (`Singular`, `NonFinite`).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HolorisError {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two objects that must agree in size do not.
    #[error("shape mismatch: {what} (expected {expected}, got {got})")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// A configuration value is inconsistent (e.g. non-integral group size).
    #[error("configuration error: {0}")]
    Config(String),

    /// A spatial band of zero width was requested where a normalizable map is needed.
    #[error("degenerate band: {0}")]
    DegenerateBand(String),

    /// A least-squares system is rank deficient or numerically singular.
    #[error("singular system: {context} (|r_min|/|r_max| = {ratio:.3e}, rank {rank} of {cols})")]
    Singular {
        context: &'static str,
        ratio: f64,
        rank: usize,
        cols: usize,
    },

    /// The system has fewer equations than unknowns.
    #[error("underdetermined system: {rows} equations for {cols} unknowns")]
    Underdetermined { rows: usize, cols: usize },

    /// A computation produced NaN or infinity.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, HolorisError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(HolorisError::Domain(msg.into()))
}

pub(crate) fn check_shape(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(HolorisError::Shape { what, expected, got })
    }
}
