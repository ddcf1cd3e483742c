use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Every variant carries the location or interval that caused it so callers
/// (root bracketing, continuation, the CLI exit-code mapping) can react
/// without re-deriving it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("pole of {what} at u = {location} (|u - pole| = {distance:e})")]
    Pole {
        what: &'static str,
        location: f64,
        distance: f64,
    },

    #[error("step size underflow at xi = {xi} (last accepted point)")]
    StepUnderflow { xi: f64 },

    #[error("too many integration steps; stopped at xi = {xi}")]
    TooManySteps { xi: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("exceptional region |dk| <= q entered at xi = {xi} (dk = {delta_k}, q = {q})")]
    ExceptionalRegion { xi: f64, delta_k: f64, q: f64 },

    #[error("no stationary root for dGamma = {target}; attainable interval is [{lo}, {hi}]")]
    NoRoot { target: f64, lo: f64, hi: f64 },

    #[error("{count} stationary roots for dGamma = {target} and no continuation hint")]
    AmbiguousRoot { target: f64, count: usize },

    #[error("state is off the invariant surface: recovered intensity {intensity} < 0")]
    OffManifold { intensity: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        what,
        detail: detail.into(),
    }
}
