//! Error type shared by all modules.
//!
//! The CLI maps these onto exit codes: configuration problems exit 2, physics
//! refusals (e.g. asking the linearized model for an above-threshold response)
//! exit 3, numeric failures exit 4.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A required configuration key is absent.
    #[error("missing configuration key `{0}`")]
    MissingKey(String),

    /// Configuration is syntactically or semantically invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// A parameter violated a validation rule.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// The linearized model was asked for a response at or above the
    /// regenerative-oscillation threshold, where it is not valid.
    #[error("amplification factor R = {r:.6} >= 1: linearized response is invalid at or above threshold")]
    AboveThreshold { r: f64 },

    /// A kernel denominator vanished at this parameter point.
    #[error("singular parameter point: {0}")]
    Singular(String),

    /// The mechanical mode is not transduced onto the measured quadrature
    /// (H6 = 0), so no displacement estimate exists.
    #[error("no signal transduction (H6 = 0); displacement estimate gain is infinite")]
    NoTransduction,

    /// An operation's stated precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Root finding or a self-consistency loop failed to converge.
    #[error("solver did not converge: {what} (residual {residual:.3e})")]
    NoConvergence { what: String, residual: f64 },

    /// Requested integration step exceeds the stability/accuracy bound.
    #[error("time step {dt:.3e} s exceeds the allowed bound {bound:.3e} s")]
    StepTooLarge { dt: f64, bound: f64 },

    /// Trajectory left the trust region (presumed above-threshold growth).
    #[error("trajectory overflow at t = {t:.6e} s: |a|^2 exceeded {factor:.1e} x steady state")]
    Overflow { t: f64, factor: f64 },

    /// A computed quantity became non-finite.
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    /// Not enough data for the requested estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MissingKey(_) | Error::Config(_) | Error::InvalidParam(_) | Error::Io(_) => 2,
            Error::AboveThreshold { .. } | Error::NoTransduction | Error::Precondition(_) => 3,
            Error::Singular(_)
            | Error::NoConvergence { .. }
            | Error::StepTooLarge { .. }
            | Error::Overflow { .. }
            | Error::NonFinite(_)
            | Error::InsufficientData(_) => 4,
        }
    }
}
