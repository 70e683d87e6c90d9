//! Simulator for a near-threshold all-optical backaction amplifier.
//!
//! The device is a radiation-pressure-coupled optical microcavity pumped on
//! the blue side of resonance: intracavity intensity drives a mechanical mode,
//! the mechanical motion phase-modulates the field, and just below the
//! regenerative-oscillation threshold the round trip acts as a narrowband
//! phase-sensitive amplifier for amplitude modulations on the input light.
//!
//! The crate is organized around the classical mean field and its linearized
//! fluctuations:
//!
//! * [`params`] — physical device/drive parameters and the derived
//!   dimensionless scales every other module consumes.
//! * [`steady_state`] — self-consistent intracavity mean field including the
//!   Kerr shift and the static radiation-pressure displacement, with
//!   bistability branch tracking.
//! * [`linear_response`] — frequency-domain linearized model: optical kernels,
//!   effective mechanical susceptibility, amplification factor and threshold,
//!   output-field coefficients, homodyne quadrature gains, intensity transfer
//!   and noise spectra.
//! * [`sensitivity`] — displacement-signal estimator and its ratio to the
//!   standard quantum limit.
//! * [`timedomain`] — direct integration of the nonlinear coupled equations of
//!   motion, used to cross-validate the linearized model.
//! * [`cli`] — reproducible parameter sweeps with CSV + manifest output.
//!
//! All value types are immutable after construction and safe to share across
//! threads.

pub mod cli;
pub mod consts;
pub mod error;
pub mod linear_response;
pub mod params;
pub mod sensitivity;
pub mod spectral;
pub mod steady_state;
pub mod timedomain;

pub use error::Error;
pub use linear_response::{OpticalKernels, ResponseSample, ThresholdReport};
pub use params::{DerivedScales, SystemParams};
pub use sensitivity::SensitivitySample;
pub use steady_state::MeanFieldSolution;
pub use timedomain::Trajectory;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
