//! Sensitivity of entangled (GHZ) and separable qubit sensors to the rate
//! of collective dephasing, in the presence of independent local
//! dephasing.
//!
//! - [`spectrum`]: Lorentzian baths, their white- and static-noise limits,
//!   and the decoherence exponents they produce.
//! - [`probe`]: closed-form probe dynamics and readout probabilities.
//! - [`oracle`]: full density-matrix integration of the master equation,
//!   used to check [`probe`].
//! - [`estimation`]: error-propagation uncertainty, interrogation-time
//!   optimization and Monte Carlo validation.
//! - [`scaling`]: sweeps over qubit number and log-log exponent fits.

pub mod error;
pub mod estimation;
mod ode;
pub mod oracle;
pub mod probe;
pub mod scaling;
pub mod spectrum;

pub use error::{Error, Result};
pub use estimation::{
    mc_validate, optimize_time, uncertainty, uncertainty_at_policy, EstimationTask, McReport,
    OptimalPoint, TimeScalingPolicy,
};
pub use probe::{
    ghz_coherence, probability_derivative, survival_probability, CoherenceRecord,
    NoiseEnvironment, ProbeConfig, StateFamily, Target,
};
pub use scaling::{
    detect_transition, fit_exponent, fit_time_exponent, sweep, ExponentFit, ScalingCurve,
    ScalingPoint, ScenarioParams,
};
pub use spectrum::{LorentzianSpectrum, RateKind, RateSummary, SpectralLimit};
