//! Lorentzian bath spectra and the dephasing exponents they generate.
//!
//! Units throughout: times in seconds, rates in Hz, amplitudes in Hz².
//! A bath with amplitude `a` and correlation time `τc` has
//!
//! ```text
//! J(ν) = (1/π) · (a/τc) / ((1/τc)² + ν²)
//! Φ(t) = 2 a τc² (−1 + e^{−t/τc} + t/τc)
//! ```
//!
//! `Φ(t)` is the decoherence exponent of a single qubit coupled to the
//! bath. Its Markov limit is `Γ_M · t` with `Γ_M = 2 a τc`; its static
//! limit is `a · t²`, which defines the non-Markov rate `Γ_NM = √a`.

use serde::{Deserialize, Serialize};

use crate::error::{check_time, Error, Result};

/// Below this value of `t/τc` the exponent uses its Taylor series.
const SERIES_THRESHOLD: f64 = 1e-4;

/// `−1 + e^{−x} + x`, accurate for all `x ≥ 0`.
pub(crate) fn relaxation_shape(x: f64) -> f64 {
    if x < SERIES_THRESHOLD {
        let x2 = x * x;
        x2 * (0.5 - x / 6.0 + x2 / 24.0 - x2 * x / 120.0)
    } else {
        (-x).exp_m1() + x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianSpectrum {
    amplitude: f64,
    correlation_time: f64,
}

/// Markov and non-Markov rates implied by one spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    /// `2 a τc` (Hz).
    pub markov_rate: f64,
    /// `√a` (Hz).
    pub nonmarkov_rate: f64,
}

impl LorentzianSpectrum {
    pub fn new(amplitude: f64, correlation_time: f64) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidParameter {
                name: "amplitude",
                value: amplitude,
                reason: "must be finite and non-negative",
            });
        }
        check_correlation_time(correlation_time)?;
        Ok(Self {
            amplitude,
            correlation_time,
        })
    }

    /// Spectrum with the given Markov rate `2aτc` at correlation time `τc`.
    pub fn from_markov_rate(markov_rate: f64, correlation_time: f64) -> Result<Self> {
        if !(markov_rate >= 0.0) || !markov_rate.is_finite() {
            return Err(Error::InvalidParameter {
                name: "markov_rate",
                value: markov_rate,
                reason: "must be finite and non-negative",
            });
        }
        check_correlation_time(correlation_time)?;
        Self::new(markov_rate / (2.0 * correlation_time), correlation_time)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn correlation_time(&self) -> f64 {
        self.correlation_time
    }

    pub fn markov_rate(&self) -> f64 {
        2.0 * self.amplitude * self.correlation_time
    }

    pub fn nonmarkov_rate(&self) -> f64 {
        self.amplitude.sqrt()
    }

    pub fn summarize(&self) -> RateSummary {
        RateSummary {
            markov_rate: self.markov_rate(),
            nonmarkov_rate: self.nonmarkov_rate(),
        }
    }

    /// Spectral density `J(ν)` at angular frequency `ν` (rad/s).
    pub fn density(&self, nu: f64) -> f64 {
        let inv = 1.0 / self.correlation_time;
        self.amplitude * inv / (std::f64::consts::PI * (inv * inv + nu * nu))
    }

    /// Decoherence exponent `Φ(t) = Γ_t · t`.
    pub fn decoherence_exponent(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let tc = self.correlation_time;
        Ok(2.0 * self.amplitude * tc * tc * relaxation_shape(t / tc))
    }

    /// Time-dependent dephasing rate `Γ_t = Φ(t)/t`; `0` at `t = 0`.
    pub fn rate_at(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(self.decoherence_exponent(t)? / t)
    }

    /// `dΦ/dt = 2 a τc (1 − e^{−t/τc})`.
    pub fn exponent_rate(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let tc = self.correlation_time;
        Ok(-2.0 * self.amplitude * tc * (-t / tc).exp_m1())
    }

    /// The `τc → 0` limit at fixed `2aτc`.
    pub fn white_limit(&self) -> SpectralLimit {
        SpectralLimit::WhiteNoise {
            markov_rate: self.markov_rate(),
        }
    }

    /// The `τc → ∞` limit at fixed `a`.
    pub fn static_limit(&self) -> SpectralLimit {
        SpectralLimit::StaticNoise {
            amplitude: self.amplitude,
        }
    }
}

fn check_correlation_time(tc: f64) -> Result<()> {
    if !(tc > 0.0) || !tc.is_finite() {
        return Err(Error::InvalidParameter {
            name: "correlation_time",
            value: tc,
            reason: "must be finite and positive",
        });
    }
    Ok(())
}

fn check_rate(name: &'static str, value: f64) -> Result<()> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and non-negative",
        });
    }
    Ok(())
}

/// Which rate of a bath is treated as the unknown parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateKind {
    Markov,
    NonMarkov,
}

/// A bath in one of its three regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpectralLimit {
    Lorentzian(LorentzianSpectrum),
    /// `Φ(t) = Γ_M · t`.
    WhiteNoise { markov_rate: f64 },
    /// `Φ(t) = a · t²`.
    StaticNoise { amplitude: f64 },
}

impl Default for SpectralLimit {
    fn default() -> Self {
        SpectralLimit::quiet()
    }
}

impl From<LorentzianSpectrum> for SpectralLimit {
    fn from(s: LorentzianSpectrum) -> Self {
        SpectralLimit::Lorentzian(s)
    }
}

impl SpectralLimit {
    /// A bath that never dephases.
    pub fn quiet() -> Self {
        SpectralLimit::WhiteNoise { markov_rate: 0.0 }
    }

    pub fn white(markov_rate: f64) -> Result<Self> {
        check_rate("markov_rate", markov_rate)?;
        Ok(SpectralLimit::WhiteNoise { markov_rate })
    }

    pub fn static_noise(amplitude: f64) -> Result<Self> {
        check_rate("amplitude", amplitude)?;
        Ok(SpectralLimit::StaticNoise { amplitude })
    }

    /// Static bath with `√a` equal to `nonmarkov_rate`.
    pub fn from_nonmarkov_rate(nonmarkov_rate: f64) -> Result<Self> {
        check_rate("nonmarkov_rate", nonmarkov_rate)?;
        Ok(SpectralLimit::StaticNoise {
            amplitude: nonmarkov_rate * nonmarkov_rate,
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            SpectralLimit::Lorentzian(_) => "lorentzian",
            SpectralLimit::WhiteNoise { .. } => "white-noise",
            SpectralLimit::StaticNoise { .. } => "static-noise",
        }
    }

    pub fn is_silent(&self) -> bool {
        match self {
            SpectralLimit::Lorentzian(s) => s.amplitude == 0.0,
            SpectralLimit::WhiteNoise { markov_rate } => *markov_rate == 0.0,
            SpectralLimit::StaticNoise { amplitude } => *amplitude == 0.0,
        }
    }

    /// `2aτc`, undefined for static noise.
    pub fn markov_rate(&self) -> Option<f64> {
        match self {
            SpectralLimit::Lorentzian(s) => Some(s.markov_rate()),
            SpectralLimit::WhiteNoise { markov_rate } => Some(*markov_rate),
            SpectralLimit::StaticNoise { .. } => None,
        }
    }

    /// `√a`, undefined for white noise.
    pub fn nonmarkov_rate(&self) -> Option<f64> {
        match self {
            SpectralLimit::Lorentzian(s) => Some(s.nonmarkov_rate()),
            SpectralLimit::WhiteNoise { .. } => None,
            SpectralLimit::StaticNoise { amplitude } => Some(amplitude.sqrt()),
        }
    }

    pub fn rate(&self, kind: RateKind) -> Option<f64> {
        match kind {
            RateKind::Markov => self.markov_rate(),
            RateKind::NonMarkov => self.nonmarkov_rate(),
        }
    }

    pub fn exponent(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        match self {
            SpectralLimit::Lorentzian(s) => s.decoherence_exponent(t),
            SpectralLimit::WhiteNoise { markov_rate } => Ok(markov_rate * t),
            SpectralLimit::StaticNoise { amplitude } => Ok(amplitude * t * t),
        }
    }

    /// `dΦ/dt`.
    pub fn exponent_rate(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        match self {
            SpectralLimit::Lorentzian(s) => s.exponent_rate(t),
            SpectralLimit::WhiteNoise { markov_rate } => Ok(*markov_rate),
            SpectralLimit::StaticNoise { amplitude } => Ok(2.0 * amplitude * t),
        }
    }

    /// `Φ(t)/t`, with the `t → 0` limit at zero.
    pub fn rate_at(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        match self {
            SpectralLimit::Lorentzian(s) => s.rate_at(t),
            SpectralLimit::WhiteNoise { markov_rate } => Ok(*markov_rate),
            SpectralLimit::StaticNoise { amplitude } => Ok(amplitude * t),
        }
    }

    /// `∂Φ(t)/∂Γ` for the chosen rate, holding `τc` fixed.
    pub fn exponent_sensitivity(&self, t: f64, kind: RateKind) -> Result<f64> {
        check_time(t)?;
        match (self, kind) {
            (SpectralLimit::Lorentzian(s), RateKind::Markov) => {
                let tc = s.correlation_time;
                Ok(tc * relaxation_shape(t / tc))
            }
            (SpectralLimit::Lorentzian(s), RateKind::NonMarkov) => {
                let tc = s.correlation_time;
                Ok(4.0 * s.nonmarkov_rate() * tc * tc * relaxation_shape(t / tc))
            }
            (SpectralLimit::WhiteNoise { .. }, RateKind::Markov) => Ok(t),
            (SpectralLimit::StaticNoise { amplitude }, RateKind::NonMarkov) => {
                Ok(2.0 * amplitude.sqrt() * t * t)
            }
            (bath, kind) => Err(unsupported(bath, kind)),
        }
    }

    /// `Φ(t)` per unit of the rate's natural power: `Φ/Γ_M` (linear) or
    /// `Φ/Γ_NM²` (quadratic). Independent of the rate's current value.
    pub fn unit_exponent(&self, t: f64, kind: RateKind) -> Result<f64> {
        check_time(t)?;
        match (self, kind) {
            (SpectralLimit::Lorentzian(s), RateKind::Markov) => {
                let tc = s.correlation_time;
                Ok(tc * relaxation_shape(t / tc))
            }
            (SpectralLimit::Lorentzian(s), RateKind::NonMarkov) => {
                let tc = s.correlation_time;
                Ok(2.0 * tc * tc * relaxation_shape(t / tc))
            }
            (SpectralLimit::WhiteNoise { .. }, RateKind::Markov) => Ok(t),
            (SpectralLimit::StaticNoise { .. }, RateKind::NonMarkov) => Ok(t * t),
            (bath, kind) => Err(unsupported(bath, kind)),
        }
    }

    /// Same regime (and correlation time) with the chosen rate replaced.
    pub fn with_rate(&self, kind: RateKind, value: f64) -> Result<Self> {
        match (self, kind) {
            (SpectralLimit::Lorentzian(s), RateKind::Markov) => {
                LorentzianSpectrum::from_markov_rate(value, s.correlation_time).map(Into::into)
            }
            (SpectralLimit::Lorentzian(s), RateKind::NonMarkov) => {
                check_rate("nonmarkov_rate", value)?;
                LorentzianSpectrum::new(value * value, s.correlation_time).map(Into::into)
            }
            (SpectralLimit::WhiteNoise { .. }, RateKind::Markov) => SpectralLimit::white(value),
            (SpectralLimit::StaticNoise { .. }, RateKind::NonMarkov) => {
                SpectralLimit::from_nonmarkov_rate(value)
            }
            (bath, kind) => Err(unsupported(bath, kind)),
        }
    }
}

fn unsupported(bath: &SpectralLimit, kind: RateKind) -> Error {
    Error::UnsupportedTarget {
        target: match kind {
            RateKind::Markov => "markov-rate",
            RateKind::NonMarkov => "nonmarkov-rate",
        },
        bath: bath.label(),
    }
}
