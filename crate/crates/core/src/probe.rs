//! Closed-form dynamics of GHZ and product probes under collective and
//! local dephasing, and the readout probability of the matching projector.
//!
//! For a GHZ probe of `L` qubits the only coherence is between `|0…0⟩` and
//! `|1…1⟩`. It decays as `exp(−L² Φc(t) − L Φl(t))` and rotates with phase
//! `−L ω t` (from `H = (ω/2) Σ σz`). Readout projects onto
//! `(|0…0⟩ + e^{iφ}|1…1⟩)/√2`, giving
//!
//! ```text
//! P = ½ (1 + |ρ01| cos(phase − φ))
//! ```
//!
//! A product probe is `L` independent copies of the `L = 1` case.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{check_time, Error, Result};
use crate::spectrum::{RateKind, SpectralLimit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateFamily {
    Ghz,
    Product,
}

/// The parameter being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    /// `Γ_MC = 2aτc` of the collective bath.
    MarkovCollectiveRate,
    /// `Γ_NMC = √a` of the collective bath.
    NonMarkovCollectiveRate,
    /// Qubit frequency `ω`.
    QubitFrequency,
}

impl Target {
    pub const ALL: [Target; 3] = [
        Target::MarkovCollectiveRate,
        Target::NonMarkovCollectiveRate,
        Target::QubitFrequency,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Target::MarkovCollectiveRate => "markov-collective-rate",
            Target::NonMarkovCollectiveRate => "nonmarkov-collective-rate",
            Target::QubitFrequency => "qubit-frequency",
        }
    }

    pub(crate) fn rate_kind(&self) -> Option<RateKind> {
        match self {
            Target::MarkovCollectiveRate => Some(RateKind::Markov),
            Target::NonMarkovCollectiveRate => Some(RateKind::NonMarkov),
            Target::QubitFrequency => None,
        }
    }

    /// Readout phase that maximizes `|dP/dθ|` at the usual operating point
    /// (`ω = 0`): `0` for rates, `π/2` for frequency.
    pub fn default_readout_phase(&self) -> f64 {
        match self {
            Target::QubitFrequency => FRAC_PI_2,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    num_qubits: u32,
    family: StateFamily,
    qubit_frequency: f64,
    readout_phase: f64,
}

impl ProbeConfig {
    pub fn new(
        num_qubits: u32,
        family: StateFamily,
        qubit_frequency: f64,
        readout_phase: f64,
    ) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidParameter {
                name: "num_qubits",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if !qubit_frequency.is_finite() {
            return Err(Error::InvalidParameter {
                name: "qubit_frequency",
                value: qubit_frequency,
                reason: "must be finite",
            });
        }
        if !readout_phase.is_finite() {
            return Err(Error::InvalidParameter {
                name: "readout_phase",
                value: readout_phase,
                reason: "must be finite",
            });
        }
        Ok(Self {
            num_qubits,
            family,
            qubit_frequency,
            readout_phase: readout_phase.rem_euclid(std::f64::consts::TAU),
        })
    }

    /// GHZ probe at `ω = 0` with readout phase `φ`.
    pub fn ghz(num_qubits: u32, readout_phase: f64) -> Result<Self> {
        Self::new(num_qubits, StateFamily::Ghz, 0.0, readout_phase)
    }

    pub fn product(num_qubits: u32, readout_phase: f64) -> Result<Self> {
        Self::new(num_qubits, StateFamily::Product, 0.0, readout_phase)
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn family(&self) -> StateFamily {
        self.family
    }

    pub fn qubit_frequency(&self) -> f64 {
        self.qubit_frequency
    }

    pub fn readout_phase(&self) -> f64 {
        self.readout_phase
    }

    pub fn with_num_qubits(&self, num_qubits: u32) -> Result<Self> {
        Self::new(num_qubits, self.family, self.qubit_frequency, self.readout_phase)
    }

    pub fn with_qubit_frequency(&self, qubit_frequency: f64) -> Result<Self> {
        Self::new(self.num_qubits, self.family, qubit_frequency, self.readout_phase)
    }

    /// Qubits sharing one readout: `L` for GHZ, `1` for product probes.
    fn register_size(&self) -> f64 {
        match self.family {
            StateFamily::Ghz => self.num_qubits as f64,
            StateFamily::Product => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseEnvironment {
    /// Shared bath of the target fields.
    pub collective: SpectralLimit,
    /// Per-qubit bath; every site sees the same spectrum.
    pub local: SpectralLimit,
}

impl NoiseEnvironment {
    pub fn new(collective: impl Into<SpectralLimit>, local: impl Into<SpectralLimit>) -> Self {
        Self {
            collective: collective.into(),
            local: local.into(),
        }
    }

    pub fn is_silent(&self) -> bool {
        self.collective.is_silent() && self.local.is_silent()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceRecord {
    /// `|ρ01| / ρ01(0)`, in `[0, 1]`.
    pub magnitude: f64,
    /// Phase of the `|1…1⟩⟨0…0|` element.
    pub phase: f64,
    pub exponent_collective: f64,
    pub exponent_local: f64,
}

impl CoherenceRecord {
    pub fn exponent(&self) -> f64 {
        self.exponent_collective + self.exponent_local
    }
}

/// A binary readout probability together with its complement, both
/// computed without cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    pub p: f64,
    pub q: f64,
}

fn coherence(probe: &ProbeConfig, env: &NoiseEnvironment, t: f64) -> Result<CoherenceRecord> {
    check_time(t)?;
    let n = probe.register_size();
    let exponent_collective = n * n * env.collective.exponent(t)?;
    let exponent_local = n * env.local.exponent(t)?;
    Ok(CoherenceRecord {
        magnitude: (-(exponent_collective + exponent_local)).exp(),
        phase: -n * probe.qubit_frequency * t,
        exponent_collective,
        exponent_local,
    })
}

/// Coherence of the GHZ state after time `t`.
pub fn ghz_coherence(
    probe: &ProbeConfig,
    env: &NoiseEnvironment,
    t: f64,
) -> Result<CoherenceRecord> {
    if probe.family != StateFamily::Ghz {
        return Err(Error::InvalidParameter {
            name: "state_family",
            value: f64::NAN,
            reason: "ghz_coherence requires a GHZ probe",
        });
    }
    coherence(probe, env, t)
}

/// Coherence seen by one readout: the whole register for GHZ, a single
/// qubit for product probes.
pub fn readout_coherence(
    probe: &ProbeConfig,
    env: &NoiseEnvironment,
    t: f64,
) -> Result<CoherenceRecord> {
    coherence(probe, env, t)
}

pub fn readout(probe: &ProbeConfig, env: &NoiseEnvironment, t: f64) -> Result<Readout> {
    let c = coherence(probe, env, t)?;
    let psi = c.phase - probe.readout_phase;
    let lost = -(-c.exponent()).exp_m1();
    let half = 0.5 * psi;
    Ok(Readout {
        p: 0.5 * (lost + 2.0 * c.magnitude * half.cos().powi(2)),
        q: 0.5 * (lost + 2.0 * c.magnitude * half.sin().powi(2)),
    })
}

/// Probability that one readout projects onto the reference state.
pub fn survival_probability(probe: &ProbeConfig, env: &NoiseEnvironment, t: f64) -> Result<f64> {
    readout(probe, env, t).map(|r| r.p)
}

/// Analytic `dP/dθ` at `(probe, env, t)`.
pub fn probability_derivative(
    probe: &ProbeConfig,
    env: &NoiseEnvironment,
    t: f64,
    target: Target,
) -> Result<f64> {
    let c = coherence(probe, env, t)?;
    let n = probe.register_size();
    let psi = c.phase - probe.readout_phase;
    match target.rate_kind() {
        Some(kind) => {
            let d_exponent = n * n * env.collective.exponent_sensitivity(t, kind)?;
            Ok(-0.5 * psi.cos() * c.magnitude * d_exponent)
        }
        None => Ok(0.5 * c.magnitude * n * t * psi.sin()),
    }
}
