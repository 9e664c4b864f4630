//! Brute-force check of the closed-form probe dynamics: integrate the
//! zero-temperature dephasing master equation on the full `2^L × 2^L`
//! density matrix.
//!
//! ```text
//! dρ/dt = −i(ω/2)[M, ρ] − C(t)[M, [M, ρ]] − c(t) Σ_j [σ_j, [σ_j, ρ]]
//! ```
//!
//! with `M = Σ_j σ_j`, `σ_z = |1⟩⟨1| − |0⟩⟨0|`, and `C(t) = Φc'(t)/4`,
//! `c(t) = Φl'(t)/4`. The factor ¼ comes from `(M_x − M_y)² = 4L²` for the
//! GHZ coherence (and `(±1 ∓ 1)² = 4` per flipped site), so that the GHZ
//! off-diagonal decays as `exp(−L²Φc − LΦl)`.
//!
//! Basis index bit `j` holds the state of qubit `j`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_time, Error, Result};
use crate::ode::{self, Tolerance};
use crate::probe::{NoiseEnvironment, ProbeConfig, StateFamily};

pub const MAX_ORACLE_QUBITS: u32 = 6;

/// Default relative tolerance for oracle integrations.
pub const DEFAULT_TOLERANCE: f64 = 1e-11;

type RateFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    qubits: u32,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_matrix(qubits: u32, entries: DMatrix<Complex64>) -> Result<Self> {
        check_qubits(qubits)?;
        let dim = 1usize << qubits;
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::InvalidParameter {
                name: "dim",
                value: entries.nrows() as f64,
                reason: "matrix dimension must be 2^L",
            });
        }
        Ok(Self { qubits, entries })
    }

    /// Pure state `|ψ⟩⟨ψ|`.
    pub fn pure(qubits: u32, amplitudes: &[Complex64]) -> Result<Self> {
        check_qubits(qubits)?;
        let dim = 1usize << qubits;
        if amplitudes.len() != dim {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                value: amplitudes.len() as f64,
                reason: "length must be 2^L",
            });
        }
        let entries = DMatrix::from_fn(dim, dim, |i, j| amplitudes[i] * amplitudes[j].conj());
        Ok(Self { qubits, entries })
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`.
    pub fn ghz(qubits: u32) -> Result<Self> {
        check_qubits(qubits)?;
        let dim = 1usize << qubits;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[dim - 1] = amps[0];
        Self::pure(qubits, &amps)
    }

    /// `|+⟩^{⊗L}`.
    pub fn product_plus(qubits: u32) -> Result<Self> {
        check_qubits(qubits)?;
        let dim = 1usize << qubits;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Self::pure(qubits, &vec![a; dim])
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Largest entry of `|ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let adj = self.entries.adjoint();
        self.entries
            .iter()
            .zip(adj.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, a) in psi.iter().enumerate() {
            for (j, b) in psi.iter().enumerate() {
                acc += a.conj() * self.entries[(i, j)] * b;
            }
        }
        acc.re
    }
}

fn check_qubits(qubits: u32) -> Result<()> {
    if qubits == 0 {
        return Err(Error::InvalidParameter {
            name: "num_qubits",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    if qubits > MAX_ORACLE_QUBITS {
        return Err(Error::TooManyQubits {
            got: qubits,
            max: MAX_ORACLE_QUBITS,
        });
    }
    Ok(())
}

/// Time-local coefficients of the master equation.
pub struct DephasingGenerator {
    collective_rate: RateFn,
    local_rate: RateFn,
    omega: f64,
}

impl std::fmt::Debug for DephasingGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DephasingGenerator")
            .field("omega", &self.omega)
            .finish_non_exhaustive()
    }
}

impl DephasingGenerator {
    pub fn new(
        collective_rate: impl Fn(f64) -> f64 + Send + Sync + 'static,
        local_rate: impl Fn(f64) -> f64 + Send + Sync + 'static,
        omega: f64,
    ) -> Self {
        Self {
            collective_rate: Box::new(collective_rate),
            local_rate: Box::new(local_rate),
            omega,
        }
    }

    /// Coefficients `Φ'(t)/4` of both baths.
    pub fn from_environment(env: &NoiseEnvironment, omega: f64) -> Self {
        let collective = env.collective;
        let local = env.local;
        Self::new(
            move |t| 0.25 * collective.exponent_rate(t).unwrap_or(f64::NAN),
            move |t| 0.25 * local.exponent_rate(t).unwrap_or(f64::NAN),
            omega,
        )
    }

    pub fn collective_rate(&self, t: f64) -> f64 {
        (self.collective_rate)(t)
    }

    pub fn local_rate(&self, t: f64) -> f64 {
        (self.local_rate)(t)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

struct Operators {
    total: DMatrix<Complex64>,
    sites: Vec<DMatrix<Complex64>>,
}

impl Operators {
    fn new(qubits: u32) -> Self {
        let dim = 1usize << qubits;
        let sign = |index: usize, site: u32| if (index >> site) & 1 == 1 { 1.0 } else { -1.0 };
        let sites: Vec<_> = (0..qubits)
            .map(|j| {
                DMatrix::from_fn(dim, dim, |r, c| {
                    if r == c {
                        Complex64::new(sign(r, j), 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        let total = sites
            .iter()
            .fold(DMatrix::zeros(dim, dim), |acc, s| acc + s);
        Self { total, sites }
    }
}

fn commutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

/// Evolve `initial` under `generator` from `0` to `t_final`.
pub fn evolve(
    initial: &DensityMatrix,
    generator: &DephasingGenerator,
    t_final: f64,
    tol: f64,
) -> Result<DensityMatrix> {
    check_time(t_final)?;
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "must lie in [1e-12, 1e-6]",
        });
    }
    let ops = Operators::new(initial.qubits);
    let half_omega = Complex64::new(0.0, -0.5 * generator.omega);
    let rhs = |t: f64, rho: &DMatrix<Complex64>| -> Result<DMatrix<Complex64>> {
        let big = generator.collective_rate(t);
        let small = generator.local_rate(t);
        if !big.is_finite() || !small.is_finite() {
            return Err(Error::NonFiniteRate(t));
        }
        let m_rho = commutator(&ops.total, rho);
        let mut out = &m_rho * half_omega;
        out -= commutator(&ops.total, &m_rho) * Complex64::new(big, 0.0);
        if small != 0.0 {
            for s in &ops.sites {
                out -= commutator(s, &commutator(s, rho)) * Complex64::new(small, 0.0);
            }
        }
        Ok(out)
    };
    let entries = ode::integrate(
        rhs,
        0.0,
        initial.entries.clone(),
        t_final,
        Tolerance {
            rtol: tol,
            atol: tol * 1e-6,
        },
    )?;
    Ok(DensityMatrix {
        qubits: initial.qubits,
        entries,
    })
}

/// `(|0…0⟩ + e^{iφ}|1…1⟩)/√2`.
fn ghz_readout_state(qubits: u32, phase: f64) -> Vec<Complex64> {
    let dim = 1usize << qubits;
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    psi[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[dim - 1] = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, phase);
    psi
}

/// Readout probability from the integrated density matrix.
///
/// GHZ probes use the GHZ projector; product probes report the marginal of
/// qubit 0 projected on `(|0⟩ + e^{iφ}|1⟩)/√2`.
pub fn oracle_probability(
    probe: &ProbeConfig,
    env: &NoiseEnvironment,
    t: f64,
    tol: f64,
) -> Result<f64> {
    let qubits = probe.num_qubits();
    let generator = DephasingGenerator::from_environment(env, probe.qubit_frequency());
    let phi = probe.readout_phase();
    match probe.family() {
        StateFamily::Ghz => {
            let rho = evolve(&DensityMatrix::ghz(qubits)?, &generator, t, tol)?;
            Ok(rho.expectation(&ghz_readout_state(qubits, phi)))
        }
        StateFamily::Product => {
            let rho = evolve(&DensityMatrix::product_plus(qubits)?, &generator, t, tol)?;
            let r0 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let r1 = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, phi);
            // Tr[(|r⟩⟨r| ⊗ I) ρ]
            let dim = rho.dim();
            let mut acc = Complex64::new(0.0, 0.0);
            for rest in (0..dim).filter(|i| i & 1 == 0) {
                let (i0, i1) = (rest, rest | 1);
                let amps = [(i0, r0), (i1, r1)];
                for &(a, ra) in &amps {
                    for &(b, rb) in &amps {
                        acc += ra.conj() * rho.get(a, b) * rb;
                    }
                }
            }
            Ok(acc.re)
        }
    }
}

/// Integrated `|ρ_{1…1,0…0}|` for a GHZ probe (relative to its initial ½).
pub fn oracle_ghz_coherence(
    probe: &ProbeConfig,
    env: &NoiseEnvironment,
    t: f64,
    tol: f64,
) -> Result<Complex64> {
    let qubits = probe.num_qubits();
    let generator = DephasingGenerator::from_environment(env, probe.qubit_frequency());
    let rho = evolve(&DensityMatrix::ghz(qubits)?, &generator, t, tol)?;
    Ok(rho.get(rho.dim() - 1, 0) * 2.0)
}
