//! Error-propagation uncertainty of a repeated binary readout, its
//! optimization over the interrogation time, and a Monte Carlo check of
//! the same protocol.
//!
//! A run of total duration `T` repeats preparation, free evolution for `t`
//! and readout `N = T/t` times. The uncertainty on `θ` is
//!
//! ```text
//! δθ = √(P(1−P)) / |dP/dθ| · 1/√N
//! ```
//!
//! Product probes read out `L` independent qubits per repetition, which
//! divides `δθ` by `√L`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::RateKind;
use crate::probe::{
    probability_derivative, readout, readout_coherence, NoiseEnvironment, ProbeConfig,
    StateFamily, Target,
};

/// What is estimated, with which probe, under which noise, in how long.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationTask {
    pub target: Target,
    pub total_time: f64,
    pub probe: ProbeConfig,
    pub env: NoiseEnvironment,
}

impl EstimationTask {
    pub fn new(
        target: Target,
        total_time: f64,
        probe: ProbeConfig,
        env: NoiseEnvironment,
    ) -> Result<Self> {
        if !(total_time > 0.0) || !total_time.is_finite() {
            return Err(Error::InvalidParameter {
                name: "total_time",
                value: total_time,
                reason: "must be finite and positive",
            });
        }
        let task = Self {
            target,
            total_time,
            probe,
            env,
        };
        task.true_value()?;
        Ok(task)
    }

    /// Current value of the estimated parameter.
    pub fn true_value(&self) -> Result<f64> {
        match self.target.rate_kind() {
            Some(kind) => self.env.collective.rate(kind).ok_or(Error::UnsupportedTarget {
                target: self.target.name(),
                bath: self.env.collective.label(),
            }),
            None => Ok(self.probe.qubit_frequency()),
        }
    }

    /// The same task with the estimated parameter set to `value`.
    pub fn with_true_value(&self, value: f64) -> Result<Self> {
        let mut next = *self;
        match self.target.rate_kind() {
            Some(kind) => next.env.collective = self.env.collective.with_rate(kind, value)?,
            None => next.probe = self.probe.with_qubit_frequency(value)?,
        }
        Ok(next)
    }

    pub fn with_num_qubits(&self, num_qubits: u32) -> Result<Self> {
        let mut next = *self;
        next.probe = self.probe.with_num_qubits(num_qubits)?;
        Ok(next)
    }

    pub fn with_total_time(&self, total_time: f64) -> Result<Self> {
        Self::new(self.target, total_time, self.probe, self.env)
    }

    /// Scale used for default time bounds: the target's true value, or for
    /// a frequency target at `ω = 0` the fastest bath rate.
    pub fn reference_rate(&self) -> f64 {
        let own = self.true_value().unwrap_or(0.0).abs();
        if own > 0.0 {
            return own;
        }
        [self.env.collective, self.env.local]
            .iter()
            .flat_map(|b| [b.markov_rate(), b.nonmarkov_rate()])
            .flatten()
            .fold(0.0, f64::max)
            .max(if self.env.is_silent() { 1.0 } else { 0.0 })
            .max(f64::MIN_POSITIVE)
    }

    /// `[1e-8 / Γ_ref, T]`.
    pub fn default_bounds(&self) -> (f64, f64) {
        ((1e-8 / self.reference_rate()).min(self.total_time), self.total_time)
    }
}

/// Interrogation time chosen as `t = t0 / L^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeScalingPolicy {
    pub t0: f64,
    pub exponent_s: f64,
}

impl TimeScalingPolicy {
    pub fn new(t0: f64, exponent_s: f64) -> Result<Self> {
        if !(t0 > 0.0) || !t0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t0",
                value: t0,
                reason: "must be finite and positive",
            });
        }
        Ok(Self { t0, exponent_s })
    }

    pub fn time_for(&self, num_qubits: u32) -> f64 {
        self.t0 / (num_qubits as f64).powf(self.exponent_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalPoint {
    pub t_opt: f64,
    pub delta_min: f64,
    /// `T / t_opt`, continuous.
    pub repetitions: f64,
}

/// `δθ` at interrogation time `t`. Returns `+∞` when `dP/dθ = 0`.
pub fn uncertainty(task: &EstimationTask, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= task.total_time) {
        return Err(Error::TimeOutOfRange {
            t,
            total: task.total_time,
        });
    }
    let r = readout(&task.probe, &task.env, t)?;
    let slope = probability_derivative(&task.probe, &task.env, t, task.target)?.abs();
    if slope == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mut delta = (r.p * r.q).sqrt() / slope * (t / task.total_time).sqrt();
    if task.probe.family() == StateFamily::Product {
        delta /= (task.probe.num_qubits() as f64).sqrt();
    }
    Ok(delta)
}

pub fn uncertainty_at_policy(task: &EstimationTask, policy: &TimeScalingPolicy) -> Result<f64> {
    uncertainty(task, policy.time_for(task.probe.num_qubits()))
}

const GRID_POINTS: usize = 256;
const GOLDEN_TOLERANCE: f64 = 1e-9;

/// Minimize `uncertainty(task, ·)` over `[t_lo, t_hi]`.
///
/// Scans a log-spaced grid, then refines the bracketing cell by golden
/// section in `ln t`. A minimum pinned at `t_lo` means the uncertainty
/// keeps falling as `t → 0` and is reported as [`Error::Degenerate`]; a
/// minimum at `t_hi` is a legitimate single-shot optimum.
pub fn optimize_time(task: &EstimationTask, bounds: (f64, f64)) -> Result<OptimalPoint> {
    let (lo, hi) = bounds;
    if !(lo > 0.0 && lo < hi && hi <= task.total_time) {
        return Err(Error::InvalidParameter {
            name: "t_bounds",
            value: lo,
            reason: "need 0 < t_lo < t_hi <= T",
        });
    }
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let at = |x: f64| -> Result<f64> { uncertainty(task, x.exp().clamp(lo, hi)) };

    let step = (ln_hi - ln_lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| if i + 1 == GRID_POINTS { ln_hi } else { ln_lo + step * i as f64 })
        .collect();
    let values = grid.iter().map(|&x| at(x)).collect::<Result<Vec<_>>>()?;

    let (best, best_val) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .ok_or_else(|| Error::Degenerate("uncertainty is infinite across the bounds".into()))?;
    let worst = values.iter().copied().filter(|v| v.is_finite()).fold(best_val, f64::max);
    if worst - best_val <= 1e-12 * best_val {
        return Err(Error::Degenerate(format!(
            "uncertainty is flat ({best_val:e}) across the bounds"
        )));
    }

    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(GRID_POINTS - 1)];
    let (x, fx) = golden_section(at, a, b, GOLDEN_TOLERANCE)?;
    let (x, fx) = if fx <= best_val { (x, fx) } else { (grid[best], best_val) };

    if best == 0 && (x - ln_lo) < 1e-6 {
        return Err(Error::Degenerate(format!(
            "uncertainty decreases monotonically towards t_lo = {lo:e}; no interior optimum"
        )));
    }

    let t_opt = x.exp().clamp(lo, hi);
    Ok(OptimalPoint {
        t_opt,
        delta_min: fx,
        repetitions: task.total_time / t_opt,
    })
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub(crate) fn golden_section<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    /// Repetitions per trial, `floor(T/t)`.
    pub repetitions: u64,
    pub trials: usize,
    pub rmse: f64,
    pub delta_formula: f64,
    /// `rmse / delta_formula`; NaN when the formula gives zero.
    pub ratio: f64,
    /// Trials whose estimate hit the invertible range's edge.
    pub clipped: usize,
}

const MIN_REPETITIONS: u64 = 100;

/// Simulate the protocol `trials` times and report the RMSE of the
/// maximum-likelihood estimate of the target.
///
/// Each trial draws `N = floor(T/t)` readouts (times `L` for product
/// probes), forms the empirical frequency `p̂` and inverts `P(θ)`. A `p̂`
/// outside the invertible range is clipped to the last resolvable value,
/// one count inside the edge.
pub fn mc_validate(task: &EstimationTask, t: f64, trials: usize, seed: u64) -> Result<McReport> {
    if !(t > 0.0 && t <= task.total_time) {
        return Err(Error::TimeOutOfRange {
            t,
            total: task.total_time,
        });
    }
    let repetitions = (task.total_time / t).floor() as u64;
    if repetitions < MIN_REPETITIONS {
        return Err(Error::MonteCarlo(format!(
            "need at least {MIN_REPETITIONS} repetitions, T/t gives {repetitions}"
        )));
    }
    if trials == 0 {
        return Err(Error::MonteCarlo("trials must be positive".into()));
    }
    let shots = match task.probe.family() {
        StateFamily::Ghz => repetitions,
        StateFamily::Product => repetitions * task.probe.num_qubits() as u64,
    };
    let inverse = Inverse::new(task, t)?;
    let truth = task.true_value()?;
    let p = readout(&task.probe, &task.env, t)?.p;
    let dist = Binomial::new(shots, p).map_err(|e| Error::MonteCarlo(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut sum_sq = 0.0;
    let mut clipped = 0;
    for _ in 0..trials {
        let hits = dist.sample(&mut rng);
        let p_hat = hits as f64 / shots as f64;
        let (estimate, was_clipped) = inverse.estimate(p_hat, shots);
        clipped += was_clipped as usize;
        sum_sq += (estimate - truth).powi(2);
    }
    let rmse = (sum_sq / trials as f64).sqrt();
    let delta_formula = uncertainty(task, t)?;
    let ratio = if delta_formula > 0.0 { rmse / delta_formula } else { f64::NAN };
    Ok(McReport {
        repetitions,
        trials,
        rmse,
        delta_formula,
        ratio,
        clipped,
    })
}

/// Inverse of `P(θ)` at fixed `t`, for the task's target.
enum Inverse {
    Rate {
        nonmarkov: bool,
        /// `cos(phase − φ)` multiplying the coherence magnitude.
        projection: f64,
        /// Local-bath exponent, independent of the rate.
        local_exponent: f64,
        /// Coefficient of `θ` (Markov) or `θ²` (non-Markov) in the exponent.
        unit: f64,
    },
    Frequency {
        magnitude: f64,
        readout_phase: f64,
        /// `n t`, the phase accumulated per unit `ω`.
        unit: f64,
    },
}

impl Inverse {
    fn new(task: &EstimationTask, t: f64) -> Result<Self> {
        let c = readout_coherence(&task.probe, &task.env, t)?;
        let n = match task.probe.family() {
            StateFamily::Ghz => task.probe.num_qubits() as f64,
            StateFamily::Product => 1.0,
        };
        let phi = task.probe.readout_phase();
        match task.target.rate_kind() {
            Some(kind) => {
                let projection = (c.phase - phi).cos();
                if projection.abs() < 1e-12 {
                    return Err(Error::MonteCarlo("readout is insensitive to the rate".into()));
                }
                Ok(Inverse::Rate {
                    nonmarkov: kind == RateKind::NonMarkov,
                    projection,
                    local_exponent: c.exponent_local,
                    unit: n * n * task.env.collective.unit_exponent(t, kind)?,
                })
            }
            None => {
                if c.magnitude == 0.0 {
                    return Err(Error::MonteCarlo("coherence fully lost".into()));
                }
                if (c.phase - phi).sin().abs() < 1e-12 {
                    return Err(Error::MonteCarlo("readout is insensitive to ω".into()));
                }
                Ok(Inverse::Frequency {
                    magnitude: c.magnitude,
                    readout_phase: phi,
                    unit: n * t,
                })
            }
        }
    }

    /// Estimate from the empirical frequency, and whether it was clipped.
    fn estimate(&self, p_hat: f64, shots: u64) -> (f64, bool) {
        let edge = 1.0 / shots as f64;
        match *self {
            Inverse::Rate {
                nonmarkov,
                projection,
                local_exponent,
                unit,
            } => {
                let raw = (2.0 * p_hat - 1.0) / projection;
                let m = raw.clamp(edge, 1.0);
                let collective = -m.ln() - local_exponent;
                let value = if nonmarkov {
                    (collective.max(0.0) / unit).sqrt()
                } else {
                    collective / unit
                };
                (value, raw < edge)
            }
            Inverse::Frequency {
                magnitude,
                readout_phase,
                unit,
            } => {
                // cos(nωt + φ) = (2p̂ − 1)/m on the branch nωt + φ ∈ [0, π].
                let raw = (2.0 * p_hat - 1.0) / magnitude;
                let limit = 1.0 - edge;
                let c = raw.clamp(-limit, limit);
                ((c.acos() - readout_phase) / unit, raw.abs() > limit)
            }
        }
    }
}
