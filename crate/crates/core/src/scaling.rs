//! Sweeps over the qubit number, log-log exponent fits, detection of the
//! Heisenberg-to-standard-limit crossover, and the canned scenarios behind
//! the uncertainty-vs-L figure, the 2×2 scaling table and the
//! frequency-estimation baseline.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{
    optimize_time, uncertainty_at_policy, EstimationTask, OptimalPoint, TimeScalingPolicy,
};
use crate::probe::{NoiseEnvironment, ProbeConfig, StateFamily, Target};
use crate::spectrum::{LorentzianSpectrum, SpectralLimit};

/// Midpoint between the Heisenberg (−1) and standard (−½) slopes.
pub const TRANSITION_SLOPE: f64 = -0.75;
/// Points per moving window in [`detect_transition`].
pub const TRANSITION_WINDOW: usize = 5;
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub qubits: u32,
    pub t_opt: f64,
    pub delta_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurve {
    pub points: Vec<ScalingPoint>,
    pub scenario: EstimationTask,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub window: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub points: usize,
}

/// How the interrogation time is picked at each `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TimeChoice {
    /// [`optimize_time`] within these bounds, or the task's defaults.
    Optimized(Option<(f64, f64)>),
    /// `t = t0 / L^s`.
    Policy(TimeScalingPolicy),
}

/// `points` log-spaced values in `[l_min, l_max]`, rounded to integers and
/// deduplicated.
pub fn log_grid(l_min: u32, l_max: u32, points: usize) -> Result<Vec<u32>> {
    if l_min == 0 || l_max < l_min {
        return Err(Error::InvalidParameter {
            name: "l_range",
            value: l_min as f64,
            reason: "need 1 <= l_min <= l_max",
        });
    }
    if points < 2 || l_min == l_max {
        return Ok(vec![l_min]);
    }
    let (lo, hi) = ((l_min as f64).ln(), (l_max as f64).ln());
    let mut grid: Vec<u32> = (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp().round() as u32)
        .map(|l| l.clamp(l_min, l_max))
        .collect();
    grid.dedup();
    Ok(grid)
}

/// The 40-point grid from 1 to 10⁴.
pub fn default_grid() -> Vec<u32> {
    log_grid(1, 10_000, 40).expect("static grid")
}

fn point_at(task: &EstimationTask, qubits: u32, choice: TimeChoice) -> Result<ScalingPoint> {
    let annotate = |e: Error| Error::AtQubitNumber {
        qubits,
        source: Box::new(e),
    };
    let task = task.with_num_qubits(qubits).map_err(annotate)?;
    let OptimalPoint {
        t_opt, delta_min, ..
    } = match choice {
        TimeChoice::Optimized(bounds) => {
            optimize_time(&task, bounds.unwrap_or_else(|| task.default_bounds())).map_err(annotate)?
        }
        TimeChoice::Policy(policy) => {
            let t = policy.time_for(qubits);
            let delta = uncertainty_at_policy(&task, &policy).map_err(annotate)?;
            OptimalPoint {
                t_opt: t,
                delta_min: delta,
                repetitions: task.total_time / t,
            }
        }
    };
    Ok(ScalingPoint {
        qubits,
        t_opt,
        delta_min,
    })
}

/// Optimal uncertainty at every `L` in `qubits`.
pub fn sweep(task: &EstimationTask, qubits: &[u32]) -> Result<ScalingCurve> {
    sweep_with(task, qubits, TimeChoice::Optimized(None))
}

/// Evaluates the points in parallel; the result is in input order.
pub fn sweep_with(task: &EstimationTask, qubits: &[u32], choice: TimeChoice) -> Result<ScalingCurve> {
    if qubits.is_empty() {
        return Err(Error::InsufficientPoints { need: 1, got: 0 });
    }
    if let Some(w) = qubits.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "qubits",
            value: w[1] as f64,
            reason: "qubit numbers must be strictly increasing",
        });
    }
    let points = qubits
        .par_iter()
        .map(|&l| point_at(task, l, choice))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalingCurve {
        points,
        scenario: *task,
    })
}

/// Ordinary least squares of `ln y` on `ln x`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::InsufficientPoints { need: 2, got: n });
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientPoints { need: 2, got: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok((slope, intercept, (rss / n as f64).sqrt()))
}

fn fit_by(
    curve: &ScalingCurve,
    window: (f64, f64),
    value: impl Fn(&ScalingPoint) -> f64,
) -> Result<ExponentFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = curve
        .points
        .iter()
        .filter(|p| (window.0..=window.1).contains(&(p.qubits as f64)))
        .map(|p| (p.qubits as f64, value(p)))
        .unzip();
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            need: MIN_FIT_POINTS,
            got: xs.len(),
        });
    }
    let (slope, intercept, residual) = fit_power_law(&xs, &ys)?;
    Ok(ExponentFit {
        window,
        slope,
        intercept,
        residual,
        points: xs.len(),
    })
}

/// Slope of `ln δ_min` against `ln L` for points with `L` in `window`.
pub fn fit_exponent(curve: &ScalingCurve, window: (f64, f64)) -> Result<ExponentFit> {
    fit_by(curve, window, |p| p.delta_min)
}

/// Slope of `ln t_opt` against `ln L`.
pub fn fit_time_exponent(curve: &ScalingCurve, window: (f64, f64)) -> Result<ExponentFit> {
    fit_by(curve, window, |p| p.t_opt)
}

/// Local slopes over moving windows of [`TRANSITION_WINDOW`] points, with
/// the mean `ln L` of each window.
pub fn local_slopes(curve: &ScalingCurve) -> Result<Vec<(f64, f64)>> {
    if curve.points.len() < TRANSITION_WINDOW {
        return Err(Error::InsufficientPoints {
            need: TRANSITION_WINDOW,
            got: curve.points.len(),
        });
    }
    curve
        .points
        .windows(TRANSITION_WINDOW)
        .map(|w| {
            let xs: Vec<f64> = w.iter().map(|p| p.qubits as f64).collect();
            let ys: Vec<f64> = w.iter().map(|p| p.delta_min).collect();
            let centre = xs.iter().map(|x| x.ln()).sum::<f64>() / xs.len() as f64;
            fit_power_law(&xs, &ys).map(|(s, _, _)| (centre, s))
        })
        .collect()
}

/// `L` where the local slope first rises through [`TRANSITION_SLOPE`],
/// interpolated linearly in `ln L` between adjacent windows.
pub fn detect_transition(curve: &ScalingCurve) -> Result<f64> {
    let slopes = local_slopes(curve)?;
    let thr = TRANSITION_SLOPE;
    slopes
        .windows(2)
        .find(|w| w[0].1 < thr && w[1].1 >= thr)
        .map(|w| {
            let ((c0, s0), (c1, s1)) = (w[0], w[1]);
            (c0 + (thr - s0) / (s1 - s0) * (c1 - c0)).exp()
        })
        .ok_or(Error::NoCrossing { threshold: thr })
}

/// Physical parameters shared by the canned scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// `Γ_MC` (Hz).
    pub collective_markov_rate: f64,
    /// `τc` of the target fields (s).
    pub collective_correlation_time: f64,
    /// `Γ_NMC` for static target fields (Hz).
    pub collective_nonmarkov_rate: f64,
    /// `γ_ME` (Hz).
    pub local_markov_rate: f64,
    /// `τc'` of the local environment (s).
    pub local_correlation_time: f64,
    /// `γ_NME` for a static local environment (Hz).
    pub local_nonmarkov_rate: f64,
    /// `T` (s).
    pub total_time: f64,
}

impl Default for ScenarioParams {
    /// `Γ_MC = 1 Hz`, `γ_ME = 0.2 Hz`, `T = 1 s`, `τc = τc' = 1 ms`; the
    /// non-Markov rates are the static limits of the same spectra.
    fn default() -> Self {
        let tc = 1e-3;
        Self {
            collective_markov_rate: 1.0,
            collective_correlation_time: tc,
            collective_nonmarkov_rate: (1.0 / (2.0 * tc)).sqrt(),
            local_markov_rate: 0.2,
            local_correlation_time: tc,
            local_nonmarkov_rate: (0.2 / (2.0 * tc)).sqrt(),
            total_time: 1.0,
        }
    }
}

impl ScenarioParams {
    pub fn collective_lorentzian(&self) -> Result<LorentzianSpectrum> {
        LorentzianSpectrum::from_markov_rate(
            self.collective_markov_rate,
            self.collective_correlation_time,
        )
    }

    pub fn local_lorentzian(&self) -> Result<LorentzianSpectrum> {
        LorentzianSpectrum::from_markov_rate(self.local_markov_rate, self.local_correlation_time)
    }

    fn bath(&self, regime: Regime, collective: bool) -> Result<SpectralLimit> {
        match (regime, collective) {
            (Regime::Markov, true) => SpectralLimit::white(self.collective_markov_rate),
            (Regime::NonMarkov, true) => {
                SpectralLimit::from_nonmarkov_rate(self.collective_nonmarkov_rate)
            }
            (Regime::Markov, false) => SpectralLimit::white(self.local_markov_rate),
            (Regime::NonMarkov, false) => {
                SpectralLimit::from_nonmarkov_rate(self.local_nonmarkov_rate)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Markov,
    NonMarkov,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Markov => "markov",
            Regime::NonMarkov => "non-markov",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FigureRow {
    pub qubits: u32,
    pub t_opt: f64,
    pub delta_ghz: f64,
    pub delta_separable: f64,
    /// `δ(L0)·L0/L`, anchored at the first point.
    pub hl_guide: f64,
    /// `δ(L0)·√(L0/L)`, anchored at the first point.
    pub sql_guide: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    pub rows: Vec<FigureRow>,
    pub ghz: ScalingCurve,
    pub separable: ScalingCurve,
}

/// GHZ and separable optimal uncertainties of `Γ_MC` against `L`, for a
/// Lorentzian collective bath and Lorentzian local environment.
pub fn figure(params: &ScenarioParams, qubits: &[u32]) -> Result<FigureData> {
    let env = NoiseEnvironment::new(params.collective_lorentzian()?, params.local_lorentzian()?);
    let ghz_task = EstimationTask::new(
        Target::MarkovCollectiveRate,
        params.total_time,
        ProbeConfig::ghz(1, 0.0)?,
        env,
    )?;
    let sep_task = EstimationTask {
        probe: ProbeConfig::product(1, 0.0)?,
        ..ghz_task
    };
    let ghz = sweep(&ghz_task, qubits)?;
    let separable = sweep(&sep_task, qubits)?;
    let first = ghz.points[0];
    let rows = ghz
        .points
        .iter()
        .zip(&separable.points)
        .map(|(g, s)| {
            let ratio = first.qubits as f64 / g.qubits as f64;
            FigureRow {
                qubits: g.qubits,
                t_opt: g.t_opt,
                delta_ghz: g.delta_min,
                delta_separable: s.delta_min,
                hl_guide: first.delta_min * ratio,
                sql_guide: first.delta_min * ratio.sqrt(),
            }
        })
        .collect();
    Ok(FigureData {
        rows,
        ghz,
        separable,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub fields: Regime,
    pub environment: Regime,
    pub target: Target,
    pub time_choice: TimeChoice,
    pub fit: ExponentFit,
}

/// Asymptotic exponents for {Markov, non-Markov fields} × {Markov,
/// non-Markov environment}, fitted over `window` on `qubits`.
///
/// Markov fields are evaluated at `t = 1/(Γ_MC L²)`: with white collective
/// noise the uncertainty decreases all the way to `t → 0`, so there is no
/// interior optimum to sweep. Non-Markov fields use the optimized time.
pub fn table(params: &ScenarioParams, qubits: &[u32], window: (f64, f64)) -> Result<Vec<TableCell>> {
    let mut cells = Vec::with_capacity(4);
    for fields in [Regime::Markov, Regime::NonMarkov] {
        for environment in [Regime::Markov, Regime::NonMarkov] {
            let env = NoiseEnvironment::new(params.bath(fields, true)?, params.bath(environment, false)?);
            let (target, time_choice) = match fields {
                Regime::Markov => (
                    Target::MarkovCollectiveRate,
                    TimeChoice::Policy(TimeScalingPolicy::new(
                        1.0 / params.collective_markov_rate,
                        2.0,
                    )?),
                ),
                Regime::NonMarkov => (Target::NonMarkovCollectiveRate, TimeChoice::Optimized(None)),
            };
            let task =
                EstimationTask::new(target, params.total_time, ProbeConfig::ghz(1, 0.0)?, env)?;
            let curve = sweep_with(&task, qubits, time_choice)?;
            cells.push(TableCell {
                fields,
                environment,
                target,
                time_choice,
                fit: fit_exponent(&curve, window)?,
            });
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineFit {
    pub environment: Regime,
    pub fit: ExponentFit,
    pub time_fit: ExponentFit,
}

/// Frequency estimation with a GHZ probe, no collective noise, and a
/// Markov or static local environment.
pub fn frequency_baseline(
    params: &ScenarioParams,
    qubits: &[u32],
    window: (f64, f64),
) -> Result<Vec<BaselineFit>> {
    [Regime::Markov, Regime::NonMarkov]
        .into_iter()
        .map(|environment| {
            let env = NoiseEnvironment::new(SpectralLimit::quiet(), params.bath(environment, false)?);
            let task = EstimationTask::new(
                Target::QubitFrequency,
                params.total_time,
                ProbeConfig::new(1, StateFamily::Ghz, 0.0, Target::QubitFrequency.default_readout_phase())?,
                env,
            )?;
            let curve = sweep(&task, qubits)?;
            Ok(BaselineFit {
                environment,
                fit: fit_exponent(&curve, window)?,
                time_fit: fit_time_exponent(&curve, window)?,
            })
        })
        .collect()
}
