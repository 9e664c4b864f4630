//! Scenario configuration: a flat `key = value` file with dotted keys.
//!
//! ```text
//! task.target = "markov_collective_rate"
//! collective.markov_rate_hz = 1.0
//! ```
//!
//! Unknown keys are rejected. `dump` writes every key, so a dumped file
//! loads back to the same scenario.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use deco_metrix::scaling::{log_grid, ScenarioParams};
use deco_metrix::{
    EstimationTask, LorentzianSpectrum, NoiseEnvironment, ProbeConfig, SpectralLimit, StateFamily,
    Target,
};
use toml::Value;

/// Seed used when neither the config nor `--seed` sets one.
pub const DEFAULT_SEED: u64 = 20_190_318;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BathModel {
    Lorentzian,
    White,
    Static,
    None,
}

impl BathModel {
    fn name(self) -> &'static str {
        match self {
            BathModel::Lorentzian => "lorentzian",
            BathModel::White => "white",
            BathModel::Static => "static",
            BathModel::None => "none",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "lorentzian" => BathModel::Lorentzian,
            "white" => BathModel::White,
            "static" => BathModel::Static,
            "none" => BathModel::None,
            _ => bail!("unknown bath model {s:?} (lorentzian, white, static, none)"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathConfig {
    pub model: BathModel,
    pub markov_rate_hz: f64,
    pub correlation_time_s: f64,
    pub nonmarkov_rate_hz: f64,
}

impl BathConfig {
    pub fn spectral_limit(&self) -> Result<SpectralLimit> {
        Ok(match self.model {
            BathModel::Lorentzian => {
                LorentzianSpectrum::from_markov_rate(self.markov_rate_hz, self.correlation_time_s)?
                    .into()
            }
            BathModel::White => SpectralLimit::white(self.markov_rate_hz)?,
            BathModel::Static => SpectralLimit::from_nonmarkov_rate(self.nonmarkov_rate_hz)?,
            BathModel::None => SpectralLimit::quiet(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub total_time_s: f64,
    pub target: Target,
    pub qubits: u32,
    pub family: StateFamily,
    pub qubit_frequency_hz: f64,
    /// Falls back to the target's default readout phase.
    pub readout_phase_rad: Option<f64>,
    pub collective: BathConfig,
    pub local: BathConfig,
    pub l_min: u32,
    pub l_max: u32,
    pub l_points: usize,
    pub window_min: f64,
    pub window_max: f64,
    pub t_min_s: Option<f64>,
    pub t_max_s: Option<f64>,
    pub rates_t_min_s: f64,
    pub rates_t_max_s: f64,
    pub rates_points: usize,
    pub mc_trials: usize,
    /// Sets `T = N·t` for the Monte Carlo run; 0 keeps `total_time_s`.
    pub mc_repetitions: u64,
    /// Falls back to the optimal interrogation time.
    pub mc_t_s: Option<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let p = ScenarioParams::default();
        Self {
            seed: DEFAULT_SEED,
            total_time_s: p.total_time,
            target: Target::MarkovCollectiveRate,
            qubits: 2,
            family: StateFamily::Ghz,
            qubit_frequency_hz: 0.0,
            readout_phase_rad: None,
            collective: BathConfig {
                model: BathModel::Lorentzian,
                markov_rate_hz: p.collective_markov_rate,
                correlation_time_s: p.collective_correlation_time,
                nonmarkov_rate_hz: p.collective_nonmarkov_rate,
            },
            local: BathConfig {
                model: BathModel::Lorentzian,
                markov_rate_hz: p.local_markov_rate,
                correlation_time_s: p.local_correlation_time,
                nonmarkov_rate_hz: p.local_nonmarkov_rate,
            },
            l_min: 1,
            l_max: 10_000,
            l_points: 40,
            window_min: 1e3,
            window_max: 1e4,
            t_min_s: None,
            t_max_s: None,
            rates_t_min_s: 1e-6,
            rates_t_max_s: 10.0,
            rates_points: 200,
            mc_trials: 1000,
            mc_repetitions: 10_000,
            mc_t_s: None,
        }
    }
}

fn target_name(t: Target) -> &'static str {
    match t {
        Target::MarkovCollectiveRate => "markov_collective_rate",
        Target::NonMarkovCollectiveRate => "nonmarkov_collective_rate",
        Target::QubitFrequency => "qubit_frequency",
    }
}

fn family_name(f: StateFamily) -> &'static str {
    match f {
        StateFamily::Ghz => "ghz",
        StateFamily::Product => "product",
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => bail!("{key}: expected a number, got {v}"),
    }
}

fn as_uint(key: &str, v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => bail!("{key}: expected a non-negative integer, got {v}"),
    }
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| anyhow!("{key}: expected a string, got {v}"))
}

fn narrow<T: TryFrom<u64>>(key: &str, v: &Value) -> Result<T> {
    T::try_from(as_uint(key, v)?).map_err(|_| anyhow!("{key}: value out of range"))
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)
            .with_context(|| format!("in {}", path.display()))?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let table: toml::Table = text.parse()?;
        let mut flat = Vec::new();
        flatten("", &Value::Table(table), &mut flat);
        for (key, value) in flat {
            self.set(&key, &value)?;
        }
        Ok(())
    }

    /// Applies `key` from command-line text. Bare words are read as strings.
    pub fn set_from_str(&mut self, key: &str, raw: &str) -> Result<()> {
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.to_string()));
        self.set(key, &value)
    }

    pub fn set(&mut self, key: &str, v: &Value) -> Result<()> {
        match key {
            "seed" => self.seed = as_uint(key, v)?,
            "total_time_s" => self.total_time_s = as_f64(key, v)?,
            "task.target" => {
                let s = as_str(key, v)?;
                self.target = Target::ALL
                    .into_iter()
                    .find(|&t| target_name(t) == s)
                    .ok_or_else(|| anyhow!("{key}: unknown target {s:?}"))?;
            }
            "probe.qubits" => self.qubits = narrow(key, v)?,
            "probe.family" => {
                self.family = match as_str(key, v)? {
                    "ghz" => StateFamily::Ghz,
                    "product" => StateFamily::Product,
                    s => bail!("{key}: unknown family {s:?} (ghz, product)"),
                }
            }
            "probe.qubit_frequency_hz" => self.qubit_frequency_hz = as_f64(key, v)?,
            "probe.readout_phase_rad" => self.readout_phase_rad = Some(as_f64(key, v)?),
            "grid.l_min" => self.l_min = narrow(key, v)?,
            "grid.l_max" => self.l_max = narrow(key, v)?,
            "grid.l_points" => self.l_points = narrow(key, v)?,
            "fit.window_min" => self.window_min = as_f64(key, v)?,
            "fit.window_max" => self.window_max = as_f64(key, v)?,
            "time.t_min_s" => self.t_min_s = Some(as_f64(key, v)?),
            "time.t_max_s" => self.t_max_s = Some(as_f64(key, v)?),
            "rates.t_min_s" => self.rates_t_min_s = as_f64(key, v)?,
            "rates.t_max_s" => self.rates_t_max_s = as_f64(key, v)?,
            "rates.points" => self.rates_points = narrow(key, v)?,
            "mc.trials" => self.mc_trials = narrow(key, v)?,
            "mc.repetitions" => self.mc_repetitions = as_uint(key, v)?,
            "mc.t_s" => self.mc_t_s = Some(as_f64(key, v)?),
            _ => {
                let (section, field) = key.split_once('.').unwrap_or((key, ""));
                let bath = match section {
                    "collective" => &mut self.collective,
                    "local" => &mut self.local,
                    _ => bail!("unknown config key {key:?}"),
                };
                match field {
                    "model" => bath.model = BathModel::parse(as_str(key, v)?)?,
                    "markov_rate_hz" => bath.markov_rate_hz = as_f64(key, v)?,
                    "correlation_time_s" => bath.correlation_time_s = as_f64(key, v)?,
                    "nonmarkov_rate_hz" => bath.nonmarkov_rate_hz = as_f64(key, v)?,
                    _ => bail!("unknown config key {key:?}"),
                }
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> Vec<(String, Value)> {
        let mut out: Vec<(String, Value)> = vec![
            ("seed".into(), Value::Integer(self.seed as i64)),
            ("total_time_s".into(), Value::Float(self.total_time_s)),
            ("task.target".into(), Value::String(target_name(self.target).into())),
            ("probe.qubits".into(), Value::Integer(self.qubits.into())),
            ("probe.family".into(), Value::String(family_name(self.family).into())),
            ("probe.qubit_frequency_hz".into(), Value::Float(self.qubit_frequency_hz)),
        ];
        if let Some(phi) = self.readout_phase_rad {
            out.push(("probe.readout_phase_rad".into(), Value::Float(phi)));
        }
        for (name, bath) in [("collective", &self.collective), ("local", &self.local)] {
            out.push((format!("{name}.model"), Value::String(bath.model.name().into())));
            out.push((format!("{name}.markov_rate_hz"), Value::Float(bath.markov_rate_hz)));
            out.push((format!("{name}.correlation_time_s"), Value::Float(bath.correlation_time_s)));
            out.push((format!("{name}.nonmarkov_rate_hz"), Value::Float(bath.nonmarkov_rate_hz)));
        }
        out.extend([
            ("grid.l_min".into(), Value::Integer(self.l_min.into())),
            ("grid.l_max".into(), Value::Integer(self.l_max.into())),
            ("grid.l_points".into(), Value::Integer(self.l_points as i64)),
            ("fit.window_min".into(), Value::Float(self.window_min)),
            ("fit.window_max".into(), Value::Float(self.window_max)),
        ]);
        if let Some(t) = self.t_min_s {
            out.push(("time.t_min_s".into(), Value::Float(t)));
        }
        if let Some(t) = self.t_max_s {
            out.push(("time.t_max_s".into(), Value::Float(t)));
        }
        out.extend([
            ("rates.t_min_s".into(), Value::Float(self.rates_t_min_s)),
            ("rates.t_max_s".into(), Value::Float(self.rates_t_max_s)),
            ("rates.points".into(), Value::Integer(self.rates_points as i64)),
            ("mc.trials".into(), Value::Integer(self.mc_trials as i64)),
            ("mc.repetitions".into(), Value::Integer(self.mc_repetitions as i64)),
        ]);
        if let Some(t) = self.mc_t_s {
            out.push(("mc.t_s".into(), Value::Float(t)));
        }
        out
    }

    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (key, value) in self.entries() {
            writeln!(s, "{key} = {value}").unwrap();
        }
        s
    }

    pub fn params(&self) -> ScenarioParams {
        ScenarioParams {
            collective_markov_rate: self.collective.markov_rate_hz,
            collective_correlation_time: self.collective.correlation_time_s,
            collective_nonmarkov_rate: self.collective.nonmarkov_rate_hz,
            local_markov_rate: self.local.markov_rate_hz,
            local_correlation_time: self.local.correlation_time_s,
            local_nonmarkov_rate: self.local.nonmarkov_rate_hz,
            total_time: self.total_time_s,
        }
    }

    pub fn environment(&self) -> Result<NoiseEnvironment> {
        Ok(NoiseEnvironment::new(
            self.collective.spectral_limit().context("collective bath")?,
            self.local.spectral_limit().context("local bath")?,
        ))
    }

    pub fn probe(&self) -> Result<ProbeConfig> {
        let phase = self
            .readout_phase_rad
            .unwrap_or_else(|| self.target.default_readout_phase());
        Ok(ProbeConfig::new(self.qubits, self.family, self.qubit_frequency_hz, phase)?)
    }

    pub fn task(&self) -> Result<EstimationTask> {
        Ok(EstimationTask::new(
            self.target,
            self.total_time_s,
            self.probe()?,
            self.environment()?,
        )?)
    }

    /// Optimizer bounds, each side defaulting to the task's own.
    pub fn bounds(&self, task: &EstimationTask) -> (f64, f64) {
        let (lo, hi) = task.default_bounds();
        (self.t_min_s.unwrap_or(lo), self.t_max_s.unwrap_or(hi))
    }

    pub fn grid(&self) -> Result<Vec<u32>> {
        Ok(log_grid(self.l_min, self.l_max, self.l_points)?)
    }

    pub fn window(&self) -> (f64, f64) {
        (self.window_min, self.window_max)
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, Value)>) {
    match value {
        Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        other => out.push((prefix.to_string(), other.clone())),
    }
}
