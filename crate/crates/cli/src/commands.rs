use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use deco_metrix::oracle::{oracle_ghz_coherence, oracle_probability, DEFAULT_TOLERANCE};
use deco_metrix::scaling::{figure, frequency_baseline, sweep_with, table, TimeChoice};
use deco_metrix::{
    ghz_coherence, mc_validate, optimize_time, survival_probability, StateFamily,
};
use serde_json::{json, Value};

use crate::config::ScenarioConfig;
use crate::output::{write_atomic, Cell, Csv};
use crate::{Format, Kind};

pub struct Run<'a> {
    pub cfg: &'a ScenarioConfig,
    pub out: &'a Path,
    pub format: Format,
}

fn rows_json(header: &[&str], rows: &[Vec<Value>]) -> String {
    let objects: Vec<Value> = rows
        .iter()
        .map(|r| Value::Object(header.iter().map(|h| h.to_string()).zip(r.iter().cloned()).collect()))
        .collect();
    serde_json::to_string_pretty(&objects).expect("json") + "\n"
}

/// Writes a table as `<stem>.csv` or `<stem>.json`, following `--format`.
fn write_table(run: &Run, stem: &str, header: &[&str], rows: Vec<Vec<Cell>>) -> Result<PathBuf> {
    match run.format {
        Format::Csv => {
            let mut csv = Csv::new(header);
            for r in &rows {
                csv.row(r);
            }
            write_atomic(run.out, &format!("{stem}.csv"), &csv.into_string())
        }
        Format::Json => {
            let rows: Vec<Vec<Value>> = rows
                .into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|c| match c {
                            Cell::Num(x) => json!(x),
                            Cell::Int(i) => json!(i),
                            Cell::Text(s) => json!(s),
                        })
                        .collect()
                })
                .collect();
            write_atomic(run.out, &format!("{stem}.json"), &rows_json(header, &rows))
        }
    }
}

fn written(command: &str, paths: &[PathBuf]) -> Value {
    json!({ "command": command, "written": paths })
}

pub fn rates(run: &Run) -> Result<Value> {
    let cfg = run.cfg;
    let env = cfg.environment()?;
    let (lo, hi, n) = (cfg.rates_t_min_s, cfg.rates_t_max_s, cfg.rates_points);
    if n == 0 || !(lo > 0.0) || hi < lo {
        bail!(Kind::config("rates grid needs points >= 1 and 0 < t_min_s <= t_max_s"));
    }
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let t = if n == 1 { lo } else { lo * (hi / lo).powf(i as f64 / (n - 1) as f64) };
        rows.push(vec![
            Cell::Num(t),
            Cell::Num(env.collective.rate_at(t)?),
            Cell::Num(env.local.rate_at(t)?),
            Cell::Num(env.collective.exponent(t)?),
            Cell::Num(env.local.exponent(t)?),
        ]);
    }
    let header = ["t", "gamma_collective", "gamma_local", "phi_collective", "phi_local"];
    let path = write_table(run, "rates", &header, rows)?;
    Ok(written("rates", &[path]))
}

pub fn optimize(run: &Run) -> Result<Value> {
    let task = run.cfg.task()?;
    let best = optimize_time(&task, run.cfg.bounds(&task))?;
    Ok(json!({
        "t_opt_s": best.t_opt,
        "delta_min": best.delta_min,
        "repetitions": best.repetitions,
    }))
}

pub fn sweep(run: &Run) -> Result<Value> {
    let cfg = run.cfg;
    let task = cfg.task()?;
    let bounds = (cfg.t_min_s.is_some() || cfg.t_max_s.is_some()).then(|| cfg.bounds(&task));
    let curve = sweep_with(&task, &cfg.grid()?, TimeChoice::Optimized(bounds))?;
    let rows = curve
        .points
        .iter()
        .map(|p| vec![Cell::Int(p.qubits.into()), Cell::Num(p.t_opt), Cell::Num(p.delta_min)])
        .collect();
    let path = write_table(run, "sweep", &["L", "t_opt", "delta_min"], rows)?;
    Ok(written("sweep", &[path]))
}

pub fn mc(run: &Run, seed: u64) -> Result<Value> {
    let cfg = run.cfg;
    let task = cfg.task()?;
    if task.env.is_silent() {
        bail!(Kind::new(
            "degenerate",
            "Monte Carlo needs a noisy environment: both baths are silent, so every readout is deterministic"
        ));
    }
    let t = match cfg.mc_t_s {
        Some(t) => t,
        None => optimize_time(&task, cfg.bounds(&task))?.t_opt,
    };
    let task = match cfg.mc_repetitions {
        0 => task,
        // the margin keeps floor(T/t) at N despite rounding
        n => task.with_total_time(n as f64 * t * (1.0 + 1e-12))?,
    };
    let report = mc_validate(&task, t, cfg.mc_trials, seed)?;
    Ok(json!({
        "N": report.repetitions,
        "trials": report.trials,
        "rmse": report.rmse,
        "delta_formula": report.delta_formula,
        "ratio": report.ratio,
        "t_s": t,
        "total_time_s": task.total_time,
        "seed": seed,
        "clipped": report.clipped,
    }))
}

const FIG1_PLOT: &str = r#"import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "fig1.csv"
with open(path) as f:
    rows = list(csv.DictReader(f))
col = {k: [float(r[k]) for r in rows] for k in rows[0]}

fig, ax = plt.subplots(figsize=(5, 4))
ax.loglog(col["L"], col["delta_ghz"], "o", ms=4, label="GHZ")
ax.loglog(col["L"], col["delta_separable"], "s", ms=3, mfc="none", label="separable")
ax.loglog(col["L"], col["hl_guide"], "--", lw=1, label=r"$\propto L^{-1}$")
ax.loglog(col["L"], col["sql_guide"], ":", lw=1, label=r"$\propto L^{-1/2}$")
ax.set_xlabel("number of qubits $L$")
ax.set_ylabel(r"$\delta\Gamma_{\rm MC}$ (Hz)")
ax.legend(frameon=False)
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=200)
"#;

pub fn reproduce(run: &Run, what: crate::Artifact) -> Result<Value> {
    let cfg = run.cfg;
    let params = cfg.params();
    let grid = cfg.grid()?;
    let window = cfg.window();
    let paths = match what {
        crate::Artifact::Fig1 => {
            let data = figure(&params, &grid)?;
            let mut csv = Csv::new(&["L", "t_opt", "delta_ghz", "delta_separable", "hl_guide", "sql_guide"]);
            for r in &data.rows {
                csv.row(&[
                    Cell::Int(r.qubits.into()),
                    Cell::Num(r.t_opt),
                    Cell::Num(r.delta_ghz),
                    Cell::Num(r.delta_separable),
                    Cell::Num(r.hl_guide),
                    Cell::Num(r.sql_guide),
                ]);
            }
            vec![
                write_atomic(run.out, "fig1.csv", &csv.into_string())?,
                write_atomic(run.out, "fig1_plot.py", FIG1_PLOT)?,
            ]
        }
        crate::Artifact::Table1 => {
            let cells = table(&params, &grid, window)?;
            let rows = cells
                .iter()
                .map(|c| {
                    let time = match c.time_choice {
                        TimeChoice::Optimized(_) => "optimized".to_string(),
                        TimeChoice::Policy(p) => format!("t0/L^{}", p.exponent_s),
                    };
                    vec![
                        Cell::Text(c.fields.name().into()),
                        Cell::Text(c.environment.name().into()),
                        Cell::Text(c.target.name().into()),
                        Cell::Text(time),
                        Cell::Num(c.fit.slope),
                        Cell::Num(c.fit.intercept),
                        Cell::Num(c.fit.residual),
                        Cell::Int(c.fit.points as u64),
                        Cell::Num(c.fit.window.0),
                        Cell::Num(c.fit.window.1),
                    ]
                })
                .collect();
            let header = [
                "fields", "environment", "target", "time", "exponent", "intercept", "residual",
                "points", "window_min", "window_max",
            ];
            vec![write_table(run, "table1", &header, rows)?]
        }
        crate::Artifact::Priorwork => {
            let fits = frequency_baseline(&params, &grid, window)?;
            let rows = fits
                .iter()
                .map(|b| {
                    vec![
                        Cell::Text(b.environment.name().into()),
                        Cell::Num(b.fit.slope),
                        Cell::Num(b.fit.intercept),
                        Cell::Num(b.fit.residual),
                        Cell::Num(b.time_fit.slope),
                        Cell::Int(b.fit.points as u64),
                        Cell::Num(b.fit.window.0),
                        Cell::Num(b.fit.window.1),
                    ]
                })
                .collect();
            let header = [
                "environment", "exponent", "intercept", "residual", "t_opt_exponent", "points",
                "window_min", "window_max",
            ];
            vec![write_table(run, "priorwork", &header, rows)?]
        }
    };
    Ok(written(&format!("reproduce {}", what.name()), &paths))
}

/// Largest relative deviation between the closed forms and the integrated
/// master equation for `L = 1..=3` on `t ∈ [0, 5/(L² Γ_ref)]`.
pub fn oracle_check(run: &Run) -> Result<Value> {
    const TOLERANCE: f64 = 1e-6;
    let task = run.cfg.task()?;
    let env = task.env;
    let rate = task.reference_rate();
    let (mut worst_p, mut worst_c, mut points) = (0.0f64, 0.0f64, 0usize);
    for l in 1..=3u32 {
        let probe = task.probe.with_num_qubits(l)?;
        let horizon = (5.0 / ((l * l) as f64 * rate)).min(task.total_time);
        for k in 0..=10 {
            let t = horizon * k as f64 / 10.0;
            let exact = survival_probability(&probe, &env, t)?;
            let num = oracle_probability(&probe, &env, t, DEFAULT_TOLERANCE)?;
            worst_p = worst_p.max(relative(exact, num));
            if probe.family() == StateFamily::Ghz {
                let exact = ghz_coherence(&probe, &env, t)?.magnitude;
                let num = oracle_ghz_coherence(&probe, &env, t, DEFAULT_TOLERANCE)?.norm();
                worst_c = worst_c.max(relative(exact, num));
            }
            points += 1;
        }
    }
    let report = json!({
        "points": points,
        "max_rel_probability": worst_p,
        "max_rel_coherence": worst_c,
        "tolerance": TOLERANCE,
    });
    if worst_p > TOLERANCE || worst_c > TOLERANCE {
        bail!(Kind::new("oracle_mismatch", &report.to_string()));
    }
    Ok(report)
}

fn relative(a: f64, b: f64) -> f64 {
    if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) }
}

pub fn load_config(path: Option<&Path>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => ScenarioConfig::load(p).context(Kind::config("cannot load config")),
        None => Ok(ScenarioConfig::default()),
    }
}
