//! Acceptance suite. Runs every criterion and prints one PASS/FAIL line each.
//! With `DECO_METRIX_ACCEPTANCE_STRICT=1` it exits non-zero if any fails.
//!
//! ```text
//! cargo test -p deco-metrix --test acceptance
//! DECO_METRIX_ACCEPTANCE_STRICT=1 cargo test -p deco-metrix --test acceptance
//! ```

mod common;

use std::f64::consts::FRAC_PI_2;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{central_difference, exponent_by_quadrature, printed, relative_error};
use deco_metrix::estimation::{mc_validate, optimize_time, uncertainty};
use deco_metrix::oracle::{oracle_ghz_coherence, oracle_probability};
use deco_metrix::probe::{ghz_coherence, probability_derivative, survival_probability};
use deco_metrix::scaling::{
    default_grid, detect_transition, figure, fit_exponent, fit_time_exponent, frequency_baseline,
    sweep, table, Regime, ScenarioParams,
};
use deco_metrix::{
    EstimationTask, LorentzianSpectrum, NoiseEnvironment, ProbeConfig, SpectralLimit, StateFamily,
    Target,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(value: f64, expected: f64, tol: f64) -> bool {
    (value - expected).abs() <= tol
}

/// Uncertainty-vs-L figure: HL slope on [2, 20], SQL slope on [10³, 10⁴],
/// crossover in [10, 100], under a minute.
fn figure_reproduction() -> Outcome {
    let start = Instant::now();
    let params = ScenarioParams::default();
    let fig = match figure(&params, &default_grid()) {
        Ok(f) => f,
        Err(e) => return check(false, format!("figure failed: {e}")),
    };
    let small = fit_exponent(&fig.ghz, (2.0, 20.0)).unwrap();
    let large = fit_exponent(&fig.ghz, (1e3, 1e4)).unwrap();
    let l_star = detect_transition(&fig.ghz);
    let elapsed = start.elapsed();
    let l_star_ok = matches!(l_star, Ok(l) if (10.0..=100.0).contains(&l));
    let pass = within(small.slope, -1.0, 0.1)
        && within(large.slope, -0.5, 0.1)
        && l_star_ok
        && elapsed <= Duration::from_secs(60);
    check(
        pass,
        format!(
            "slope[2,20] = {:.4} (want -1.0 ± 0.1), slope[1e3,1e4] = {:.4} (want -0.5 ± 0.1), L* = {} (want [10,100]), {:.2?}",
            small.slope,
            large.slope,
            l_star.map(|l| format!("{l:.2}")).unwrap_or_else(|e| e.to_string()),
            elapsed
        ),
    )
}

fn table_reproduction() -> Outcome {
    let start = Instant::now();
    let cells = match table(&ScenarioParams::default(), &default_grid(), (1e3, 1e4)) {
        Ok(c) => c,
        Err(e) => return check(false, format!("table failed: {e}")),
    };
    let elapsed = start.elapsed();
    let mut pass = elapsed <= Duration::from_secs(60);
    let mut parts = Vec::new();
    for cell in &cells {
        let want = match cell.fields {
            Regime::Markov => -1.0,
            Regime::NonMarkov => -0.5,
        };
        pass &= within(cell.fit.slope, want, 0.05);
        parts.push(format!(
            "{}/{}: {:.4} (want {want})",
            cell.fields.name(),
            cell.environment.name(),
            cell.fit.slope
        ));
    }
    pass &= cells.len() == 4;
    check(pass, format!("{}, {:.2?}", parts.join(", "), elapsed))
}

fn frequency_baseline_scalings() -> Outcome {
    let fits = match frequency_baseline(&ScenarioParams::default(), &default_grid(), (1e3, 1e4)) {
        Ok(f) => f,
        Err(e) => return check(false, format!("baseline failed: {e}")),
    };
    let markov = fits.iter().find(|f| f.environment == Regime::Markov).unwrap();
    let nonmarkov = fits.iter().find(|f| f.environment == Regime::NonMarkov).unwrap();
    check(
        within(markov.fit.slope, -0.5, 0.05) && within(nonmarkov.fit.slope, -0.75, 0.05),
        format!(
            "markov env: {:.4} (want -0.5 ± 0.05), non-markov env: {:.4} (want -0.75 ± 0.05)",
            markov.fit.slope, nonmarkov.fit.slope
        ),
    )
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Local bath drawn at random, with its exponent computed from the printed
/// time-dependent rate. Lorentzian draws keep `t/τc' ≥ 0.05`.
fn random_local(rng: &mut ChaCha8Rng, t: f64) -> (SpectralLimit, f64) {
    match rng.random_range(0..3) {
        0 => {
            let g = rng.random_range(0.0..2.0);
            (SpectralLimit::white(g).unwrap(), g * t)
        }
        1 => {
            let a = rng.random_range(0.0..50.0);
            (SpectralLimit::static_noise(a).unwrap(), a * t * t)
        }
        _ => {
            let tc = t / log_uniform(rng, 0.05, 50.0);
            let a = rng.random_range(0.0..2.0) / (2.0 * tc);
            (
                LorentzianSpectrum::new(a, tc).unwrap().into(),
                printed::lorentzian_exponent(a, tc, t),
            )
        }
    }
}

fn closed_form_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC105ED);
    let mut worst = [0.0f64; 5];
    let names = ["eq-markov-ghz", "nonmarkov-ghz", "frequency-ghz", "single-qubit", "separable"];
    for _ in 0..1000 {
        let l = rng.random_range(1..200u32);
        let lf = l as f64;
        let target_exponent = log_uniform(&mut rng, 0.01, 5.0);

        // Markov collective rate, GHZ.
        let g = log_uniform(&mut rng, 0.1, 10.0);
        let t = target_exponent / (lf * lf * g);
        let (local, local_exp) = random_local(&mut rng, t);
        let total = t * log_uniform(&mut rng, 1.0, 1e4);
        let env = NoiseEnvironment::new(SpectralLimit::white(g).unwrap(), local);
        let task = EstimationTask::new(Target::MarkovCollectiveRate, total, ProbeConfig::ghz(l, 0.0).unwrap(), env).unwrap();
        let ours = uncertainty(&task, t).unwrap();
        worst[0] = worst[0].max(relative_error(ours, printed::markov_rate_ghz(lf, g, local_exp, t, total)));

        // Single qubit and separable probes.
        let single = EstimationTask { probe: ProbeConfig::ghz(1, 0.0).unwrap(), ..task };
        let reference = printed::markov_rate_single(g, local_exp, t, total);
        worst[3] = worst[3].max(relative_error(uncertainty(&single, t).unwrap(), reference));
        let separable = EstimationTask { probe: ProbeConfig::product(l, 0.0).unwrap(), ..task };
        worst[4] = worst[4].max(relative_error(uncertainty(&separable, t).unwrap(), reference / lf.sqrt()));

        // Non-Markov collective rate, GHZ.
        let gn = log_uniform(&mut rng, 0.5, 50.0);
        let t = (target_exponent / (lf * lf * gn * gn)).sqrt();
        let (local, local_exp) = random_local(&mut rng, t);
        let total = t * log_uniform(&mut rng, 1.0, 1e4);
        let env = NoiseEnvironment::new(SpectralLimit::from_nonmarkov_rate(gn).unwrap(), local);
        let task = EstimationTask::new(Target::NonMarkovCollectiveRate, total, ProbeConfig::ghz(l, 0.0).unwrap(), env).unwrap();
        let ours = uncertainty(&task, t).unwrap();
        worst[1] = worst[1].max(relative_error(ours, printed::nonmarkov_rate_ghz(lf, gn, local_exp, t, total)));

        // Frequency, GHZ, no collective noise, ω → 0 with readout phase π/2.
        let t = log_uniform(&mut rng, 1e-3, 1.0);
        let (local, local_exp) = random_local(&mut rng, t);
        let total = t * log_uniform(&mut rng, 1.0, 1e4);
        let env = NoiseEnvironment::new(SpectralLimit::quiet(), local);
        let task = EstimationTask::new(Target::QubitFrequency, total, ProbeConfig::ghz(l, FRAC_PI_2).unwrap(), env).unwrap();
        let ours = uncertainty(&task, t).unwrap();
        worst[2] = worst[2].max(relative_error(ours, printed::frequency_ghz(lf, local_exp, t, total)));
    }
    let pass = worst.iter().all(|&w| w <= 1e-12);
    let detail = names
        .iter()
        .zip(worst)
        .map(|(n, w)| format!("{n}: {w:.2e}"))
        .collect::<Vec<_>>()
        .join(", ");
    check(pass, format!("max relative deviation over 1000 draws (want <= 1e-12): {detail}"))
}

fn oracle_equivalence() -> Outcome {
    let tol = 1e-11;
    let envs = [
        (
            "white",
            NoiseEnvironment::new(SpectralLimit::white(1.0).unwrap(), SpectralLimit::white(0.2).unwrap()),
        ),
        (
            "lorentzian",
            NoiseEnvironment::new(
                LorentzianSpectrum::from_markov_rate(1.0, 1e-3).unwrap(),
                LorentzianSpectrum::from_markov_rate(0.2, 1e-3).unwrap(),
            ),
        ),
    ];
    let mut worst_coherence = 0.0f64;
    let mut worst_probability = 0.0f64;
    for (_, env) in &envs {
        for l in 1..=3u32 {
            let horizon = 5.0 / (l * l) as f64;
            let probe = ProbeConfig::ghz(l, 0.0).unwrap();
            for k in 0..=10 {
                let t = horizon * k as f64 / 10.0;
                let exact = ghz_coherence(&probe, env, t).unwrap();
                let num = oracle_ghz_coherence(&probe, env, t, tol).unwrap();
                worst_coherence = worst_coherence.max(relative_error(num.norm(), exact.magnitude));
                let p = oracle_probability(&probe, env, t, tol).unwrap();
                worst_probability =
                    worst_probability.max(relative_error(p, survival_probability(&probe, env, t).unwrap()));
            }
        }
    }
    let mut worst_quadrature = 0.0f64;
    let spectrum = LorentzianSpectrum::new(500.0, 1e-3).unwrap();
    let tc = spectrum.correlation_time();
    for k in 0..=18 {
        let t = tc * 10f64.powf(-6.0 + k as f64 / 2.0);
        let closed = spectrum.decoherence_exponent(t).unwrap();
        let quad = exponent_by_quadrature(500.0, tc, t);
        worst_quadrature = worst_quadrature.max(relative_error(closed, quad));
    }
    check(
        worst_coherence <= 1e-6 && worst_probability <= 1e-6 && worst_quadrature <= 1e-8,
        format!(
            "coherence {worst_coherence:.2e}, probability {worst_probability:.2e} (want <= 1e-6); quadrature {worst_quadrature:.2e} (want <= 1e-8)"
        ),
    )
}

fn derivative_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD1FF);
    let mut worst = [0.0f64; 3];
    let mut skipped = 0usize;
    for _ in 0..300 {
        let l = rng.random_range(1..40u32);
        let lf = l as f64;
        let family = if rng.random_bool(0.5) { StateFamily::Ghz } else { StateFamily::Product };
        let n = if family == StateFamily::Ghz { lf } else { 1.0 };
        for (slot, target) in Target::ALL.into_iter().enumerate() {
            let exponent = log_uniform(&mut rng, 0.01, 5.0);
            let tc = log_uniform(&mut rng, 1e-4, 1e-1);
            let (collective, t, omega, phi) = match target {
                Target::MarkovCollectiveRate => {
                    let g = log_uniform(&mut rng, 0.1, 10.0);
                    let t = exponent / (n * n * g);
                    let bath = if rng.random_bool(0.5) {
                        SpectralLimit::white(g).unwrap()
                    } else {
                        LorentzianSpectrum::from_markov_rate(g, tc).unwrap().into()
                    };
                    (bath, t, 0.0, 0.0)
                }
                Target::NonMarkovCollectiveRate => {
                    let g = log_uniform(&mut rng, 0.5, 50.0);
                    let t = (exponent / (n * n * g * g)).sqrt();
                    let bath = if rng.random_bool(0.5) {
                        SpectralLimit::from_nonmarkov_rate(g).unwrap()
                    } else {
                        LorentzianSpectrum::new(g * g, tc).unwrap().into()
                    };
                    (bath, t, 0.0, 0.0)
                }
                Target::QubitFrequency => {
                    let t = log_uniform(&mut rng, 1e-3, 1.0);
                    let omega = rng.random_range(0.1..3.0) / (n * t);
                    let phi = rng.random_range(0.0..std::f64::consts::TAU);
                    (SpectralLimit::white(rng.random_range(0.0..1.0)).unwrap(), t, omega, phi)
                }
            };
            let local = SpectralLimit::white(rng.random_range(0.0..0.5)).unwrap();
            let env = NoiseEnvironment::new(collective, local);
            let probe = ProbeConfig::new(l, family, omega, phi).unwrap();
            let task = EstimationTask::new(target, 1.0, probe, env).unwrap();
            let theta = task.true_value().unwrap();
            let analytic = probability_derivative(&probe, &env, t, target).unwrap();
            if analytic.abs() * theta < 1e-2 {
                skipped += 1;
                continue;
            }
            let p_at = |x: f64| {
                let moved = task.with_true_value(x).unwrap();
                survival_probability(&moved.probe, &moved.env, t).unwrap()
            };
            let fd = central_difference(p_at, theta, 1e-6 * theta);
            worst[slot] = worst[slot].max(relative_error(analytic, fd));
        }
    }
    check(
        worst.iter().all(|&w| w <= 1e-6),
        format!(
            "max relative deviation: markov {:.2e}, non-markov {:.2e}, frequency {:.2e} (want <= 1e-6; {skipped} near-flat points skipped)",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn monte_carlo_consistency() -> Outcome {
    let start = Instant::now();
    let params = ScenarioParams::default();
    let env = NoiseEnvironment::new(params.collective_lorentzian().unwrap(), params.local_lorentzian().unwrap());
    let task = EstimationTask::new(Target::MarkovCollectiveRate, 1.0, ProbeConfig::ghz(2, 0.0).unwrap(), env).unwrap();
    let t = optimize_time(&task, task.default_bounds()).unwrap().t_opt;
    let task = task.with_total_time(1e4 * t * (1.0 + 1e-12)).unwrap();
    let report = match mc_validate(&task, t, 1000, 20_190_318) {
        Ok(r) => r,
        Err(e) => return check(false, format!("mc failed: {e}")),
    };
    let elapsed = start.elapsed();
    check(
        report.repetitions == 10_000
            && (0.9..=1.1).contains(&report.ratio)
            && elapsed <= Duration::from_secs(30),
        format!(
            "N = {}, trials = {}, rmse = {:.5e}, formula = {:.5e}, ratio = {:.4} (want [0.9, 1.1]), clipped = {}, {:.2?}",
            report.repetitions, report.trials, report.rmse, report.delta_formula, report.ratio, report.clipped, elapsed
        ),
    )
}

fn optimal_time_scalings() -> Outcome {
    let qubits = [2u32, 4, 8, 16];
    let base = |collective: SpectralLimit, target| {
        EstimationTask::new(
            target,
            1.0,
            ProbeConfig::ghz(1, 0.0).unwrap(),
            NoiseEnvironment::new(collective, SpectralLimit::quiet()),
        )
        .unwrap()
    };
    let markov = base(SpectralLimit::white(1.0).unwrap(), Target::MarkovCollectiveRate);
    let nonmarkov = base(SpectralLimit::from_nonmarkov_rate(500f64.sqrt()).unwrap(), Target::NonMarkovCollectiveRate);
    let window = (2.0, 16.0);

    let markov_result = sweep(&markov, &qubits).and_then(|c| fit_time_exponent(&c, window));
    let nonmarkov_result = sweep(&nonmarkov, &qubits).and_then(|c| fit_time_exponent(&c, window));
    let markov_ok = matches!(&markov_result, Ok(f) if within(f.slope, -2.0, 0.05));
    let nonmarkov_ok = matches!(&nonmarkov_result, Ok(f) if within(f.slope, -1.0, 0.05));
    // finite correlation time restores an interior optimum; reported for context only
    let lorentzian = base(
        ScenarioParams::default().collective_lorentzian().unwrap().into(),
        Target::MarkovCollectiveRate,
    );
    let lorentzian_result = sweep(&lorentzian, &qubits).and_then(|c| fit_time_exponent(&c, window));
    let show = |r: &deco_metrix::Result<deco_metrix::ExponentFit>| match r {
        Ok(f) => format!("{:.4}", f.slope),
        Err(e) => format!("error: {e}"),
    };
    check(
        markov_ok && nonmarkov_ok,
        format!(
            "t_opt slope markov: {} (want -2 ± 0.05), non-markov: {} (want -1 ± 0.05); markov with tau_c = 1e-3: {}",
            show(&markov_result),
            show(&nonmarkov_result),
            show(&lorentzian_result)
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("AC1 figure: HL->SQL scaling and crossover", figure_reproduction),
        ("AC2 table: 2x2 asymptotic exponents", table_reproduction),
        ("AC3 frequency baseline scalings", frequency_baseline_scalings),
        ("AC4 closed-form equivalence", closed_form_equivalence),
        ("AC5 master-equation and quadrature oracles", oracle_equivalence),
        ("AC6 derivative vs finite differences", derivative_checks),
        ("AC7 Monte Carlo consistency", monte_carlo_consistency),
        ("AC8 optimal-time scalings", optimal_time_scalings),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = run();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {name}: {}", outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    let strict = std::env::var("DECO_METRIX_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed > 0 && strict {
        std::process::exit(1);
    }
}
