//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the closed forms under test.

#![allow(dead_code)]

use std::f64::consts::PI;

// 15-point Kronrod / 7-point Gauss nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, rtol: f64, atol: f64, depth: u32) -> f64 {
    let (k, err) = kronrod(f, a, b);
    if depth == 0 || err <= (rtol * k.abs()).max(atol) {
        return k;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, rtol, 0.5 * atol, depth - 1) + adaptive(f, m, b, rtol, 0.5 * atol, depth - 1)
}

/// Adaptive Gauss–Kronrod on `[a, b]` split into `panels` equal pieces,
/// with compensated summation over panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, rtol: f64) -> f64 {
    let width = (b - a) / panels as f64;
    // absolute floor from a coarse pass, so roundoff cannot force endless splitting
    let coarse: f64 = (0..panels)
        .map(|i| kronrod(&f, a + width * i as f64, a + width * (i + 1) as f64).0.abs())
        .sum();
    let atol = 1e-17 * coarse / panels as f64;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { lo + width };
        let v = adaptive(&f, lo, hi, rtol, atol, 30);
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `Φ(t) = 4 ∫₀^∞ J(ν) (1 − cos νt)/ν² dν` for the Lorentzian
/// `J(ν) = (a γ/π)/(γ² + ν²)`, `γ = 1/τc`.
///
/// Integrates numerically up to `ν_max = max(10³/τc, 10³/t)` and adds the
/// non-oscillating part of the tail analytically; the oscillating part of
/// the tail is below `J(ν_max)/(ν_max² t)`.
pub fn exponent_by_quadrature(amplitude: f64, correlation_time: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let gamma = 1.0 / correlation_time;
    let density = |nu: f64| amplitude * gamma / (PI * (gamma * gamma + nu * nu));
    let kernel = |nu: f64| {
        if nu == 0.0 {
            return density(0.0) * t * t / 2.0;
        }
        let s = (0.5 * nu * t).sin();
        density(nu) * 2.0 * s * s / (nu * nu)
    };
    let nu_max = (1e3 * gamma).max(1e3 / t);
    // one panel per oscillation period, at least one per Lorentzian width
    let periods = (nu_max * t / (2.0 * PI)).ceil();
    let widths = (nu_max / gamma).ceil().min(1e4);
    let panels = periods.max(widths).max(16.0) as usize;
    let body = integrate(kernel, 0.0, nu_max, panels, 1e-12);

    // ∫_V^∞ dν / (ν² (ν² + γ²))
    let z = gamma / nu_max;
    let tail_integral = if z < 1e-2 {
        let v3 = nu_max.powi(3);
        1.0 / (3.0 * v3) - z * z / (5.0 * v3) + z.powi(4) / (7.0 * v3)
    } else {
        (1.0 / nu_max - z.atan() / gamma) / (gamma * gamma)
    };
    let tail = amplitude * gamma / PI * tail_integral;
    4.0 * (body + tail)
}

/// Central difference with step `h`.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Printed closed forms, evaluated term by term.
pub mod printed {
    /// GHZ uncertainty of the Markov collective rate.
    pub fn markov_rate_ghz(l: f64, gamma_mc: f64, local_exponent: f64, t: f64, total: f64) -> f64 {
        let e = l * local_exponent + l * l * gamma_mc * t;
        (-(-2.0 * e).exp_m1()).sqrt() / (l * l * (total * t).sqrt() * (-e).exp())
    }

    /// GHZ uncertainty of the non-Markov collective rate.
    pub fn nonmarkov_rate_ghz(l: f64, gamma_nmc: f64, local_exponent: f64, t: f64, total: f64) -> f64 {
        let e = l * local_exponent + l * l * gamma_nmc * gamma_nmc * t * t;
        (-(-2.0 * e).exp_m1()).sqrt()
            / (2.0 * l * l * gamma_nmc * t * (total * t).sqrt() * (-e).exp())
    }

    /// GHZ frequency uncertainty at `ω → 0` without collective noise.
    pub fn frequency_ghz(l: f64, local_exponent: f64, t: f64, total: f64) -> f64 {
        (l * local_exponent).exp() / (l * (total * t).sqrt())
    }

    /// Single-qubit uncertainty of the Markov collective rate.
    pub fn markov_rate_single(gamma_mc: f64, local_exponent: f64, t: f64, total: f64) -> f64 {
        let e = local_exponent + gamma_mc * t;
        (-(-2.0 * e).exp_m1()).sqrt() / ((total * t).sqrt() * (-e).exp())
    }

    /// `γ_t · t` from the printed time-dependent rate.
    pub fn lorentzian_exponent(amplitude: f64, correlation_time: f64, t: f64) -> f64 {
        let x = t / correlation_time;
        let rate = 2.0 * amplitude * correlation_time * correlation_time / t * ((-x).exp_m1() + x);
        rate * t
    }
}

#[test]
fn kronrod_integrates_known_functions() {
    let v = integrate(|x| x.sin(), 0.0, PI, 4, 1e-13);
    assert!((v - 2.0).abs() < 1e-13);
    let v = integrate(|x| 1.0 / (1.0 + x * x), 0.0, 1e3, 64, 1e-13);
    assert!(relative_error(v, 1e3f64.atan()) < 1e-13);
}
