//! Adaptive Dormand–Prince 5(4) stepping for matrix-valued ODEs.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) type State = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

// 5th-order weights (also row 7 of the tableau, FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Difference between 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 1_000_000;

fn combo(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = y.clone();
    for (w, k) in terms {
        out.zip_apply(*k, |o, kv| *o += kv * (h * w));
    }
    out
}

fn error_norm(err: &State, y0: &State, y1: &State, tol: Tolerance) -> f64 {
    let mut acc = 0.0;
    for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
        let scale = tol.atol + tol.rtol * a.norm().max(b.norm());
        acc += (e.norm() / scale).powi(2);
    }
    (acc / err.len() as f64).sqrt()
}

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1`.
pub(crate) fn integrate<F>(mut f: F, t0: f64, y0: State, t1: f64, tol: Tolerance) -> Result<State>
where
    F: FnMut(f64, &State) -> Result<State>,
{
    if t1 == t0 {
        return Ok(y0);
    }
    let span = t1 - t0;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    let mut h = span * 1e-3;
    let mut steps = 0;

    while t < t1 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::Integration(format!("step budget exhausted at t = {t}")));
        }
        if t + h > t1 {
            h = t1 - t;
        }
        let k2 = f(t + C2 * h, &combo(&y, h, &[(A21, &k1)]))?;
        let k3 = f(t + C3 * h, &combo(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = f(t + C4 * h, &combo(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = f(
            t + C5 * h,
            &combo(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = f(
            t + h,
            &combo(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?;
        let y_next = combo(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + h, &y_next)?;
        let zero = State::zeros(y.nrows(), y.ncols());
        let err = combo(
            &zero,
            h,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );
        let norm = error_norm(&err, &y, &y_next, tol);
        if !norm.is_finite() {
            return Err(Error::Integration(format!("non-finite error estimate at t = {t}")));
        }
        if norm <= 1.0 {
            t = if t1 - (t + h) <= f64::EPSILON * t1.abs() { t1 } else { t + h };
            y = y_next;
            k1 = k7;
        }
        let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h <= f64::EPSILON * t.abs().max(span) {
            return Err(Error::Integration(format!("step size underflow at t = {t}")));
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let y0 = State::from_element(1, 1, Complex64::new(1.0, 0.0));
        let tol = Tolerance { rtol: 1e-11, atol: 1e-14 };
        let y = integrate(|_, y| Ok(y * Complex64::new(-2.0, 3.0)), 0.0, y0, 1.5, tol).unwrap();
        let exact = (Complex64::new(-2.0, 3.0) * 1.5).exp();
        assert!((y[(0, 0)] - exact).norm() / exact.norm() < 1e-9);
    }

    #[test]
    fn time_dependent_rate() {
        // dy/dt = -2t y  ->  y = exp(-t²)
        let y0 = State::from_element(1, 1, Complex64::new(1.0, 0.0));
        let tol = Tolerance { rtol: 1e-11, atol: 1e-14 };
        let y = integrate(|t, y| Ok(y * Complex64::new(-2.0 * t, 0.0)), 0.0, y0, 2.0, tol)
            .unwrap();
        assert!((y[(0, 0)].re - (-4.0f64).exp()).abs() / (-4.0f64).exp() < 1e-9);
    }
}
