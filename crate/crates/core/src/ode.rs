//! Explicit Runge-Kutta integrators: an adaptive Dormand-Prince 5(4) pair for
//! complex vector systems and a fixed-step classical RK4 for small real systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerances and limits for [`dopri5`].
#[derive(Debug, Clone, Copy)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Dopri5Options { rtol: 1e-10, atol: 1e-12, h_init: None, h_max: f64::INFINITY, max_steps: 1_000_000 }
    }
}

/// Step statistics of a completed integration.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dopri5Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub last_step: f64,
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy_into(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for i in 0..out.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        out[i] = y[i] + acc * h;
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` in place with the Dormand-Prince 5(4) pair.
///
/// `f(t, y, dy)` writes the derivative into `dy`.
pub fn dopri5<F>(
    mut f: F,
    t0: f64,
    t1: f64,
    y: &mut [Complex64],
    opts: &Dopri5Options,
) -> Result<Dopri5Stats>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let mut stats = Dopri5Stats::default();
    if t1 == t0 {
        return Ok(stats);
    }
    if t1 < t0 {
        return Err(Error::InvalidParameter("dopri5 integrates forward in time only".into()));
    }
    let n = y.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut tmp = vec![zero; n];
    let mut ynew = vec![zero; n];

    let mut t = t0;
    f(t, y, &mut k1);
    stats.evaluations += 1;

    let span = t1 - t0;
    let mut h = match opts.h_init {
        Some(h) => h,
        None => {
            let ny = y.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
            let nf = k1.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let guess = if nf > 0.0 { 0.01 * (ny / nf) } else { span };
            guess.max(1e-12 * span)
        }
    }
    .min(opts.h_max)
    .min(span);

    let mut steps = 0;
    while t < t1 {
        if steps >= opts.max_steps {
            return Err(Error::Integration(format!("step limit {} reached at t = {t}", opts.max_steps)));
        }
        steps += 1;
        let last = t + h >= t1 - 1e-14 * t1.abs().max(1.0);
        if last {
            h = t1 - t;
        }
        axpy_into(&mut tmp, y, h, &[(A21, &k1)]);
        f(t + C2 * h, &tmp, &mut k2);
        axpy_into(&mut tmp, y, h, &[(A31, &k1), (A32, &k2)]);
        f(t + C3 * h, &tmp, &mut k3);
        axpy_into(&mut tmp, y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        f(t + C4 * h, &tmp, &mut k4);
        axpy_into(&mut tmp, y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        f(t + C5 * h, &tmp, &mut k5);
        axpy_into(&mut tmp, y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        f(t + h, &tmp, &mut k6);
        axpy_into(&mut ynew, y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        f(t + h, &ynew, &mut k7);
        stats.evaluations += 6;

        let mut err: f64 = 0.0;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = opts.atol + opts.rtol * y[i].norm().max(ynew[i].norm());
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            return Err(Error::Integration(format!("non-finite error estimate at t = {t}")));
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            y.copy_from_slice(&ynew);
            std::mem::swap(&mut k1, &mut k7);
            stats.accepted += 1;
            stats.last_step = h;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(opts.h_max);
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Integration(format!("step size underflow at t = {t}")));
            }
        }
    }
    Ok(stats)
}

/// Classical RK4 with a fixed step no larger than `h` from `t0` to `t1`.
pub fn rk4<const N: usize, F>(f: F, t0: f64, t1: f64, y0: [f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let span = t1 - t0;
    if span <= 0.0 {
        return y0;
    }
    let steps = (span / h).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let mut y = y0;
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let k1 = f(t, &y);
        let y2 = std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]);
        let k2 = f(t + 0.5 * h, &y2);
        let y3 = std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]);
        let k3 = f(t + 0.5 * h, &y3);
        let y4 = std::array::from_fn(|i| y[i] + h * k3[i]);
        let k4 = f(t + h, &y4);
        for i in 0..N {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dopri5_exponential_and_rotation() {
        let lam = Complex64::new(-0.3, 2.0);
        let mut y = vec![Complex64::new(1.0, 0.5)];
        let stats = dopri5(|_, y, dy| dy[0] = lam * y[0], 0.0, 5.0, &mut y, &Dopri5Options::default()).unwrap();
        let exact = Complex64::new(1.0, 0.5) * (lam * 5.0).exp();
        assert!((y[0] - exact).norm() < 1e-9);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn dopri5_time_dependent() {
        let mut y = vec![Complex64::new(0.0, 0.0)];
        dopri5(|t, _, dy| dy[0] = Complex64::new(t.cos(), 0.0), 0.0, 3.0, &mut y, &Dopri5Options::default()).unwrap();
        assert!((y[0].re - 3f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn rk4_harmonic() {
        let y = rk4(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, 2.0, [1.0, 0.0], 1e-3);
        assert!((y[0] - 2f64.cos()).abs() < 1e-12);
        assert!((y[1] + 2f64.sin()).abs() < 1e-12);
    }
}
