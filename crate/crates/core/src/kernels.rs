//! Trigonometric kernels written as even functions of `omega^2`.
//!
//! `C(t) = cos(omega t)` and `S(t) = sin(omega t)/omega` are real for every sign of
//! `omega^2` (hyperbolic continuation when negative) and reduce to `1` and `t`
//! at `omega^2 = 0`, so a single code path covers every damping regime.

/// Below this value of `|omega^2 t^2|` the Taylor series is used.
const SERIES_CUTOFF: f64 = 0.25;

/// `(cos(omega t), sin(omega t)/omega)` as functions of `omega^2`.
pub fn cs(omega_sq: f64, t: f64) -> (f64, f64) {
    let x = omega_sq * t * t;
    if x.abs() < SERIES_CUTOFF {
        // C = sum (-x)^k/(2k)!, S/t = sum (-x)^k/(2k+1)!
        let mut c = 0.0;
        let mut s = 0.0;
        let mut term_c = 1.0;
        let mut term_s = 1.0;
        for k in 0..12 {
            c += term_c;
            s += term_s;
            let kf = k as f64;
            term_c *= -x / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
            term_s *= -x / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
        }
        (c, s * t)
    } else if omega_sq > 0.0 {
        let w = omega_sq.sqrt();
        ((w * t).cos(), (w * t).sin() / w)
    } else {
        let w = (-omega_sq).sqrt();
        ((w * t).cosh(), (w * t).sinh() / w)
    }
}

/// `(1 - cos(omega t))/omega^2`, computed as `2 S(t/2)^2` without cancellation.
pub fn one_minus_cos_over_sq(omega_sq: f64, t: f64) -> f64 {
    let (_, s) = cs(omega_sq, 0.5 * t);
    2.0 * s * s
}

/// Double-angle kernels `(cos 2wt, sin(2wt)/(2w), (1 - cos 2wt)/(4w^2))`.
pub fn double_angle(omega_sq: f64, t: f64) -> (f64, f64, f64) {
    let (c, s) = cs(omega_sq, t);
    let (c2, _) = cs(omega_sq, 2.0 * t);
    (c2, c * s, 0.5 * s * s)
}

/// `e^{-y} * (e^y - sum_{k<n} y^k/k!)`, the scaled exponential remainder, for `y >= 0`.
///
/// Evaluated by its Taylor series for small `y` so that expressions such as
/// `1 - e^{-y}(1 + y)` keep full relative accuracy.
pub fn exp_remainder(n: u32, y: f64) -> f64 {
    if y < 1.0 + n as f64 {
        // sum_{k>=n} y^k/k! then times e^{-y}
        let mut term = 1.0;
        for k in 1..=n {
            term *= y / k as f64;
        }
        let mut sum = 0.0;
        let mut k = n;
        loop {
            sum += term;
            k += 1;
            term *= y / k as f64;
            if term.abs() <= 1e-18 * sum.abs() || k > n + 200 {
                break;
            }
        }
        sum * (-y).exp()
    } else {
        let mut partial = 0.0;
        let mut term = 1.0;
        for k in 0..n {
            partial += term;
            term *= y / (k + 1) as f64;
        }
        1.0 - (-y).exp() * partial
    }
}

/// `phi_n(y) = (e^y - sum_{k<n} y^k/k!) e^{-y} / y^n`, finite at `y = 0` where it equals `1/n!`.
pub fn phi(n: u32, y: f64) -> f64 {
    if y.abs() < 1.0 + n as f64 {
        let mut term = 1.0;
        for k in 1..=n {
            term /= k as f64;
        }
        let mut sum = 0.0;
        let mut k = n;
        loop {
            sum += term;
            k += 1;
            term *= y / k as f64;
            if term.abs() <= 1e-18 * sum.abs() || k > n + 200 {
                break;
            }
        }
        sum * (-y).exp()
    } else {
        exp_remainder(n, y) / y.powi(n as i32)
    }
}

/// `(1 - e^{-g t})/g`, equal to `t` at `g = 0`.
pub fn one_minus_exp_over(g: f64, t: f64) -> f64 {
    t * phi(1, g * t)
}

/// Damped kernel integrals `int_0^tau e^{-kappa s} (C(s), S(s)) ds`.
///
/// Uses the closed forms when `kappa^2 + omega^2` is well separated from zero and a
/// Taylor expansion of the integrand otherwise.
pub fn damped_integrals(omega_sq: f64, kappa: f64, tau: f64) -> (f64, f64) {
    if tau == 0.0 {
        return (0.0, 0.0);
    }
    let den = kappa * kappa + omega_sq;
    let scale = (kappa * kappa).max(omega_sq.abs()).max(1.0 / (tau * tau));
    if den.abs() > 1e-6 * scale {
        let (c, s) = cs(omega_sq, tau);
        let e = (-kappa * tau).exp();
        let ic = (kappa - e * (kappa * c - omega_sq * s)) / den;
        let is = (1.0 - e * (c + kappa * s)) / den;
        (ic, is)
    } else {
        damped_integrals_ode(omega_sq, kappa, tau)
    }
}

/// Integrates `y' = (e^{-kappa s} C, e^{-kappa s} S)` through the linear system
/// `C' = -omega^2 S`, `S' = C` by fixed-step RK4 with Richardson-checked step count.
fn damped_integrals_ode(omega_sq: f64, kappa: f64, tau: f64) -> (f64, f64) {
    // state: (u = e^{-ks} C, v = e^{-ks} S, I_c, I_s)
    let rhs = |y: [f64; 4]| -> [f64; 4] {
        [-kappa * y[0] - omega_sq * y[1], y[0] - kappa * y[1], y[0], y[1]]
    };
    let rate = kappa.abs() + omega_sq.abs().sqrt();
    let steps = ((tau * rate * 200.0).ceil() as usize).clamp(64, 1 << 20);
    let h = tau / steps as f64;
    let mut y = [1.0, 0.0, 0.0, 0.0];
    for _ in 0..steps {
        let k1 = rhs(y);
        let k2 = rhs(std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]));
        let k3 = rhs(std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]));
        let k4 = rhs(std::array::from_fn(|i| y[i] + h * k3[i]));
        for i in 0..4 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    (y[2], y[3])
}
