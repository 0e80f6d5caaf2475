//! Time-dependent linear forcing `lambda(t) a^dag + lambda*(t) a` and the forced first moments.
//!
//! With `f(s) = (sqrt(2) lambda_i(s), -sqrt(2) lambda_r(s))` the first moments are
//! `x(t) = Phi(t) x0 + int_0^t Phi(t - s) f(s) ds`, with `Phi` the free propagator.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::kernels::{cs, damped_integrals};
use crate::model::ModelParams;
use crate::propagator::{evolve_covariance, free_displacement, moment_propagator};
use crate::quadrature::adaptive_simpson;

/// Driving protocol `lambda(t) = lambda_r(t) + i lambda_i(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForceModel {
    /// `lambda = lr + i li` for `t >= 0`.
    Constant { lr: f64, li: f64 },
    /// `lambda = A delta(t - a) + i B delta(t - b)`.
    Impulse {
        #[serde(rename = "A")]
        amp_a: f64,
        a_time: f64,
        #[serde(rename = "B")]
        amp_b: f64,
        b_time: f64,
    },
    /// `lambda = A H(t - a) + i B H(t - b)`.
    Heaviside {
        #[serde(rename = "A")]
        amp_a: f64,
        a_time: f64,
        #[serde(rename = "B")]
        amp_b: f64,
        b_time: f64,
    },
    /// `lambda = R cos(Omega t) + i R sin(Omega t)`.
    Harmonic {
        #[serde(rename = "R")]
        amp: f64,
        #[serde(rename = "Omega")]
        omega: f64,
    },
    /// Piecewise-linear samples, zero outside `[times[0], times[last]]`.
    Sampled { times: Vec<f64>, lr_values: Vec<f64>, li_values: Vec<f64> },
}

/// Absolute tolerance of the convolution quadrature for sampled forces.
pub const SAMPLED_TOL: f64 = 1e-9;
/// Evaluation cap per output point for sampled forces.
pub const SAMPLED_MAX_EVALS: usize = 1 << 20;

impl ForceModel {
    pub fn zero() -> Self {
        ForceModel::Constant { lr: 0.0, li: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self {
            ForceModel::Constant { lr, li } => {
                if !(lr.is_finite() && li.is_finite()) {
                    return bad("constant force must be finite".into());
                }
            }
            ForceModel::Impulse { amp_a, a_time, amp_b, b_time }
            | ForceModel::Heaviside { amp_a, a_time, amp_b, b_time } => {
                if ![amp_a, a_time, amp_b, b_time].iter().all(|v| v.is_finite()) {
                    return bad("force parameters must be finite".into());
                }
                if *a_time < 0.0 || *b_time < 0.0 {
                    return bad(format!("event times must be >= 0, got a = {a_time}, b = {b_time}"));
                }
            }
            ForceModel::Harmonic { amp, omega } => {
                if !(amp.is_finite() && omega.is_finite()) {
                    return bad("harmonic force parameters must be finite".into());
                }
            }
            ForceModel::Sampled { times, lr_values, li_values } => {
                if times.len() < 2 {
                    return bad("sampled force needs at least 2 points".into());
                }
                if lr_values.len() != times.len() || li_values.len() != times.len() {
                    return bad("sampled force value arrays must match the time grid".into());
                }
                if !times.windows(2).all(|w| w[0] < w[1]) {
                    return bad("sampled force times must be strictly ascending".into());
                }
                if !times.iter().chain(lr_values).chain(li_values).all(|v| v.is_finite()) {
                    return bad("sampled force values must be finite".into());
                }
            }
        }
        Ok(())
    }

    /// `lambda(t)` as `(lambda_r, lambda_i)`; impulses have no pointwise value and return zero.
    pub fn value(&self, t: f64) -> (f64, f64) {
        match self {
            ForceModel::Constant { lr, li } => {
                if t >= 0.0 {
                    (*lr, *li)
                } else {
                    (0.0, 0.0)
                }
            }
            ForceModel::Impulse { .. } => (0.0, 0.0),
            ForceModel::Heaviside { amp_a, a_time, amp_b, b_time } => (
                if t >= *a_time { *amp_a } else { 0.0 },
                if t >= *b_time { *amp_b } else { 0.0 },
            ),
            ForceModel::Harmonic { amp, omega } => (amp * (omega * t).cos(), amp * (omega * t).sin()),
            ForceModel::Sampled { times, lr_values, li_values } => {
                (interp(times, lr_values, t), interp(times, li_values, t))
            }
        }
    }

    /// Times at which the force or the state is discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            ForceModel::Impulse { a_time, b_time, .. } | ForceModel::Heaviside { a_time, b_time, .. } => {
                let mut v = vec![*a_time, *b_time];
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            }
            ForceModel::Sampled { times, .. } => times.clone(),
            _ => Vec::new(),
        }
    }

    /// Jumps `(dq, dp)` applied at `t` by impulses.
    pub fn jumps_at(&self, t: f64) -> (f64, f64) {
        match self {
            ForceModel::Impulse { amp_a, a_time, amp_b, b_time } => (
                if t == *b_time { SQRT_2 * amp_b } else { 0.0 },
                if t == *a_time { -SQRT_2 * amp_a } else { 0.0 },
            ),
            _ => (0.0, 0.0),
        }
    }

    /// Sum of two forces as a sampled force on the given grid (for superposition checks).
    pub fn sampled_sum(a: &ForceModel, b: &ForceModel, times: &[f64]) -> Result<ForceModel> {
        let (mut lr, mut li) = (Vec::new(), Vec::new());
        for &t in times {
            let (ar, ai) = a.value(t);
            let (br, bi) = b.value(t);
            lr.push(ar + br);
            li.push(ai + bi);
        }
        let f = ForceModel::Sampled { times: times.to_vec(), lr_values: lr, li_values: li };
        f.validate()?;
        Ok(f)
    }
}

fn interp(times: &[f64], values: &[f64], t: f64) -> f64 {
    let n = times.len();
    if t < times[0] || t > times[n - 1] {
        return 0.0;
    }
    let k = times.partition_point(|&x| x <= t).clamp(1, n - 1);
    let (t0, t1) = (times[k - 1], times[k]);
    let w = (t - t0) / (t1 - t0);
    values[k - 1] * (1.0 - w) + values[k] * w
}

fn forcing_vector(lr: f64, li: f64) -> (f64, f64) {
    (SQRT_2 * li, -SQRT_2 * lr)
}

/// `int_0^tau Phi(u) du` applied to `(fq, fp)`.
fn integrated_response(params: &ModelParams, tau: f64, fq: f64, fp: f64) -> (f64, f64) {
    if tau <= 0.0 {
        return (0.0, 0.0);
    }
    let (ic, is) = damped_integrals(params.omega_sq(), 0.5 * params.gamma(), tau);
    let (w0, t1, t2) = (params.omega0(), params.theta1(), params.theta2());
    let m = [[ic - 0.5 * t2 * is, 0.5 * (2.0 * w0 - t1) * is], [-0.5 * (2.0 * w0 + t1) * is, ic + 0.5 * t2 * is]];
    (m[0][0] * fq + m[0][1] * fp, m[1][0] * fq + m[1][1] * fp)
}

fn kicked(params: &ModelParams, tau: f64, dq: f64, dp: f64) -> (f64, f64) {
    let m = moment_propagator(params, tau);
    (m[0][0] * dq + m[0][1] * dp, m[1][0] * dq + m[1][1] * dp)
}

/// Forced first moments at time `t`.
pub fn forced_trajectory(params: &ModelParams, force: &ForceModel, q0: f64, p0: f64, t: f64) -> Result<(f64, f64)> {
    force.validate()?;
    let (qf, pf) = free_displacement(params, q0, p0, t)?;
    let (dq, dp) = match force {
        ForceModel::Constant { lr, li } => {
            let (fq, fp) = forcing_vector(*lr, *li);
            integrated_response(params, t, fq, fp)
        }
        ForceModel::Impulse { .. } => return impulse_trajectory(params, force, q0, p0, t),
        ForceModel::Heaviside { amp_a, a_time, amp_b, b_time } => {
            let (aq, ap) = integrated_response(params, t - a_time, 0.0, -SQRT_2 * amp_a);
            let (bq, bp) = integrated_response(params, t - b_time, SQRT_2 * amp_b, 0.0);
            (aq + bq, ap + bp)
        }
        ForceModel::Harmonic { amp, omega } => {
            let h = harmonic_response(params, *amp, *omega)?;
            return Ok(h.trajectory(params, qf, pf, t));
        }
        ForceModel::Sampled { times, .. } => sampled_convolution(params, force, times, t)?,
    };
    Ok((qf + dq, pf + dp))
}

fn sampled_convolution(params: &ModelParams, force: &ForceModel, times: &[f64], t: f64) -> Result<(f64, f64)> {
    let lo = times[0];
    let hi = times[times.len() - 1].min(t);
    if hi <= lo {
        return Ok((0.0, 0.0));
    }
    let integrand = |s: f64| -> [f64; 2] {
        let (lr, li) = force.value(s);
        let (fq, fp) = forcing_vector(lr, li);
        let m = moment_propagator(params, t - s);
        [m[0][0] * fq + m[0][1] * fp, m[1][0] * fq + m[1][1] * fp]
    };
    let mut knots: Vec<f64> = times.iter().copied().filter(|&x| x > lo && x < hi).collect();
    knots.insert(0, lo);
    knots.push(hi);
    let total_len = hi - lo;
    let (mut q, mut p) = (0.0, 0.0);
    let mut evals = 0;
    for w in knots.windows(2) {
        let tol = SAMPLED_TOL * (w[1] - w[0]) / total_len;
        let budget = SAMPLED_MAX_EVALS.saturating_sub(evals);
        let r = adaptive_simpson(integrand, w[0], w[1], tol.max(1e-15), budget).map_err(|e| match e {
            Error::Quadrature { estimate, evaluations } => {
                Error::Quadrature { estimate, evaluations: evaluations + evals }
            }
            other => other,
        })?;
        evals += r.evaluations;
        q += r.value[0];
        p += r.value[1];
    }
    Ok((q, p))
}

/// First moments under `lambda = A delta(t - a) + i B delta(t - b)`; right-continuous at the events.
pub fn impulse_trajectory(params: &ModelParams, force: &ForceModel, q0: f64, p0: f64, t: f64) -> Result<(f64, f64)> {
    let ForceModel::Impulse { amp_a, a_time, amp_b, b_time } = force else {
        return Err(Error::InvalidParameter("impulse_trajectory requires an impulse force".into()));
    };
    force.validate()?;
    let (mut q, mut p) = free_displacement(params, q0, p0, t)?;
    if t >= *a_time {
        let (dq, dp) = kicked(params, t - a_time, 0.0, -SQRT_2 * amp_a);
        q += dq;
        p += dp;
    }
    if t >= *b_time {
        let (dq, dp) = kicked(params, t - b_time, SQRT_2 * amp_b, 0.0);
        q += dq;
        p += dp;
    }
    Ok((q, p))
}

/// Amplitudes and phases of the response to `lambda = R e^{i Omega t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicResponse {
    #[serde(rename = "R_Omega")]
    pub r_big: f64,
    /// Transient amplitude; defined only when `omega` is real and nonzero.
    #[serde(rename = "R_omega")]
    pub r_small: Option<f64>,
    #[serde(rename = "S_Omega")]
    pub s_big: f64,
    #[serde(rename = "S_omega")]
    pub s_small: Option<f64>,
    pub phi_q: f64,
    pub phi_p: f64,
    pub psi_q: Option<f64>,
    pub psi_p: Option<f64>,
    #[serde(rename = "N_denom")]
    pub n_denom: f64,
    pub c_q: f64,
    pub s_q: f64,
    pub c_q_prime: f64,
    pub s_q_prime: f64,
    /// `omega R_omega sin(psi_q)`, finite in every regime.
    pub r_sin_scaled: f64,
    /// `omega S_omega sin(psi_p)`, finite in every regime.
    pub s_sin_scaled: f64,
    /// Drive frequency `Omega`.
    #[serde(rename = "Omega")]
    pub drive_omega: f64,
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    } else if y > PI {
        y -= 2.0 * PI;
    }
    y
}

fn atan2_wrapped(s: f64, c: f64) -> f64 {
    wrap_phase(s.atan2(c))
}

/// `(c_q, s_q)` for the squeezing coefficients `(theta1, theta2)`.
fn cq_sq(gamma: f64, w2: f64, big_omega: f64, amp: f64, n: f64, th0: f64, th1: f64, th2: f64) -> (f64, f64) {
    let g4 = 0.25 * gamma * gamma;
    let o2 = big_omega * big_omega;
    let f = -amp / (n * SQRT_2);
    let c = f * ((th0 - th1) * (g4 + w2 - o2) - gamma * big_omega * th2 + 2.0 * big_omega * (g4 - w2 + o2));
    let s = f * (th2 * (g4 + w2 - o2) + gamma * big_omega * (th0 - th1) - gamma * (g4 + w2 + o2));
    (c, s)
}

/// Steady-state and transient coefficients of harmonic driving.
pub fn harmonic_response(params: &ModelParams, amp: f64, big_omega: f64) -> Result<HarmonicResponse> {
    if !(amp.is_finite() && big_omega.is_finite()) {
        return Err(Error::InvalidParameter("harmonic force parameters must be finite".into()));
    }
    let gamma = params.gamma();
    let w2 = params.omega_sq();
    let (th0, th1, th2) = (params.theta0(), params.theta1(), params.theta2());
    let g4 = 0.25 * gamma * gamma;
    let o2 = big_omega * big_omega;
    let n = (g4 + w2 - o2).powi(2) + gamma * gamma * o2;
    if !(n > 1e-30) {
        return Err(Error::Singular(format!("resonant harmonic drive: N = {n}")));
    }
    let (c_q, s_q) = cq_sq(gamma, w2, big_omega, amp, n, th0, th1, th2);
    let (c_qp, s_qp) = cq_sq(gamma, w2, big_omega, amp, n, th0, -th1, -th2);
    let f = amp / (n * SQRT_2);
    let r_sin_scaled = f
        * (0.5 * gamma * (th0 - th1) * (g4 + w2 + o2) - 2.0 * gamma * big_omega * w2
            - big_omega * th2 * (g4 - w2 + o2));
    let s_sin_scaled = f
        * (-2.0 * w2 * (g4 + w2 - o2) + 0.5 * gamma * th2 * (g4 + w2 + o2)
            - big_omega * (th0 + th1) * (g4 - w2 + o2));

    let r_big = amp / (2.0 * n).sqrt() * ((gamma - th2).powi(2) + (2.0 * big_omega - (th0 - th1)).powi(2)).sqrt();
    let s_big = amp / (2.0 * n).sqrt() * ((gamma + th2).powi(2) + (2.0 * big_omega - (th0 + th1)).powi(2)).sqrt();
    let real_omega = w2 > params.ep_tolerance();
    let (r_small, s_small, psi_q, psi_p) = if real_omega {
        let w = w2.sqrt();
        let r_small = amp / (w * (2.0 * n).sqrt())
            * (w2 * (2.0 * big_omega - (th0 - th1)).powi(2) + (big_omega * th2 - 0.5 * gamma * (th0 - th1)).powi(2))
                .sqrt();
        let s_arg = (0.5 * gamma * th2 - big_omega * (th0 + th1)).powi(2)
            + 4.0 * w2 * (g4 + w2 + 0.25 * th2 * th2 - big_omega * (th0 + th1));
        let s_small = amp / (w * (2.0 * n).sqrt()) * s_arg.max(0.0).sqrt();
        (
            Some(r_small),
            Some(s_small),
            Some(atan2_wrapped(r_sin_scaled / w, -c_q)),
            Some(atan2_wrapped(s_sin_scaled / w, s_qp)),
        )
    } else {
        (None, None, None, None)
    };
    Ok(HarmonicResponse {
        r_big,
        r_small,
        s_big,
        s_small,
        phi_q: atan2_wrapped(s_q, c_q),
        phi_p: atan2_wrapped(c_qp, -s_qp),
        psi_q,
        psi_p,
        n_denom: n,
        c_q,
        s_q,
        c_q_prime: c_qp,
        s_q_prime: s_qp,
        r_sin_scaled,
        s_sin_scaled,
        drive_omega: big_omega,
    })
}

impl HarmonicResponse {
    /// Steady orbit `(q_st, p_st)` at time `t`.
    pub fn steady(&self, t: f64) -> (f64, f64) {
        let (c, s) = ((self.drive_omega * t).cos(), (self.drive_omega * t).sin());
        (self.c_q * c + self.s_q * s, -self.s_q_prime * c + self.c_q_prime * s)
    }

    /// Full trajectory given the free part `(qf, pf)` at time `t`.
    pub fn trajectory(&self, params: &ModelParams, qf: f64, pf: f64, t: f64) -> (f64, f64) {
        let (c, s) = cs(params.omega_sq(), t);
        let e = (-0.5 * params.gamma() * t).exp();
        let (qs, ps) = self.steady(t);
        (
            qf + e * (-self.c_q * c + self.r_sin_scaled * s) + qs,
            pf + e * (self.s_q_prime * c + self.s_sin_scaled * s) + ps,
        )
    }
}

/// Conic `A q^2 + B q p + C p^2 = 1` traced by the steady orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseGeometry {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub semi_minor: f64,
    pub semi_major: f64,
    pub rotation_rad: f64,
}

impl EllipseGeometry {
    pub fn discriminant(&self) -> f64 {
        4.0 * self.a * self.c - self.b * self.b
    }

    pub fn residual(&self, q: f64, p: f64) -> f64 {
        self.a * q * q + self.b * q * p + self.c * p * p - 1.0
    }
}

/// Steady-state ellipse of harmonic driving.
pub fn steady_ellipse(params: &ModelParams, amp: f64, big_omega: f64) -> Result<EllipseGeometry> {
    let h = harmonic_response(params, amp, big_omega)?;
    ellipse_from_response(&h)
}

/// Conic coefficients from `U = [[c, s], [-s', c']]`.
pub fn ellipse_from_response(h: &HarmonicResponse) -> Result<EllipseGeometry> {
    let (c, s, cp, sp) = (h.c_q, h.s_q, h.c_q_prime, h.s_q_prime);
    let det = c * cp + s * sp;
    let scale = (c * c + s * s).max(cp * cp + sp * sp);
    if !(det.abs() > 1e-14 * scale) || !det.is_finite() {
        return Err(Error::Singular(format!("steady orbit is degenerate: |U| = {det}")));
    }
    let d2 = det * det;
    let a = (cp * cp + sp * sp) / d2;
    let b = 2.0 * (c * sp - s * cp) / d2;
    let cc = (c * c + s * s) / d2;
    let mean = 0.5 * (a + cc);
    let rad = 0.5 * ((a - cc).powi(2) + b * b).sqrt();
    let (lp, lm) = (mean + rad, mean - rad);
    if !(lm > 0.0) {
        return Err(Error::Singular("conic is not an ellipse".into()));
    }
    Ok(EllipseGeometry {
        a,
        b,
        c: cc,
        semi_minor: 1.0 / lp.sqrt(),
        semi_major: 1.0 / lm.sqrt(),
        rotation_rad: 0.5 * b.atan2(a - cc),
    })
}

/// One sampled row of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub q: f64,
    pub p: f64,
    pub mu: f64,
    pub nu: f64,
    pub kappa: f64,
    pub sigma_xx: f64,
    pub sigma_pp: f64,
    pub sigma_xp: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

/// First and second moments at each time, evaluated in parallel.
pub fn trajectory(
    params: &ModelParams,
    initial: &GaussianState,
    force: Option<&ForceModel>,
    times: &[f64],
) -> Result<Vec<TrajectoryRow>> {
    if let Some(f) = force {
        f.validate()?;
    }
    times
        .par_iter()
        .map(|&t| {
            let (q, p) = match force {
                Some(f) => forced_trajectory(params, f, initial.q(), initial.p(), t)?,
                None => free_displacement(params, initial.q(), initial.p(), t)?,
            };
            let c = evolve_covariance(params, initial, t)?;
            let m = c.second_moments();
            Ok(TrajectoryRow {
                t,
                q,
                p,
                mu: c.mu_t,
                nu: c.nu_t,
                kappa: c.kappa_t,
                sigma_xx: m.sxx,
                sigma_pp: m.spp,
                sigma_xp: m.sxp,
                r: c.r_t,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::renormalized_frequency;
    use crate::ode::rk4;
    use crate::propagator::{drift_real, driven_displacement, DriveSpec};
    use proptest::prelude::*;

    fn params(w0: f64, g: f64, t1: f64, t2: f64) -> ModelParams {
        ModelParams::with_nbar(w0, g, t1, t2, 0.0, 0.0, 0.0).unwrap()
    }

    /// RK4 oracle split at breakpoints, impulses applied as jumps.
    fn oracle(p: &ModelParams, f: &ForceModel, q0: f64, p0: f64, t: f64) -> (f64, f64) {
        let a = drift_real(p);
        let mut cuts: Vec<f64> = f.breakpoints().into_iter().filter(|&x| x > 0.0 && x < t).collect();
        cuts.push(t);
        let (jq, jp) = f.jumps_at(0.0);
        let mut y = [q0 + jq, p0 + jp];
        let mut t0 = 0.0;
        for c in cuts {
            y = rk4(
                |s, y: &[f64; 2]| {
                    // Left limit at the segment end, so a step never sees the next plateau.
                    let (lr, li) = f.value(if s >= c { c - 1e-9 * (c - t0) } else { s });
                    [
                        a[0][0] * y[0] + a[0][1] * y[1] + SQRT_2 * li,
                        a[1][0] * y[0] + a[1][1] * y[1] - SQRT_2 * lr,
                    ]
                },
                t0,
                c,
                y,
                1e-4,
            );
            if c < t || (c == t && f.breakpoints().contains(&t)) {
                let (jq, jp) = f.jumps_at(c);
                y = [y[0] + jq, y[1] + jp];
            }
            t0 = c;
        }
        (y[0], y[1])
    }

    #[test]
    fn zero_force_is_free() {
        let p = params(2.0, 1.0, 1.0, 1.0);
        for &t in &[0.0, 0.3, 4.0] {
            assert_eq!(
                forced_trajectory(&p, &ForceModel::zero(), -2.0, 2.0, t).unwrap(),
                free_displacement(&p, -2.0, 2.0, t).unwrap()
            );
        }
    }

    #[test]
    fn constant_force_matches_drive_spec() {
        for &w0 in &[5.0, std::f64::consts::FRAC_1_SQRT_2, 0.6] {
            let p = params(w0, 1.0, 1.0, 1.0);
            let d = DriveSpec::from_target(&p, 2.0, -2.0);
            let lam = d.lambda();
            let f = ForceModel::Constant { lr: lam.re, li: lam.im };
            for &t in &[0.1, 1.0, 3.0, 10.0] {
                let (a, b) = forced_trajectory(&p, &f, 1.0, 1.0, t).unwrap();
                let (c, e) = driven_displacement(&p, &d, 1.0, 1.0, t).unwrap();
                assert!((a - c).abs() < 1e-12 && (b - e).abs() < 1e-12, "{w0} {t}: {a} {c} {b} {e}");
            }
        }
    }

    #[test]
    fn variants_match_rk4() {
        let p = params(1.3, 0.4, 0.3, -0.2);
        let forces = [
            ForceModel::Constant { lr: 0.3, li: -0.7 },
            ForceModel::Impulse { amp_a: 0.5, a_time: 0.6, amp_b: -0.4, b_time: 1.7 },
            ForceModel::Heaviside { amp_a: 0.5, a_time: 0.6, amp_b: -0.4, b_time: 1.7 },
            ForceModel::Harmonic { amp: 0.7, omega: 2.1 },
            ForceModel::Sampled {
                times: (0..=40).map(|i| 0.25 * i as f64).collect(),
                lr_values: (0..=40).map(|i| (0.3 * i as f64).sin()).collect(),
                li_values: (0..=40).map(|i| 0.5 - 0.02 * i as f64).collect(),
            },
        ];
        for f in &forces {
            for &t in &[0.5, 2.5, 6.0] {
                let (a, b) = forced_trajectory(&p, f, 0.3, -0.5, t).unwrap();
                let (c, d) = oracle(&p, f, 0.3, -0.5, t);
                assert!((a - c).abs() < 1e-7 && (b - d).abs() < 1e-7, "{f:?} {t}: {a} {c} {b} {d}");
            }
        }
    }

    #[test]
    fn impulse_jump_law() {
        let p = params(2.0, 1.0, 1.0, 1.0);
        assert!((renormalized_frequency(&p).omega_abs - 1.871).abs() < 1e-3);
        let f = ForceModel::Impulse { amp_a: 2.0, a_time: 0.6, amp_b: 0.7, b_time: 1.1 };
        let eps = 1e-9;
        let before = impulse_trajectory(&p, &f, -2.0, 2.0, 0.6 - eps).unwrap();
        let after = impulse_trajectory(&p, &f, -2.0, 2.0, 0.6).unwrap();
        assert!((after.1 - before.1 + SQRT_2 * 2.0).abs() < 1e-7);
        assert!((after.0 - before.0).abs() < 1e-7);
        let before = impulse_trajectory(&p, &f, -2.0, 2.0, 1.1 - eps).unwrap();
        let after = impulse_trajectory(&p, &f, -2.0, 2.0, 1.1).unwrap();
        assert!((after.0 - before.0 - SQRT_2 * 0.7).abs() < 1e-7);
        assert!((after.1 - before.1).abs() < 1e-7);
        for &t in &[0.0, 0.3, 0.59] {
            assert_eq!(impulse_trajectory(&p, &f, -2.0, 2.0, t).unwrap(), free_displacement(&p, -2.0, 2.0, t).unwrap());
        }
        assert!(impulse_trajectory(&p, &ForceModel::zero(), 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn heaviside_reaches_constant_target() {
        let p = params(2.0, 1.0, 1.0, 1.0);
        let f = ForceModel::Heaviside { amp_a: 0.8, a_time: 0.5, amp_b: -0.3, b_time: 1.0 };
        let (q, pp) = forced_trajectory(&p, &f, -2.0, 2.0, 80.0).unwrap();
        let d = crate::propagator::DriveSpec::from_alpha(&p, SQRT_2 * -0.3, -SQRT_2 * 0.8).unwrap();
        assert!((q - d.target_q).abs() < 1e-12 && (pp - d.target_p).abs() < 1e-12);
    }

    #[test]
    fn harmonic_identities_and_decay() {
        let p = params(2.5, 1.0, 1.0, 1.5);
        assert!((renormalized_frequency(&p).omega_abs - 2.332).abs() < 1e-3);
        let h = harmonic_response(&p, 1.0, 1.0).unwrap();
        assert!((h.r_big - h.c_q.hypot(h.s_q)).abs() < 1e-12);
        assert!((h.s_big - h.c_q_prime.hypot(h.s_q_prime)).abs() < 1e-12);
        assert!((h.r_big * h.phi_q.cos() - h.c_q).abs() < 1e-12);
        assert!((h.r_big * h.phi_q.sin() - h.s_q).abs() < 1e-12);
        assert!((h.s_big * h.phi_p.cos() + h.s_q_prime).abs() < 1e-12);
        let w = renormalized_frequency(&p).omega_abs;
        let rs = h.r_small.unwrap();
        assert!((rs - h.c_q.hypot(h.r_sin_scaled / w)).abs() < 1e-12);
        assert!((h.s_small.unwrap() - h.s_q_prime.hypot(h.s_sin_scaled / w)).abs() < 1e-12);
        let f = ForceModel::Harmonic { amp: 1.0, omega: 1.0 };
        for &t in &[1.0, 4.0, 9.0] {
            let (q, pp) = forced_trajectory(&p, &f, 1.0, 1.0, t).unwrap();
            let (qf, pf) = free_displacement(&p, 1.0, 1.0, t).unwrap();
            let (qs, ps) = h.steady(t);
            let decay = (-0.5 * t).exp();
            assert!((q - qf - qs).abs() <= (rs + 1e-12) * decay * 1.000001);
            assert!((pp - pf - ps).abs() <= h.s_small.unwrap() * decay * 1.000001);
        }
        let ep = params(13f64.sqrt() / 4.0, 1.0, 1.0, 1.5);
        let he = harmonic_response(&ep, 1.0, 1.0).unwrap();
        assert!(he.r_small.is_none() && he.psi_q.is_none());
        let undamped = params(1.0, 0.0, 0.0, 0.0);
        assert!(matches!(harmonic_response(&undamped, 1.0, 1.0), Err(Error::Singular(_))));
    }

    #[test]
    fn ellipse_conic_and_geometry() {
        for &w0 in &[2.5, 13f64.sqrt() / 4.0, 0.8] {
            let p = params(w0, 1.0, 1.0, 1.5);
            let h = harmonic_response(&p, 1.0, 1.0).unwrap();
            let e = ellipse_from_response(&h).unwrap();
            for i in 0..64 {
                let t = 2.0 * PI * i as f64 / 64.0;
                let (q, pp) = h.steady(t);
                assert!(e.residual(q, pp).abs() < 1e-8);
            }
            let u = h.c_q * h.c_q_prime + h.s_q * h.s_q_prime;
            assert!((e.discriminant() - 4.0 / (u * u)).abs() < 1e-10 * e.discriminant());
            assert!(e.semi_minor <= e.semi_major);
            // Rotating back by the angle removes the cross term.
            let (c, s) = (e.rotation_rad.cos(), e.rotation_rad.sin());
            let cross = 2.0 * (e.c - e.a) * s * c + e.b * (c * c - s * s);
            assert!(cross.abs() < 1e-10 * (e.a + e.c));
        }
        let circ = steady_ellipse(&ModelParams::gksl(3.0, 1e-6, 0.0).unwrap(), 1.0, 1.0).unwrap();
        assert!(circ.b.abs() < 1e-5 * circ.a && (circ.a - circ.c).abs() < 1e-5 * circ.a);
    }

    #[test]
    fn phase_wrapping() {
        assert_eq!(wrap_phase(-PI), PI);
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(-0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn validation_and_serde() {
        let f: ForceModel = serde_json::from_str(r#"{"type":"harmonic","R":1.0,"Omega":1.0}"#).unwrap();
        assert_eq!(f, ForceModel::Harmonic { amp: 1.0, omega: 1.0 });
        let f: ForceModel = serde_json::from_str(r#"{"type":"impulse","A":2,"a_time":0.6,"B":0,"b_time":0}"#).unwrap();
        assert!(f.validate().is_ok());
        assert!(ForceModel::Impulse { amp_a: 1.0, a_time: -0.1, amp_b: 0.0, b_time: 0.0 }.validate().is_err());
        assert!(ForceModel::Sampled { times: vec![0.0], lr_values: vec![0.0], li_values: vec![0.0] }.validate().is_err());
        assert!(ForceModel::Sampled { times: vec![0.0, 0.0], lr_values: vec![0.0; 2], li_values: vec![0.0; 2] }.validate().is_err());
        let js = serde_json::to_string(&ForceModel::Constant { lr: 1.0, li: -1.0 }).unwrap();
        assert_eq!(js, r#"{"type":"constant","lr":1.0,"li":-1.0}"#);
    }

    fn smooth_sampled(a: f64, b: f64, c: f64) -> ForceModel {
        let times: Vec<f64> = (0..=50).map(|i| 0.2 * i as f64).collect();
        ForceModel::Sampled {
            lr_values: times.iter().map(|t| a * (b * t).sin()).collect(),
            li_values: times.iter().map(|t| c * (-0.3 * t).exp()).collect(),
            times,
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn superposition(a in -1.0..1.0f64, b in 0.1..2.0f64, c in -1.0..1.0f64, d in -1.0..1.0f64, t in 0.5..9.0f64) {
            let p = params(1.1, 0.6, 0.2, 0.4);
            let f1 = smooth_sampled(a, b, c);
            let f2 = smooth_sampled(d, 0.7, -c);
            let ForceModel::Sampled { times, .. } = &f1 else { unreachable!() };
            let sum = ForceModel::sampled_sum(&f1, &f2, times).unwrap();
            let (q1, p1) = forced_trajectory(&p, &f1, 0.4, -0.2, t).unwrap();
            let (q2, p2) = forced_trajectory(&p, &f2, 0.4, -0.2, t).unwrap();
            let (qs, ps) = forced_trajectory(&p, &sum, 0.4, -0.2, t).unwrap();
            let (qf, pf) = free_displacement(&p, 0.4, -0.2, t).unwrap();
            prop_assert!((qs - (q1 + q2 - qf)).abs() < 1e-7);
            prop_assert!((ps - (p1 + p2 - pf)).abs() < 1e-7);
        }

        #[test]
        fn discriminant_positive(w0 in 0.3..4.0f64, g in 0.1..2.0f64, t1 in -1.0..1.0f64, t2 in -1.0..1.0f64, om in 0.1..4.0f64) {
            let p = params(w0, g, t1, t2);
            prop_assume!(renormalized_frequency(&p).regime != crate::model::Regime::Unstable);
            let e = steady_ellipse(&p, 1.0, om).unwrap();
            prop_assert!(e.discriminant() > 0.0);
        }

        #[test]
        fn eta_does_not_enter(e0 in -3.0..-0.5f64, e1 in -0.4..0.4f64, t in 0.0..8.0f64) {
            let p = params(1.4, 0.5, 0.3, 0.1);
            let other = p.with_eta(e0, e1, 0.1).unwrap();
            let f = ForceModel::Harmonic { amp: 0.4, omega: 1.2 };
            prop_assert_eq!(forced_trajectory(&p, &f, 1.0, 0.0, t).unwrap(), forced_trajectory(&other, &f, 1.0, 0.0, t).unwrap());
        }
    }
}
