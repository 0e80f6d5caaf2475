//! Time evolution of truncated densities under a superoperator, optionally with a linear drive.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use super::density::{FockDensity, TAIL_ABORT, TAIL_LEVELS};
use super::superop::{displacement, liouvillian, parity_indices, SuperOp};
use crate::driving::ForceModel;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::ode::{dopri5, Dopri5Options};

/// Trace drift that is silently renormalized; larger drifts are errors.
pub const TRACE_DRIFT_TOLERANCE: f64 = 1e-9;
/// Longest stretch integrated between truncation checks.
pub const CHECK_INTERVAL: f64 = 0.5;

/// Integration path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolveMethod {
    /// Adaptive Dormand-Prince integration of the vectorized equation.
    RungeKutta,
    /// Dense eigendecomposition of the superoperator.
    Spectral,
    /// Runge-Kutta up to `20/gamma`, spectral beyond.
    Auto,
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub method: EvolveMethod,
    pub rtol: f64,
    pub atol: f64,
    /// Decay rate used by [`EvolveMethod::Auto`] to pick the path.
    pub gamma: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { method: EvolveMethod::Auto, rtol: 1e-10, atol: 1e-12, gamma: 0.0 }
    }
}

impl EvolveOptions {
    fn ode(&self) -> Dopri5Options {
        Dopri5Options { rtol: self.rtol, atol: self.atol, ..Dopri5Options::default() }
    }

    fn spectral_for(&self, t: f64) -> bool {
        match self.method {
            EvolveMethod::RungeKutta => false,
            EvolveMethod::Spectral => true,
            EvolveMethod::Auto => self.gamma > 0.0 && t > 20.0 / self.gamma,
        }
    }
}

/// Right-hand side `L rho + D(w(t)) rho` with `w = -i lambda(t)`.
struct Generator<'a> {
    base: &'a SuperOp,
    drive: Option<&'a ForceModel>,
}

impl Generator<'_> {
    fn eval(&self, t: f64, x: &[Complex64], dx: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        dx.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        self.base.apply_add(x, dx, scratch);
        if let Some(force) = self.drive {
            let (lr, li) = force.value(t);
            if li != 0.0 || lr != 0.0 {
                displacement(Complex64::new(li, -lr), self.base.dim()).apply_add(x, dx, scratch);
            }
        }
    }
}

fn tail_of(x: &[Complex64], n: usize) -> f64 {
    (n.saturating_sub(TAIL_LEVELS)..n).map(|m| x[m + n * m].re.abs()).sum()
}

fn integrate(g: &Generator, x: &mut [Complex64], t0: f64, t1: f64, n: usize, opts: &EvolveOptions) -> Result<()> {
    let mut scratch = Vec::new();
    let mut t = t0;
    while t < t1 {
        let next = (t + CHECK_INTERVAL).min(t1);
        // Stages at the chunk end see the left limit of a piecewise force.
        let left = next - 1e-9 * (next - t);
        dopri5(|s, y, dy| g.eval(s.min(left), y, dy, &mut scratch), t, next, x, &opts.ode())?;
        t = next;
        let tail = tail_of(x, n);
        if !(tail <= TAIL_ABORT) {
            return Err(Error::Truncation(format!(
                "population {tail:e} reached the top {TAIL_LEVELS} levels of cutoff {n} at t = {t}"
            )));
        }
    }
    Ok(())
}

fn finish(n: usize, x: Vec<Complex64>) -> Result<FockDensity> {
    let mut rho = FockDensity::from_vec_unchecked(n, x)?;
    let drift = (rho.trace() - 1.0).norm();
    if drift > TRACE_DRIFT_TOLERANCE {
        return Err(Error::Integration(format!("trace drifted by {drift:e} during evolution")));
    }
    rho.normalize();
    Ok(rho)
}

/// `e^{t S} rho0` with the default options; trace drift below `1e-9` is renormalized.
pub fn evolve_density(superop: &SuperOp, rho0: &FockDensity, t: f64) -> Result<FockDensity> {
    evolve_density_with(superop, rho0, t, &EvolveOptions::default())
}

/// `e^{t S} rho0` along the chosen path.
pub fn evolve_density_with(superop: &SuperOp, rho0: &FockDensity, t: f64, opts: &EvolveOptions) -> Result<FockDensity> {
    check_inputs(superop, rho0, t)?;
    let n = rho0.cutoff();
    let x = if opts.spectral_for(t) {
        spectral_apply(superop, rho0.as_slice(), t)?
    } else {
        let mut x = rho0.as_slice().to_vec();
        integrate(&Generator { base: superop, drive: None }, &mut x, 0.0, t, n, opts)?;
        x
    };
    finish(n, x)
}

/// Densities at each of the ascending `times` under `S`.
pub fn evolve_density_times(superop: &SuperOp, rho0: &FockDensity, times: &[f64]) -> Result<Vec<FockDensity>> {
    check_inputs(superop, rho0, 0.0)?;
    check_times(times)?;
    let n = rho0.cutoff();
    let opts = EvolveOptions { method: EvolveMethod::RungeKutta, ..EvolveOptions::default() };
    let g = Generator { base: superop, drive: None };
    let mut x = rho0.as_slice().to_vec();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &ti in times {
        integrate(&g, &mut x, t, ti, n, &opts)?;
        t = ti;
        out.push(finish(n, x.clone())?);
    }
    Ok(out)
}

/// Densities at the ascending `times` under `L_0` plus the drive `lambda(t) a^dag + lambda*(t) a`.
///
/// Impulses act as the unitary displacements `e^{D(z)}` at their event times; the state is
/// right-continuous.
pub fn evolve_driven(
    params: &ModelParams,
    force: &ForceModel,
    rho0: &FockDensity,
    times: &[f64],
) -> Result<Vec<FockDensity>> {
    force.validate()?;
    check_times(times)?;
    let n = rho0.cutoff();
    let l0 = liouvillian(params, n);
    check_inputs(&l0, rho0, 0.0)?;
    let opts = EvolveOptions { method: EvolveMethod::RungeKutta, ..EvolveOptions::default() };
    let g = Generator { base: &l0, drive: Some(force) };

    let t_end = times.last().copied().unwrap_or(0.0);
    let mut events: Vec<f64> = force.breakpoints().into_iter().filter(|&b| b >= 0.0 && b <= t_end).collect();
    events.extend_from_slice(times);
    events.sort_by(f64::total_cmp);
    events.dedup();

    let mut x = rho0.as_slice().to_vec();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    let mut next_output = 0;
    for &e in &events {
        integrate(&g, &mut x, t, e, n, &opts)?;
        t = e;
        let (dq, dp) = force.jumps_at(e);
        if dq != 0.0 || dp != 0.0 {
            let z = Complex64::new(dq, dp) / std::f64::consts::SQRT_2;
            x = exp_apply(&displacement(z, n), &x, 1.0)?;
            let tail = tail_of(&x, n);
            if tail > TAIL_ABORT {
                return Err(Error::Truncation(format!("impulse at t = {e} pushed population {tail:e} to the cutoff")));
            }
        }
        while next_output < times.len() && times[next_output] == e {
            out.push(finish(n, x.clone())?);
            next_output += 1;
        }
    }
    Ok(out)
}

/// `e^{s S} x` by adaptive integration, with no trace or truncation policy.
pub fn exp_apply(superop: &SuperOp, x: &[Complex64], s: f64) -> Result<Vec<Complex64>> {
    let mut y = x.to_vec();
    if s == 0.0 {
        return Ok(y);
    }
    let (op, span) = if s < 0.0 { (superop.scale_re(-1.0), -s) } else { (superop.clone(), s) };
    let mut scratch = Vec::new();
    let opts = Dopri5Options { rtol: 1e-12, atol: 1e-14, ..Dopri5Options::default() };
    dopri5(
        |_, y, dy| {
            dy.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            op.apply_add(y, dy, &mut scratch);
        },
        0.0,
        span,
        &mut y,
        &opts,
    )?;
    Ok(y)
}

/// `e^{t S} x` through the eigendecomposition of `S`, block by block when `S` preserves parity.
pub fn spectral_apply(superop: &SuperOp, x: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    let n = superop.dim();
    let blocks: Vec<Vec<usize>> = if superop.preserves_parity() {
        vec![parity_indices(n, 0), parity_indices(n, 1)]
    } else {
        vec![(0..n * n).collect()]
    };
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for idx in blocks {
        if idx.iter().all(|&i| x[i] == Complex64::new(0.0, 0.0)) {
            continue;
        }
        let m = superop.matrix_on(&idx);
        let eig = m.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let u = eig.U();
        let s = eig.S().column_vector();
        let rhs = Mat::<Complex64>::from_fn(idx.len(), 1, |i, _| x[idx[i]]);
        let coef = u.partial_piv_lu().solve(&rhs);
        let scaled = Mat::<Complex64>::from_fn(idx.len(), 1, |i, _| coef[(i, 0)] * (s[i] * t).exp());
        let y = u * &scaled;
        for (k, &i) in idx.iter().enumerate() {
            out[i] = y[(k, 0)];
        }
    }
    Ok(out)
}

/// Stationary density of `S`: the null vector normalized to unit trace, by an LU solve in
/// which one equation is replaced by the trace condition.
pub fn stationary_density(superop: &SuperOp) -> Result<FockDensity> {
    let n = superop.dim();
    let idx = if superop.preserves_parity() { parity_indices(n, 0) } else { (0..n * n).collect() };
    let mut m = superop.matrix_on(&idx);
    let dim = idx.len();
    // Row of <0|.|0>, which is index 0 in either layout, carries the trace functional.
    for (k, &i) in idx.iter().enumerate() {
        let (row, col) = (i % n, i / n);
        m[(0, k)] = if row == col { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let mut rhs = Mat::<Complex64>::zeros(dim, 1);
    rhs[(0, 0)] = Complex64::new(1.0, 0.0);
    let sol = m.partial_piv_lu().solve(&rhs);
    if !(0..dim).all(|k| sol[(k, 0)].re.is_finite() && sol[(k, 0)].im.is_finite()) {
        return Err(Error::Singular("stationary system is singular".into()));
    }
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for (k, &i) in idx.iter().enumerate() {
        data[i] = sol[(k, 0)];
    }
    let mut rho = FockDensity::from_vec_unchecked(n, data)?;
    rho.symmetrize();
    rho.normalize();
    Ok(rho)
}

fn check_inputs(superop: &SuperOp, rho0: &FockDensity, t: f64) -> Result<()> {
    if superop.dim() != rho0.cutoff() {
        return Err(Error::InvalidParameter(format!(
            "superoperator cutoff {} does not match density cutoff {}",
            superop.dim(),
            rho0.cutoff()
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("evolution time must be finite and >= 0, got {t}")));
    }
    rho0.validate()
}

fn check_times(times: &[f64]) -> Result<()> {
    if !times.iter().all(|t| t.is_finite() && *t >= 0.0) || !times.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter("output times must be finite, >= 0 and strictly ascending".into()));
    }
    Ok(())
}
