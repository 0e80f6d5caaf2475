//! Displaced Gaussian mixed states in the `(mu, nu, kappa, q, p)` parametrization.
//!
//! The position kernel is
//! `<x|rho|y> = e^{i p r} sqrt(2 mu/pi) exp(-2 mu (Q-q)^2 - i kappa (Q-q) r - (mu+nu) r^2/2)`
//! with `Q = (x+y)/2` and `r = x - y`, in dimensionless coordinates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Displaced Gaussian state; `mu > 0`, `nu >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct GaussianState {
    mu: f64,
    nu: f64,
    kappa: f64,
    q: f64,
    p: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    mu: f64,
    nu: f64,
    #[serde(default)]
    kappa: f64,
    #[serde(default)]
    q: f64,
    #[serde(default)]
    p: f64,
}

impl TryFrom<RawState> for GaussianState {
    type Error = Error;
    fn try_from(r: RawState) -> Result<Self> {
        GaussianState::new(r.mu, r.nu, r.kappa, r.q, r.p)
    }
}

impl From<GaussianState> for RawState {
    fn from(s: GaussianState) -> Self {
        RawState { mu: s.mu, nu: s.nu, kappa: s.kappa, q: s.q, p: s.p }
    }
}

/// Covariances `sigma_xx`, `sigma_pp`, `sigma_xp` (symmetrized).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondMoments {
    pub sxx: f64,
    pub spp: f64,
    pub sxp: f64,
}

impl SecondMoments {
    /// `sxx spp - sxp^2`.
    pub fn det(&self) -> f64 {
        self.sxx * self.spp - self.sxp * self.sxp
    }

    pub fn max_abs_diff(&self, o: &SecondMoments) -> f64 {
        (self.sxx - o.sxx).abs().max((self.spp - o.spp).abs()).max((self.sxp - o.sxp).abs())
    }
}

impl GaussianState {
    /// Validating constructor; rejects `mu <= 0`, `nu < 0` and non-finite values.
    pub fn new(mu: f64, nu: f64, kappa: f64, q: f64, p: f64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("nu", nu), ("kappa", kappa), ("q", q), ("p", p)] {
            if !v.is_finite() {
                return Err(Error::InvalidState(format!("{name} must be finite, got {v}")));
            }
        }
        if mu <= 0.0 {
            return Err(Error::InvalidState(format!("mu must be > 0, got {mu}")));
        }
        if nu < 0.0 {
            return Err(Error::InvalidState(format!("nu must be >= 0, got {nu}")));
        }
        Ok(GaussianState { mu, nu, kappa, q, p })
    }

    /// Ground state of the oscillator.
    pub fn vacuum() -> Self {
        GaussianState { mu: 0.5, nu: 0.0, kappa: 0.0, q: 0.0, p: 0.0 }
    }

    /// Coherent state centred at `(q, p)`.
    pub fn coherent(q: f64, p: f64) -> Result<Self> {
        Self::new(0.5, 0.0, 0.0, q, p)
    }

    /// Thermal state with occupation `nbar`, `sigma_xx = sigma_pp = nbar + 1/2`.
    pub fn thermal(nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0) {
            return Err(Error::InvalidState(format!("nbar must be >= 0, got {nbar}")));
        }
        Self::from_second_moments(
            &SecondMoments { sxx: nbar + 0.5, spp: nbar + 0.5, sxp: 0.0 },
            0.0,
            0.0,
        )
    }

    /// Inverts [`GaussianState::second_moments`]; needs `sxx > 0` and `sxx spp - sxp^2 >= 1/4`.
    pub fn from_second_moments(m: &SecondMoments, q: f64, p: f64) -> Result<Self> {
        if !(m.sxx > 0.0) {
            return Err(Error::InvalidState(format!("sigma_xx must be > 0, got {}", m.sxx)));
        }
        let mu = 1.0 / (4.0 * m.sxx);
        let kappa = -m.sxp / m.sxx;
        let delta_sq = 4.0 * mu * m.spp;
        let nu = (delta_sq - kappa * kappa) / (4.0 * mu) - mu;
        let nu = if (-1e-12..0.0).contains(&nu) { 0.0 } else { nu };
        Self::new(mu, nu, kappa, q, p)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Copy with replaced first moments.
    pub fn with_displacement(&self, q: f64, p: f64) -> Result<Self> {
        Self::new(self.mu, self.nu, self.kappa, q, p)
    }

    /// `Delta^2 = 4 mu (mu + nu) + kappa^2`.
    pub fn delta_sq(&self) -> f64 {
        4.0 * self.mu * (self.mu + self.nu) + self.kappa * self.kappa
    }

    /// Complex displacement `z = (q + i p)/sqrt(2)`.
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.q, self.p) / 2f64.sqrt()
    }

    pub fn is_pure(&self) -> bool {
        self.nu == 0.0
    }

    /// `sigma_xx = 1/(4 mu)`, `sigma_pp = Delta^2/(4 mu)`, `sigma_xp = -kappa/(4 mu)`.
    pub fn second_moments(&self) -> SecondMoments {
        let d = 4.0 * self.mu;
        SecondMoments { sxx: 1.0 / d, spp: self.delta_sq() / d, sxp: -self.kappa / d }
    }

    /// Position kernel `<Q + r/2| rho |Q - r/2>`.
    pub fn density_kernel(&self, big_q: f64, r: f64) -> Complex64 {
        let dq = big_q - self.q;
        let re = -2.0 * self.mu * dq * dq - 0.5 * (self.mu + self.nu) * r * r;
        let im = self.p * r - self.kappa * dq * r;
        (2.0 * self.mu / PI).sqrt() * Complex64::new(re, im).exp()
    }

    /// Wigner function at `(Q, P)`.
    pub fn wigner(&self, big_q: f64, big_p: f64) -> f64 {
        let dq = big_q - self.q;
        let dp = big_p - self.p;
        let s = self.mu + self.nu;
        let quad = self.delta_sq() * dq * dq + 2.0 * self.kappa * dq * dp + dp * dp;
        (self.mu / s).sqrt() / PI * (-quad / (2.0 * s)).exp()
    }

    /// Applies the displacement `(dq, dp)`; the second moments are unchanged.
    pub fn displace(&self, dq: f64, dp: f64) -> Result<Self> {
        self.with_displacement(self.q + dq, self.p + dp)
    }

    /// Mean occupation `<a^dag a>`.
    pub fn mean_occupation(&self) -> f64 {
        let m = self.second_moments();
        0.5 * (m.sxx + m.spp + self.q * self.q + self.p * self.p) - 0.5
    }

    /// Variance of the occupation number, `tr(V^2)/2 - 1/4 + d^T V d`.
    pub fn occupation_variance(&self) -> f64 {
        let m = self.second_moments();
        let tr_v2 = m.sxx * m.sxx + m.spp * m.spp + 2.0 * m.sxp * m.sxp;
        let dvd = m.sxx * self.q * self.q + 2.0 * m.sxp * self.q * self.p + m.spp * self.p * self.p;
        (0.5 * tr_v2 - 0.25 + dvd).max(0.0)
    }
}

/// Rectangular phase-space grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub q_min: f64,
    pub q_max: f64,
    pub n_q: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub n_p: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.q_min, self.q_max, self.p_min, self.p_max].iter().all(|v| v.is_finite());
        if !finite || self.q_max <= self.q_min || self.p_max <= self.p_min || self.n_q < 2 || self.n_p < 2 {
            return Err(Error::Config(format!("invalid grid {self:?}")));
        }
        Ok(())
    }

    pub fn q_at(&self, i: usize) -> f64 {
        self.q_min + (self.q_max - self.q_min) * i as f64 / (self.n_q - 1) as f64
    }

    pub fn p_at(&self, j: usize) -> f64 {
        self.p_min + (self.p_max - self.p_min) * j as f64 / (self.n_p - 1) as f64
    }
}

/// Wigner values in row-major order over `(Q, P)`, `Q` outer.
pub fn wigner_grid(s: &GaussianState, grid: &GridSpec) -> Result<Vec<(f64, f64, f64)>> {
    grid.validate()?;
    let mut out = Vec::with_capacity(grid.n_q * grid.n_p);
    for i in 0..grid.n_q {
        let qv = grid.q_at(i);
        for j in 0..grid.n_p {
            let pv = grid.p_at(j);
            out.push((qv, pv, s.wigner(qv, pv)));
        }
    }
    Ok(out)
}

/// Trapezoidal integral of a Wigner grid.
pub fn grid_integral(grid: &GridSpec, values: &[(f64, f64, f64)]) -> f64 {
    let hq = (grid.q_max - grid.q_min) / (grid.n_q - 1) as f64;
    let hp = (grid.p_max - grid.p_min) / (grid.n_p - 1) as f64;
    let mut sum = 0.0;
    for i in 0..grid.n_q {
        let wi = if i == 0 || i == grid.n_q - 1 { 0.5 } else { 1.0 };
        for j in 0..grid.n_p {
            let wj = if j == 0 || j == grid.n_p - 1 { 0.5 } else { 1.0 };
            sum += wi * wj * values[i * grid.n_p + j].2;
        }
    }
    sum * hq * hp
}
