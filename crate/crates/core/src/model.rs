//! Liouvillian coefficients, the renormalized frequency, damping regimes and
//! the indefinite-metric three-vectors used by the covariance solutions.
//!
//! The generator is
//! `L0 rho = -i[H0, rho] - (eta0 - gamma)/2 L rho - (eta0 + gamma)/2 R rho - chi V rho - chi* Vdag rho`
//! with `H0 = omega0 a^dag a + (i/2)(xi* a a - xi a^dag a^dag)`, `xi = (theta2 + i theta1)/2`
//! and `chi = (eta1 + i eta2)/2`.
//!
//! The coefficient `theta0` appearing in the closed forms is identified with
//! `2 omega0`, the coefficient of the rotation generator `iL0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Coefficients of the generic quadratic Liouvillian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    omega0: f64,
    gamma: f64,
    theta1: f64,
    theta2: f64,
    eta0: f64,
    eta1: f64,
    eta2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    omega0: f64,
    gamma: f64,
    #[serde(default)]
    theta1: f64,
    #[serde(default)]
    theta2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nbar: Option<f64>,
    #[serde(default)]
    eta1: f64,
    #[serde(default)]
    eta2: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        match (r.eta0, r.nbar) {
            (Some(eta0), None) => {
                ModelParams::new(r.omega0, r.gamma, r.theta1, r.theta2, eta0, r.eta1, r.eta2)
            }
            (None, Some(nbar)) => {
                ModelParams::with_nbar(r.omega0, r.gamma, r.theta1, r.theta2, nbar, r.eta1, r.eta2)
            }
            (Some(_), Some(_)) => Err(Error::InvalidParameter(
                "give either eta0 or nbar, not both".into(),
            )),
            (None, None) => Err(Error::InvalidParameter("missing eta0 or nbar".into())),
        }
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            omega0: p.omega0,
            gamma: p.gamma,
            theta1: p.theta1,
            theta2: p.theta2,
            eta0: Some(p.eta0),
            nbar: None,
            eta1: p.eta1,
            eta2: p.eta2,
        }
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

impl ModelParams {
    /// Builds a parameter set; requires `omega0 > 0`, `gamma >= 0` and finite values.
    pub fn new(
        omega0: f64,
        gamma: f64,
        theta1: f64,
        theta2: f64,
        eta0: f64,
        eta1: f64,
        eta2: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("omega0", omega0),
            ("gamma", gamma),
            ("theta1", theta1),
            ("theta2", theta2),
            ("eta0", eta0),
            ("eta1", eta1),
            ("eta2", eta2),
        ] {
            check_finite(name, v)?;
        }
        if omega0 <= 0.0 {
            return Err(Error::InvalidParameter(format!("omega0 must be > 0, got {omega0}")));
        }
        if gamma < 0.0 {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
        }
        Ok(ModelParams { omega0, gamma, theta1, theta2, eta0, eta1, eta2 })
    }

    /// Builds a parameter set from the bath occupation, `eta0 = -gamma (2 nbar + 1)`.
    pub fn with_nbar(
        omega0: f64,
        gamma: f64,
        theta1: f64,
        theta2: f64,
        nbar: f64,
        eta1: f64,
        eta2: f64,
    ) -> Result<Self> {
        check_finite("nbar", nbar)?;
        if nbar < 0.0 {
            return Err(Error::InvalidParameter(format!("nbar must be >= 0, got {nbar}")));
        }
        Self::new(omega0, gamma, theta1, theta2, -gamma * (2.0 * nbar + 1.0), eta1, eta2)
    }

    /// Standard Lindblad damping with no squeezing and no fast-rotating terms.
    pub fn gksl(omega0: f64, gamma: f64, nbar: f64) -> Result<Self> {
        Self::with_nbar(omega0, gamma, 0.0, 0.0, nbar, 0.0, 0.0)
    }

    /// Copy with replaced diffusion coefficients.
    pub fn with_eta(&self, eta0: f64, eta1: f64, eta2: f64) -> Result<Self> {
        Self::new(self.omega0, self.gamma, self.theta1, self.theta2, eta0, eta1, eta2)
    }

    /// Copy with replaced squeezing coefficients.
    pub fn with_theta(&self, theta1: f64, theta2: f64) -> Result<Self> {
        Self::new(self.omega0, self.gamma, theta1, theta2, self.eta0, self.eta1, self.eta2)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn theta1(&self) -> f64 {
        self.theta1
    }
    pub fn theta2(&self) -> f64 {
        self.theta2
    }
    pub fn eta0(&self) -> f64 {
        self.eta0
    }
    pub fn eta1(&self) -> f64 {
        self.eta1
    }
    pub fn eta2(&self) -> f64 {
        self.eta2
    }

    /// `theta0 = 2 omega0`, the rotation coefficient.
    pub fn theta0(&self) -> f64 {
        2.0 * self.omega0
    }

    /// Bath occupation implied by `eta0`, `(-eta0/gamma - 1)/2`; `None` when `gamma = 0`.
    pub fn nbar(&self) -> Option<f64> {
        (self.gamma > 0.0).then(|| 0.5 * (-self.eta0 / self.gamma - 1.0))
    }

    /// `theta = (theta0, theta1, theta2)`.
    pub fn theta_vec(&self) -> ThreeVector {
        ThreeVector::new(self.theta0(), self.theta1, self.theta2)
    }

    /// `eta = (eta0, eta1, eta2)`.
    pub fn eta_vec(&self) -> ThreeVector {
        ThreeVector::new(self.eta0, self.eta1, self.eta2)
    }

    /// Squeezing coefficient `xi = (theta2 + i theta1)/2`.
    pub fn xi(&self) -> Complex64 {
        Complex64::new(0.5 * self.theta2, 0.5 * self.theta1)
    }

    /// Fast-rotating coefficient `chi = (eta1 + i eta2)/2`.
    pub fn chi(&self) -> Complex64 {
        Complex64::new(0.5 * self.eta1, 0.5 * self.eta2)
    }

    /// `omega^2 = omega0^2 - theta1^2/4 - theta2^2/4`.
    pub fn omega_sq(&self) -> f64 {
        self.omega0 * self.omega0 - 0.25 * (self.theta1 * self.theta1 + self.theta2 * self.theta2)
    }

    /// Tolerance on `omega^2` below which the parameters are treated as an exceptional point.
    pub fn ep_tolerance(&self) -> f64 {
        1e-9 * (self.omega0 * self.omega0).max(self.gamma * self.gamma).max(1.0)
    }

    /// True when the Kossakowski matrix of the dissipator is positive semidefinite,
    /// i.e. the generator is of Lindblad form: `eta0 <= -gamma` and
    /// `eta0^2 >= gamma^2 + eta1^2 + eta2^2`.
    pub fn is_completely_positive(&self) -> bool {
        self.eta0 <= -self.gamma
            && self.eta0 * self.eta0
                >= self.gamma * self.gamma + self.eta1 * self.eta1 + self.eta2 * self.eta2
    }
}

/// Damping regime of the first moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
    Unstable,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Underdamped => "underdamped",
            Regime::Critical => "critical",
            Regime::Overdamped => "overdamped",
            Regime::Unstable => "unstable",
        }
    }
}

/// Renormalized frequency and regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralInfo {
    pub omega_sq: f64,
    pub omega_abs: f64,
    pub regime: Regime,
}

impl SpectralInfo {
    /// `omega` as a complex number, `i |omega|` when `omega^2 < 0`.
    pub fn omega(&self) -> Complex64 {
        if self.omega_sq >= 0.0 {
            Complex64::new(self.omega_abs, 0.0)
        } else {
            Complex64::new(0.0, self.omega_abs)
        }
    }
}

/// Computes `omega^2`, `|omega|` and the damping regime.
pub fn renormalized_frequency(params: &ModelParams) -> SpectralInfo {
    let omega_sq = params.omega_sq();
    let omega_abs = omega_sq.abs().sqrt();
    let half_gamma = 0.5 * params.gamma;
    let regime = if omega_sq.abs() <= params.ep_tolerance() {
        Regime::Critical
    } else if omega_sq > 0.0 {
        Regime::Underdamped
    } else if omega_abs >= half_gamma {
        Regime::Unstable
    } else {
        Regime::Overdamped
    };
    SpectralInfo { omega_sq, omega_abs, regime }
}

/// Branch selector for the Liouvillian eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Eigenvalue `+- i n omega - (m - n/2) gamma` of the generator, `0 <= n <= m`.
pub fn liouvillian_eigenvalue(params: &ModelParams, m: u32, n: u32, sign: Sign) -> Result<Complex64> {
    if n > m {
        return Err(Error::InvalidParameter(format!("need 0 <= n <= m, got m = {m}, n = {n}")));
    }
    let info = renormalized_frequency(params);
    // Inside the exceptional-point tolerance the branches coalesce exactly.
    let omega = if info.regime == Regime::Critical { Complex64::new(0.0, 0.0) } else { info.omega() };
    let s = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    let rot = Complex64::i() * omega * (s * n as f64);
    Ok(rot - Complex64::new((m as f64 - 0.5 * n as f64) * params.gamma, 0.0))
}

/// `theta1^2 + theta2^2 - 4 omega0^2`, zero on the exceptional-point manifold.
pub fn ep_defect(params: &ModelParams) -> f64 {
    params.theta1 * params.theta1 + params.theta2 * params.theta2
        - 4.0 * params.omega0 * params.omega0
}

/// Effective mass `m / (1 - theta1/(2 omega0))` and frequency `sqrt(omega0^2 - theta1^2/4)`.
///
/// The frequency is returned as `sqrt(max(0, .))`; it is zero at and beyond `|theta1| = 2 omega0`.
pub fn effective_mass_frequency(params: &ModelParams, m_bare: f64) -> Result<(f64, f64)> {
    if !(m_bare > 0.0 && m_bare.is_finite()) {
        return Err(Error::InvalidParameter(format!("bare mass must be > 0, got {m_bare}")));
    }
    let denom = 1.0 - params.theta1 / (2.0 * params.omega0);
    if denom.abs() <= f64::EPSILON * 4.0 {
        return Err(Error::Singular("effective mass pole at theta1 = 2 omega0".into()));
    }
    let w2 = params.omega0 * params.omega0 - 0.25 * params.theta1 * params.theta1;
    Ok((m_bare / denom, w2.max(0.0).sqrt()))
}

/// Three-vector with metric signature `(-, +, +)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct ThreeVector {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl From<[f64; 3]> for ThreeVector {
    fn from(a: [f64; 3]) -> Self {
        ThreeVector::new(a[0], a[1], a[2])
    }
}

impl From<ThreeVector> for [f64; 3] {
    fn from(v: ThreeVector) -> Self {
        [v.c0, v.c1, v.c2]
    }
}

impl ThreeVector {
    pub const E0: ThreeVector = ThreeVector { c0: 1.0, c1: 0.0, c2: 0.0 };
    pub const E1: ThreeVector = ThreeVector { c0: 0.0, c1: 1.0, c2: 0.0 };
    pub const E2: ThreeVector = ThreeVector { c0: 0.0, c1: 0.0, c2: 1.0 };

    pub const fn new(c0: f64, c1: f64, c2: f64) -> Self {
        ThreeVector { c0, c1, c2 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `-v0 w0 + v1 w1 + v2 w2`.
    pub fn dot(&self, w: &ThreeVector) -> f64 {
        -self.c0 * w.c0 + self.c1 * w.c1 + self.c2 * w.c2
    }

    /// Bilinear antisymmetric product with `e0^e1 = -e2`, `e1^e2 = e0`, `e2^e0 = -e1`.
    pub fn wedge(&self, w: &ThreeVector) -> ThreeVector {
        ThreeVector {
            c0: self.c1 * w.c2 - self.c2 * w.c1,
            c1: self.c0 * w.c2 - self.c2 * w.c0,
            c2: self.c1 * w.c0 - self.c0 * w.c1,
        }
    }

    /// `v . v` in the indefinite metric.
    pub fn square(&self) -> f64 {
        self.dot(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.c0.abs().max(self.c1.abs()).max(self.c2.abs())
    }
}

/// Free-function form of [`ThreeVector::dot`].
pub fn dot(v: &ThreeVector, w: &ThreeVector) -> f64 {
    v.dot(w)
}

/// Free-function form of [`ThreeVector::wedge`].
pub fn wedge(v: &ThreeVector, w: &ThreeVector) -> ThreeVector {
    v.wedge(w)
}

impl Add for ThreeVector {
    type Output = ThreeVector;
    fn add(self, o: ThreeVector) -> ThreeVector {
        ThreeVector::new(self.c0 + o.c0, self.c1 + o.c1, self.c2 + o.c2)
    }
}

impl Sub for ThreeVector {
    type Output = ThreeVector;
    fn sub(self, o: ThreeVector) -> ThreeVector {
        ThreeVector::new(self.c0 - o.c0, self.c1 - o.c1, self.c2 - o.c2)
    }
}

impl Neg for ThreeVector {
    type Output = ThreeVector;
    fn neg(self) -> ThreeVector {
        ThreeVector::new(-self.c0, -self.c1, -self.c2)
    }
}

impl Mul<ThreeVector> for f64 {
    type Output = ThreeVector;
    fn mul(self, v: ThreeVector) -> ThreeVector {
        ThreeVector::new(self * v.c0, self * v.c1, self * v.c2)
    }
}
