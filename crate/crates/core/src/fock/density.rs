//! Density matrices in a truncated number basis and their conversion from Gaussian states.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use super::ops::SparseOp;
use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, SecondMoments};
use crate::quadrature::GaussHermite;

/// Largest supported cutoff.
pub const MAX_CUTOFF: usize = 64;
/// Allowed population above index `cutoff - 4`.
pub const TAIL_TOLERANCE: f64 = 1e-8;
/// Tail population that aborts an evolution.
pub const TAIL_ABORT: f64 = 1e-6;
/// Hermiticity tolerance of a valid density.
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;
/// Trace tolerance of a valid density.
pub const TRACE_TOLERANCE: f64 = 1e-10;
/// Number of highest levels counted as the tail.
pub const TAIL_LEVELS: usize = 4;

/// `<m|rho|n>` stored column-stacked at index `m + cutoff n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    cutoff: usize,
    data: Vec<Complex64>,
}

/// First and second moments of a density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockMoments {
    pub q: f64,
    pub p: f64,
    pub sxx: f64,
    pub spp: f64,
    pub sxp: f64,
}

impl FockMoments {
    pub fn second_moments(&self) -> SecondMoments {
        SecondMoments { sxx: self.sxx, spp: self.spp, sxp: self.sxp }
    }
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if !(2..=MAX_CUTOFF).contains(&cutoff) {
        return Err(Error::InvalidParameter(format!("cutoff must be in 2..={MAX_CUTOFF}, got {cutoff}")));
    }
    Ok(())
}

impl FockDensity {
    /// Wraps column-stacked data without checking the density invariants.
    pub fn from_vec_unchecked(cutoff: usize, data: Vec<Complex64>) -> Result<Self> {
        check_cutoff(cutoff)?;
        if data.len() != cutoff * cutoff {
            return Err(Error::InvalidState(format!(
                "density data has {} entries, expected {}",
                data.len(),
                cutoff * cutoff
            )));
        }
        Ok(FockDensity { cutoff, data })
    }

    /// Wraps column-stacked data and checks hermiticity, trace and tail mass.
    pub fn from_vec(cutoff: usize, data: Vec<Complex64>) -> Result<Self> {
        let d = Self::from_vec_unchecked(cutoff, data)?;
        d.validate()?;
        Ok(d)
    }

    /// Pure number state `|k><k|`.
    pub fn number_state(cutoff: usize, k: usize) -> Result<Self> {
        check_cutoff(cutoff)?;
        if k >= cutoff {
            return Err(Error::InvalidState(format!("level {k} outside cutoff {cutoff}")));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); cutoff * cutoff];
        data[k + cutoff * k] = Complex64::new(1.0, 0.0);
        Ok(FockDensity { cutoff, data })
    }

    /// Thermal populations `nbar^m/(nbar+1)^{m+1}` on the diagonal.
    pub fn thermal(cutoff: usize, nbar: f64) -> Result<Self> {
        check_cutoff(cutoff)?;
        if !(nbar >= 0.0) {
            return Err(Error::InvalidState(format!("nbar must be >= 0, got {nbar}")));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); cutoff * cutoff];
        let ratio = nbar / (nbar + 1.0);
        let mut pop = 1.0 / (nbar + 1.0);
        for m in 0..cutoff {
            data[m + cutoff * m] = Complex64::new(pop, 0.0);
            pop *= ratio;
        }
        Ok(FockDensity { cutoff, data })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    /// `<m|rho|n>`.
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.data[m + self.cutoff * n]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.cutoff).map(|m| self.get(m, m)).sum()
    }

    /// `max |rho - rho^dag|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.cutoff;
        let mut e: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                e = e.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        e
    }

    /// Population of the top [`TAIL_LEVELS`] levels.
    pub fn tail_mass(&self) -> f64 {
        let n = self.cutoff;
        (n.saturating_sub(TAIL_LEVELS)..n).map(|m| self.get(m, m).re.abs()).sum()
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Largest entry of `self - other`.
    pub fn max_abs_diff(&self, other: &FockDensity) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Checks the density invariants.
    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_error();
        if h > HERMITICITY_TOLERANCE {
            return Err(Error::InvalidState(format!("density is not Hermitian: max |rho - rho^dag| = {h:e}")));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > TRACE_TOLERANCE {
            return Err(Error::InvalidState(format!("density trace is {tr}, expected 1")));
        }
        let tail = self.tail_mass();
        if tail > TAIL_TOLERANCE {
            return Err(Error::Truncation(format!(
                "population {tail:e} in the top {TAIL_LEVELS} levels of cutoff {}",
                self.cutoff
            )));
        }
        Ok(())
    }

    /// Replaces `rho` by `(rho + rho^dag)/2`.
    pub fn symmetrize(&mut self) {
        let n = self.cutoff;
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (self.get(i, j) + self.get(j, i).conj());
                self.data[i + n * j] = v;
                self.data[j + n * i] = v.conj();
            }
            let d = self.get(i, i).re;
            self.data[i + n * i] = Complex64::new(d, 0.0);
        }
    }

    /// Divides by the trace.
    pub fn normalize(&mut self) {
        let tr = self.trace();
        for v in &mut self.data {
            *v /= tr;
        }
    }

    /// Moments from the ladder representation of `x`, `p`, `x^2`, `p^2` and `(xp + px)/2`.
    pub fn moments(&self) -> FockMoments {
        moments(self)
    }

    /// Writes `m,n,re,im` rows with a header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["m", "n", "re", "im"])?;
        let n = self.cutoff;
        for col in 0..n {
            for row in 0..n {
                let v = self.get(row, col);
                out.write_record([row.to_string(), col.to_string(), format!("{:.17e}", v.re), format!("{:.17e}", v.im)])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// `(q, p, sigma_xx, sigma_pp, sigma_xp)` of a density.
///
/// Quadratic observables use `a a^dag = a^dag a + 1` so that their matrix elements are exact
/// on the whole truncated space.
pub fn moments(rho: &FockDensity) -> FockMoments {
    let n = rho.cutoff();
    let r = rho.as_slice();
    let a = SparseOp::annihilation(n);
    let ad = SparseOp::creation(n);
    let aa = a.mul(&a);
    let adad = ad.mul(&ad);
    let sym = SparseOp::number(n).add(&SparseOp::anti_number(n));
    let ea = a.expectation(r);
    let eaa = aa.expectation(r);
    let esym = sym.expectation(r).re;
    let s2 = std::f64::consts::SQRT_2;
    // x = (a + a^dag)/sqrt2 and p = i(a^dag - a)/sqrt2 with <a^dag> = <a>*.
    let q = s2 * ea.re;
    let p = s2 * ea.im;
    let x2 = 0.5 * (2.0 * eaa.re + esym);
    let p2 = 0.5 * (esym - 2.0 * eaa.re);
    // (xp + px)/2 = i(a^dag a^dag - a a)/2.
    let eadad = adad.expectation(r);
    let xp = (Complex64::new(0.0, 0.5) * (eadad - eaa)).re;
    FockMoments { q, p, sxx: x2 - q * q, spp: p2 - p * p, sxp: xp - q * p }
}

/// Smallest cutoff that keeps a Gaussian state's tail population below [`TAIL_TOLERANCE`]:
/// mean occupation plus eight standard deviations, widened by the thermal tail and a margin.
pub fn suggest_cutoff(s: &GaussianState) -> usize {
    let mean = s.mean_occupation();
    let sd = s.occupation_variance().sqrt();
    let m = s.second_moments();
    // Geometric tail of the largest symplectic mode, `ratio^k < tol`.
    let nu_max = 0.5 * (m.sxx + m.spp) + (0.25 * (m.sxx - m.spp).powi(2) + m.sxp * m.sxp).sqrt();
    let nbar_max = (nu_max - 0.5).max(0.0);
    let thermal = if nbar_max > 1e-12 {
        let ratio = nbar_max / (nbar_max + 1.0);
        TAIL_TOLERANCE.ln() / ratio.ln()
    } else {
        0.0
    };
    let est = (mean + 8.0 * sd).max(mean + thermal) + 2.0 * TAIL_LEVELS as f64 + 4.0;
    (est.ceil() as usize).clamp(8, MAX_CUTOFF)
}

/// Gauss-Hermite order used by [`gaussian_to_density`].
pub const IMPORT_ORDER: usize = 200;

/// Number-basis matrix of a Gaussian state by two-dimensional Gauss-Hermite quadrature of
/// `psi_m(x) <x|rho|y> psi_n(y)`, with `<x|rho|y>` the Gaussian kernel at `Q = (x+y)/2`, `r = x-y`.
pub fn gaussian_to_density(s: &GaussianState, cutoff: usize) -> Result<FockDensity> {
    check_cutoff(cutoff)?;
    let gh = GaussHermite::new(IMPORT_ORDER)?;
    let scale = std::f64::consts::SQRT_2;
    let k = gh.len();
    let xs: Vec<f64> = gh.nodes.iter().map(|u| scale * u).collect();
    let ws: Vec<f64> = gh.weights.iter().map(|w| scale * w).collect();

    // psi[m][i] = psi_m(x_i) * w_i by the normalized three-term recurrence.
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut psi = vec![vec![0.0; k]; cutoff];
    for (i, &x) in xs.iter().enumerate() {
        let mut p0 = 0.0;
        let mut p1 = pim4 * (-0.5 * x * x).exp();
        for (m, row) in psi.iter_mut().enumerate() {
            row[i] = p1 * ws[i];
            let mf = m as f64;
            let p2 = (2.0 / (mf + 1.0)).sqrt() * x * p1 - (mf / (mf + 1.0)).sqrt() * p0;
            p0 = p1;
            p1 = p2;
        }
    }

    // kernel[i][j] = <x_i|rho|x_j>
    let kernel: Vec<Vec<Complex64>> = xs
        .iter()
        .map(|&x| xs.iter().map(|&y| s.density_kernel(0.5 * (x + y), x - y)).collect())
        .collect();

    // tmp[m][j] = sum_i psi[m][i] kernel[i][j]
    let mut tmp = vec![vec![Complex64::new(0.0, 0.0); k]; cutoff];
    for (m, row) in tmp.iter_mut().enumerate() {
        for (i, kr) in kernel.iter().enumerate() {
            let pm = psi[m][i];
            if pm == 0.0 {
                continue;
            }
            for (t, kv) in row.iter_mut().zip(kr) {
                *t += pm * kv;
            }
        }
    }
    let mut data = vec![Complex64::new(0.0, 0.0); cutoff * cutoff];
    for n in 0..cutoff {
        for m in 0..cutoff {
            data[m + cutoff * n] = tmp[m].iter().zip(&psi[n]).map(|(t, pn)| t * pn).sum();
        }
    }
    let mut rho = FockDensity { cutoff, data };
    rho.symmetrize();
    let tail = rho.tail_mass();
    if tail > TAIL_TOLERANCE {
        return Err(Error::Truncation(format!(
            "Gaussian state needs a larger cutoff than {cutoff}: tail population {tail:e}, suggested {}",
            suggest_cutoff(s)
        )));
    }
    rho.normalize();
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_import() {
        let rho = gaussian_to_density(&GaussianState::vacuum(), 16).unwrap();
        let mut expected = vec![Complex64::new(0.0, 0.0); 256];
        expected[0] = Complex64::new(1.0, 0.0);
        let e = FockDensity::from_vec(16, expected).unwrap();
        assert!(rho.max_abs_diff(&e) < 1e-10, "{}", rho.max_abs_diff(&e));
        let m = rho.moments();
        assert!((m.sxx - 0.5).abs() < 1e-12 && (m.spp - 0.5).abs() < 1e-12 && m.q.abs() < 1e-12);
    }

    #[test]
    fn thermal_import_matches_bose_einstein() {
        let nbar = 0.5;
        let s = GaussianState::thermal(nbar).unwrap();
        let rho = gaussian_to_density(&s, 48).unwrap();
        let exact = FockDensity::thermal(48, nbar).unwrap();
        assert!(rho.max_abs_diff(&exact) < 1e-8, "{}", rho.max_abs_diff(&exact));
    }

    #[test]
    fn coherent_state_moments() {
        let s = GaussianState::coherent(1.0, 1.0).unwrap();
        let rho = gaussian_to_density(&s, 24).unwrap();
        rho.validate().unwrap();
        let m = rho.moments();
        assert!((m.q - 1.0).abs() < 1e-10 && (m.p - 1.0).abs() < 1e-10);
        // Poisson populations with mean |z|^2 = 1.
        for k in 0..6 {
            let fact: f64 = (1..=k).map(|j| j as f64).product();
            let expected = (-1f64).exp() / fact;
            assert!((rho.get(k, k).re - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn squeezed_mixed_round_trip() {
        let sm = SecondMoments { sxx: 0.9, spp: 0.7, sxp: 0.2 };
        let s = GaussianState::from_second_moments(&sm, -1.2, 0.8).unwrap();
        let n = suggest_cutoff(&s);
        let rho = gaussian_to_density(&s, n).unwrap();
        rho.validate().unwrap();
        let m = rho.moments();
        assert!(m.second_moments().max_abs_diff(&sm) < 1e-6);
        assert!((m.q + 1.2).abs() < 1e-6 && (m.p - 0.8).abs() < 1e-6);
    }

    #[test]
    fn tail_detection() {
        let s = GaussianState::coherent(4.0, 4.0).unwrap();
        assert!(matches!(gaussian_to_density(&s, 12), Err(Error::Truncation(_))));
        assert!(FockDensity::number_state(8, 7).unwrap().validate().is_err());
    }

    #[test]
    fn csv_export() {
        let rho = FockDensity::number_state(2, 1).unwrap();
        let mut buf = Vec::new();
        rho.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("m,n,re,im\n0,0,"));
    }
}
