//! Dense eigenvalues of truncated superoperators and their comparison with the analytic grid.

use num_complex::Complex64;
use serde::Serialize;

use super::superop::{parity_indices, SuperOp};
use crate::error::{Error, Result};
use crate::model::{liouvillian_eigenvalue, ModelParams, Sign};

/// All eigenvalues of `S`, computed per parity block when `S` preserves parity.
pub fn full_spectrum(superop: &SuperOp) -> Result<Vec<Complex64>> {
    let n = superop.dim();
    let blocks: Vec<Vec<usize>> = if superop.preserves_parity() {
        vec![parity_indices(n, 0), parity_indices(n, 1)]
    } else {
        vec![(0..n * n).collect()]
    };
    let mut out = Vec::with_capacity(n * n);
    for idx in blocks {
        let m = superop.matrix_on(&idx);
        let ev = m.eigenvalues().map_err(|e| Error::Eigen(format!("{e:?}")))?;
        out.extend(ev);
    }
    Ok(out)
}

/// The `k` eigenvalues with real part closest to zero, ordered by decreasing real part.
pub fn spectrum(superop: &SuperOp, k: usize) -> Result<Vec<Complex64>> {
    let mut ev = full_spectrum(superop)?;
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    ev.truncate(k);
    Ok(ev)
}

/// Analytic eigenvalue with its indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticEigenvalue {
    pub m: u32,
    pub n: u32,
    pub sign: i8,
    pub value: Complex64,
}

/// `+- i n omega - (m - n/2) gamma` for all `0 <= n <= m` with `m + n <= max_sum`.
pub fn analytic_grid(params: &ModelParams, max_sum: u32) -> Result<Vec<AnalyticEigenvalue>> {
    let mut out = Vec::new();
    for m in 0..=max_sum {
        for n in 0..=m.min(max_sum - m) {
            for (sign, s) in [(Sign::Plus, 1i8), (Sign::Minus, -1i8)] {
                if n == 0 && s < 0 {
                    continue;
                }
                let value = liouvillian_eigenvalue(params, m, n, sign)?;
                out.push(AnalyticEigenvalue { m, n, sign: s, value });
            }
        }
    }
    Ok(out)
}

/// Distance from an analytic value to the nearest computed eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenMatch {
    pub analytic: AnalyticEigenvalue,
    pub nearest: Complex64,
    pub distance: f64,
}

/// Nearest computed eigenvalue for every analytic value.
pub fn match_nearest(numeric: &[Complex64], analytic: &[AnalyticEigenvalue]) -> Vec<EigenMatch> {
    analytic
        .iter()
        .map(|a| {
            let nearest = numeric
                .iter()
                .copied()
                .min_by(|x, y| (x - a.value).norm().total_cmp(&(y - a.value).norm()))
                .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            EigenMatch { analytic: *a, nearest, distance: (nearest - a.value).norm() }
        })
        .collect()
}

/// Coalescence cluster around a degenerate analytic value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cluster {
    pub center: Complex64,
    pub multiplicity: usize,
    /// `|mean - center|` over the `multiplicity` nearest eigenvalues.
    pub centroid_error: f64,
    /// Largest distance of a member from the center.
    pub spread: f64,
    /// Largest imaginary part among the members.
    pub max_imag: f64,
}

/// Takes the `multiplicity` eigenvalues nearest to `center` as the cluster.
pub fn cluster(numeric: &[Complex64], center: Complex64, multiplicity: usize) -> Cluster {
    let mut by_dist: Vec<Complex64> = numeric.to_vec();
    by_dist.sort_by(|x, y| (x - center).norm().total_cmp(&(y - center).norm()));
    by_dist.truncate(multiplicity);
    let k = by_dist.len().max(1) as f64;
    let mean: Complex64 = by_dist.iter().sum::<Complex64>() / k;
    Cluster {
        center,
        multiplicity,
        centroid_error: (mean - center).norm(),
        spread: by_dist.iter().map(|x| (x - center).norm()).fold(0.0, f64::max),
        max_imag: by_dist.iter().map(|x| x.im.abs()).fold(0.0, f64::max),
    }
}

/// Clusters at `-K gamma/2`, `K = 0..=max_k`, each with multiplicity `K + 1`, as expected
/// at an exceptional point where `omega = 0`.
pub fn ep_clusters(numeric: &[Complex64], gamma: f64, max_k: usize) -> Vec<Cluster> {
    (0..=max_k).map(|k| cluster(numeric, Complex64::new(-0.5 * gamma * k as f64, 0.0), k + 1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::superop::{build_superops, liouvillian};

    #[test]
    fn gksl_low_lying_eigenvalues() {
        let p = ModelParams::gksl(1.0, 1.0, 0.0).unwrap();
        let ev = full_spectrum(&liouvillian(&p, 24)).unwrap();
        let grid: Vec<_> = analytic_grid(&p, 4).unwrap().into_iter().filter(|a| a.m as f64 + a.n as f64 / 2.0 <= 2.0).collect();
        for m in match_nearest(&ev, &grid) {
            assert!(m.distance < 1e-6, "{m:?}");
        }
        let top = spectrum(&liouvillian(&p, 24), 1).unwrap();
        assert!(top[0].norm() < 1e-8);
    }

    #[test]
    fn grid_size() {
        let p = ModelParams::gksl(1.0, 1.0, 0.0).unwrap();
        // (0,0) (1,0) (1,1)x2 (2,0) (2,1)x2 (2,2)x2 (3,0) (3,1)x2 (4,0)
        assert_eq!(analytic_grid(&p, 4).unwrap().len(), 13);
    }

    #[test]
    fn driving_does_not_move_the_spectrum() {
        let p = ModelParams::new(1.0, 1.0, 0.3, 0.2, -1.2, 0.0, 0.0).unwrap();
        let set = build_superops(&p, Some(Complex64::new(0.3, 0.1)), 24);
        let a = spectrum(&set.liouvillian, 6).unwrap();
        let b = full_spectrum(&set.displaced_liouvillian).unwrap();
        for m in match_nearest(&b, &a.iter().map(|&v| AnalyticEigenvalue { m: 0, n: 0, sign: 1, value: v }).collect::<Vec<_>>()) {
            assert!(m.distance < 1e-6, "{m:?}");
        }
    }
}
