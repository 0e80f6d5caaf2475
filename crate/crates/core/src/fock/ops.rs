//! Truncated ladder operators stored as sparse triplets.

use num_complex::Complex64;

/// Sparse `n x n` operator in the number basis; `(row, col, value)` triplets with unique positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    /// Builds an operator from triplets, summing repeated positions and dropping zeros.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut entries: Vec<(usize, usize, Complex64)> = triplets.into_iter().collect();
        entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            assert!(i < dim && j < dim, "triplet ({i}, {j}) outside dimension {dim}");
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|e| e.2 != Complex64::new(0.0, 0.0));
        SparseOp { dim, entries: merged }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, Complex64::new(1.0, 0.0))))
    }

    pub fn zero(dim: usize) -> Self {
        SparseOp { dim, entries: Vec::new() }
    }

    /// Annihilation operator, `a|n> = sqrt(n)|n-1>`.
    pub fn annihilation(dim: usize) -> Self {
        Self::from_triplets(dim, (1..dim).map(|n| (n - 1, n, Complex64::new((n as f64).sqrt(), 0.0))))
    }

    /// Creation operator, `a^dag|n> = sqrt(n+1)|n+1>`.
    pub fn creation(dim: usize) -> Self {
        Self::annihilation(dim).adjoint()
    }

    /// Number operator `a^dag a`, exact on the whole truncated space.
    pub fn number(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|n| (n, n, Complex64::new(n as f64, 0.0))))
    }

    /// `a a^dag = a^dag a + 1`, without the truncation defect of the product.
    pub fn anti_number(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|n| (n, n, Complex64::new(n as f64 + 1.0, 0.0))))
    }

    /// Position `x = (a + a^dag)/sqrt(2)`.
    pub fn position(dim: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::annihilation(dim).add(&Self::creation(dim)).scale(Complex64::new(s, 0.0))
    }

    /// Momentum `p = i(a^dag - a)/sqrt(2)`.
    pub fn momentum(dim: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::creation(dim).sub(&Self::annihilation(dim)).scale(Complex64::new(0.0, s))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn add(&self, o: &SparseOp) -> SparseOp {
        assert_eq!(self.dim, o.dim);
        Self::from_triplets(self.dim, self.entries.iter().chain(o.entries.iter()).copied())
    }

    pub fn sub(&self, o: &SparseOp) -> SparseOp {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> SparseOp {
        Self::from_triplets(self.dim, self.entries.iter().map(|&(i, j, v)| (i, j, c * v)))
    }

    /// Matrix product `self * o`.
    pub fn mul(&self, o: &SparseOp) -> SparseOp {
        assert_eq!(self.dim, o.dim);
        let mut by_row: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); o.dim];
        for &(k, j, v) in &o.entries {
            by_row[k].push((j, v));
        }
        let mut out = Vec::new();
        for &(i, k, u) in &self.entries {
            for &(j, v) in &by_row[k] {
                out.push((i, j, u * v));
            }
        }
        Self::from_triplets(self.dim, out)
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> SparseOp {
        Self::from_triplets(self.dim, self.entries.iter().map(|&(i, j, v)| (j, i, v.conj())))
    }

    /// Plain transpose.
    pub fn transpose(&self) -> SparseOp {
        Self::from_triplets(self.dim, self.entries.iter().map(|&(i, j, v)| (j, i, v)))
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut m = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        for &(i, j, v) in &self.entries {
            m[i * self.dim + j] += v;
        }
        m
    }

    /// `tr(self * rho)` for a column-stacked density `rho[m + dim n]`.
    pub fn expectation(&self, rho: &[Complex64]) -> Complex64 {
        // tr(A rho) = sum_{ij} A_ij rho_ji
        self.entries.iter().map(|&(i, j, v)| v * rho[j + self.dim * i]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn ladder_elements() {
        let a = SparseOp::annihilation(5);
        let ad = SparseOp::creation(5);
        let d = a.to_dense();
        assert_eq!(d[5 + 2], c(2f64.sqrt()));
        assert_eq!(ad.to_dense()[2 * 5 + 1], c(2f64.sqrt()));
        // a^dag a equals the number operator everywhere; a a^dag only below the edge.
        let n = ad.mul(&a).to_dense();
        let exact_n = SparseOp::number(5).to_dense();
        assert!(n.iter().zip(&exact_n).all(|(x, y)| (x - y).norm() < 1e-14));
        let aad = a.mul(&ad).to_dense();
        let exact = SparseOp::anti_number(5).to_dense();
        for i in 0..4 {
            assert!((aad[i * 5 + i] - exact[i * 5 + i]).norm() < 1e-14);
        }
    }

    #[test]
    fn canonical_commutator_in_interior() {
        let n = 10;
        let x = SparseOp::position(n);
        let p = SparseOp::momentum(n);
        let comm = x.mul(&p).sub(&p.mul(&x)).to_dense();
        for i in 0..n - 1 {
            assert!((comm[i * n + i] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn merging_and_zero_dropping() {
        let s = SparseOp::from_triplets(3, [(0, 1, c(1.0)), (0, 1, c(-1.0)), (2, 2, c(3.0)), (2, 2, c(1.0))]);
        assert_eq!(s.nnz(), 1);
        assert_eq!(s.entries()[0], (2, 2, c(4.0)));
    }
}
