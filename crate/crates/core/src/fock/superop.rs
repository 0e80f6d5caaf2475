//! Superoperators as sums of sandwich terms `c A rho B` on a truncated number basis.
//!
//! Densities are vectorized by column stacking, `vec(rho)[m + N n] = <m|rho|n>`, so
//! the term `A rho B` acts as `(B^T (x) A)` on `vec(rho)`.

use faer::Mat;
use num_complex::Complex64;

use super::ops::SparseOp;
use crate::model::ModelParams;
use crate::propagator::alpha_from_target;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// One sandwich term `coef * left * rho * right`; `None` stands for the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: Complex64,
    pub left: Option<SparseOp>,
    pub right: Option<SparseOp>,
}

/// Linear map on `N x N` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOp {
    dim: usize,
    terms: Vec<Term>,
}

fn sq(o: &SparseOp) -> SparseOp {
    o.mul(o)
}

fn mul_opt(a: &Option<SparseOp>, b: &Option<SparseOp>) -> Option<SparseOp> {
    match (a, b) {
        (None, None) => None,
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (Some(x), Some(y)) => Some(x.mul(y)),
    }
}

impl SuperOp {
    pub fn zero(dim: usize) -> Self {
        SuperOp { dim, terms: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        SuperOp { dim, terms: vec![Term { coef: ONE, left: None, right: None }] }
    }

    /// `rho -> c A rho B`.
    pub fn sandwich(c: Complex64, a: &SparseOp, b: &SparseOp) -> Self {
        assert_eq!(a.dim(), b.dim());
        SuperOp { dim: a.dim(), terms: vec![Term { coef: c, left: Some(a.clone()), right: Some(b.clone()) }] }
    }

    /// `rho -> c A rho`.
    pub fn left(c: Complex64, a: &SparseOp) -> Self {
        SuperOp { dim: a.dim(), terms: vec![Term { coef: c, left: Some(a.clone()), right: None }] }
    }

    /// `rho -> c rho B`.
    pub fn right(c: Complex64, b: &SparseOp) -> Self {
        SuperOp { dim: b.dim(), terms: vec![Term { coef: c, left: None, right: Some(b.clone()) }] }
    }

    /// `rho -> [H, rho]`.
    pub fn commutator_with(h: &SparseOp) -> Self {
        Self::left(ONE, h).add(&Self::right(-ONE, h))
    }

    /// `rho -> {H, rho}`.
    pub fn anticommutator_with(h: &SparseOp) -> Self {
        Self::left(ONE, h).add(&Self::right(ONE, h))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn add(&self, o: &SuperOp) -> SuperOp {
        assert_eq!(self.dim, o.dim);
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        SuperOp { dim: self.dim, terms }
    }

    pub fn sub(&self, o: &SuperOp) -> SuperOp {
        self.add(&o.scale(-ONE))
    }

    pub fn scale(&self, c: Complex64) -> SuperOp {
        let terms = self.terms.iter().map(|t| Term { coef: c * t.coef, ..t.clone() }).collect();
        SuperOp { dim: self.dim, terms }
    }

    pub fn scale_re(&self, c: f64) -> SuperOp {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Composition `self o other`: `rho -> self(other(rho))`.
    pub fn compose(&self, other: &SuperOp) -> SuperOp {
        assert_eq!(self.dim, other.dim);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for s in &self.terms {
            for t in &other.terms {
                terms.push(Term {
                    coef: s.coef * t.coef,
                    left: mul_opt(&s.left, &t.left),
                    right: mul_opt(&t.right, &s.right),
                });
            }
        }
        SuperOp { dim: self.dim, terms }.simplified()
    }

    /// `[self, other] = self o other - other o self`.
    pub fn commutator(&self, other: &SuperOp) -> SuperOp {
        self.compose(other).sub(&other.compose(self)).simplified()
    }

    /// Transpose under the pairing `tr(X S(rho)) = tr(S^T(X) rho)`: `A rho B` becomes `B X A`.
    pub fn transpose(&self) -> SuperOp {
        let terms = self
            .terms
            .iter()
            .map(|t| Term { coef: t.coef, left: t.right.clone(), right: t.left.clone() })
            .collect();
        SuperOp { dim: self.dim, terms }
    }

    /// Merges one-sided terms into a single left and a single right operator.
    pub fn simplified(&self) -> SuperOp {
        let n = self.dim;
        let mut id = ZERO;
        let mut lefts = Vec::new();
        let mut rights = Vec::new();
        let mut both = Vec::new();
        for t in &self.terms {
            match (&t.left, &t.right) {
                (None, None) => id += t.coef,
                (Some(a), None) => lefts.extend(a.entries().iter().map(|&(i, j, v)| (i, j, t.coef * v))),
                (None, Some(b)) => rights.extend(b.entries().iter().map(|&(i, j, v)| (i, j, t.coef * v))),
                (Some(_), Some(_)) => both.push(t.clone()),
            }
        }
        // The identity multiple is folded into the left operator.
        lefts.extend((0..n).map(|i| (i, i, id)));
        let l = SparseOp::from_triplets(n, lefts);
        let r = SparseOp::from_triplets(n, rights);
        let mut terms = Vec::new();
        if l.nnz() > 0 {
            terms.push(Term { coef: ONE, left: Some(l), right: None });
        }
        if r.nnz() > 0 {
            terms.push(Term { coef: ONE, left: None, right: Some(r) });
        }
        terms.extend(both.into_iter().filter(|t| t.coef != ZERO));
        SuperOp { dim: n, terms }
    }

    /// Accumulates `self(rho)` into `out`; both column-stacked of length `N^2`.
    pub fn apply_add(&self, rho: &[Complex64], out: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = self.dim;
        assert_eq!(rho.len(), n * n);
        assert_eq!(out.len(), n * n);
        for t in &self.terms {
            // tmp = rho B
            let tmp: &[Complex64] = match &t.right {
                None => rho,
                Some(b) => {
                    scratch.clear();
                    scratch.resize(n * n, ZERO);
                    for &(k, l, v) in b.entries() {
                        let (dst, src) = (l * n, k * n);
                        for m in 0..n {
                            scratch[dst + m] += rho[src + m] * v;
                        }
                    }
                    scratch
                }
            };
            match &t.left {
                None => {
                    for (o, x) in out.iter_mut().zip(tmp) {
                        *o += t.coef * x;
                    }
                }
                Some(a) => {
                    for &(i, j, v) in a.entries() {
                        let cv = t.coef * v;
                        for col in 0..n {
                            out[i + n * col] += cv * tmp[j + n * col];
                        }
                    }
                }
            }
        }
    }

    /// `self(rho)` as a new column-stacked vector.
    pub fn apply(&self, rho: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; rho.len()];
        let mut scratch = Vec::new();
        self.apply_add(rho, &mut out, &mut scratch);
        out
    }

    /// Dense `N^2 x N^2` matrix acting on column-stacked densities.
    pub fn matrix(&self) -> Mat<Complex64> {
        let idx: Vec<usize> = (0..self.dim * self.dim).collect();
        self.matrix_on(&idx)
    }

    /// Restriction of the dense matrix to the vectorized indices `idx` (rows and columns).
    pub fn matrix_on(&self, idx: &[usize]) -> Mat<Complex64> {
        let n = self.dim;
        let mut pos = vec![usize::MAX; n * n];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut m = Mat::<Complex64>::zeros(idx.len(), idx.len());
        let ident = SparseOp::identity(n);
        for t in &self.terms {
            let a = t.left.as_ref().unwrap_or(&ident);
            let b = t.right.as_ref().unwrap_or(&ident);
            // (A rho B)_{il} = sum A_ij rho_jk B_kl: row i + N l, column j + N k.
            for &(i, j, av) in a.entries() {
                for &(k, l, bv) in b.entries() {
                    let (r, c) = (pos[i + n * l], pos[j + n * k]);
                    if r != usize::MAX && c != usize::MAX {
                        m[(r, c)] += t.coef * av * bv;
                    }
                }
            }
        }
        m
    }

    /// Frobenius norm of `self` on all matrix units `|m><n|` with `m, n < limit`.
    pub fn interior_norm(&self, limit: usize) -> f64 {
        let n = self.dim;
        let mut unit = vec![ZERO; n * n];
        let mut total = 0.0;
        for col in 0..limit {
            for row in 0..limit {
                unit[row + n * col] = ONE;
                total += self.apply(&unit).iter().map(|v| v.norm_sqr()).sum::<f64>();
                unit[row + n * col] = ZERO;
            }
        }
        total.sqrt()
    }

    /// True when every term preserves the parity of `m + n`.
    pub fn preserves_parity(&self) -> bool {
        let even = |o: &Option<SparseOp>| o.as_ref().is_none_or(|op| op.entries().iter().all(|&(i, j, _)| (i + j) % 2 == 0));
        let odd = |o: &Option<SparseOp>| o.as_ref().is_some_and(|op| op.entries().iter().all(|&(i, j, _)| (i + j) % 2 == 1));
        self.terms.iter().all(|t| (even(&t.left) && even(&t.right)) || (odd(&t.left) && odd(&t.right)))
    }
}

/// Vectorized indices `m + N n` with `m + n` of the given parity.
pub fn parity_indices(dim: usize, parity: usize) -> Vec<usize> {
    (0..dim * dim).filter(|&k| (k % dim + k / dim) % 2 == parity % 2).collect()
}

/// Superoperators of the quadratic Liouvillian and the displacement generator at one cutoff.
#[derive(Debug, Clone)]
pub struct SuperOpSet {
    pub cutoff: usize,
    pub a: SparseOp,
    pub ad: SparseOp,
    /// `L rho = a rho a^dag - {a^dag a, rho}/2`.
    pub l: SuperOp,
    /// `R rho = a^dag rho a - {a a^dag, rho}/2`.
    pub r: SuperOp,
    /// `V rho = a rho a - {a a, rho}/2`.
    pub v: SuperOp,
    /// `V^dag rho = a^dag rho a^dag - {a^dag a^dag, rho}/2`.
    pub vd: SuperOp,
    pub i_l0: SuperOp,
    pub i_m1: SuperOp,
    pub i_m2: SuperOp,
    /// `O_0 - I/2`.
    pub o0_shifted: SuperOp,
    pub o_plus: SuperOp,
    pub l1_plus: SuperOp,
    pub l2_plus: SuperOp,
    /// Liouvillian assembled from `H_0`, `L`, `R`, `V`, `V^dag`.
    pub liouvillian: SuperOp,
    /// `K_0` assembled from the seven generators; `K_0 = -liouvillian`.
    pub k0: SuperOp,
    pub displacement_z: Complex64,
    pub displacement: SuperOp,
    /// `alpha` with `[L_0, D(z)] = -D(alpha)`.
    pub alpha: Complex64,
    /// `L_z = L_0 + D(alpha)`.
    pub displaced_liouvillian: SuperOp,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `D(z) rho = (z a^dag - z* a) rho - rho (z a^dag - z* a)`.
pub fn displacement(z: Complex64, cutoff: usize) -> SuperOp {
    let a = SparseOp::annihilation(cutoff);
    let ad = SparseOp::creation(cutoff);
    let g = ad.scale(z).sub(&a.scale(z.conj()));
    SuperOp::commutator_with(&g).simplified()
}

/// Hamiltonian `H_0 = omega0 a^dag a + (theta1 + i theta2)/4 a a + (theta1 - i theta2)/4 a^dag a^dag`.
pub fn hamiltonian(params: &ModelParams, cutoff: usize) -> SparseOp {
    let a = SparseOp::annihilation(cutoff);
    let ad = SparseOp::creation(cutoff);
    let (t1, t2) = (params.theta1(), params.theta2());
    ad.mul(&a)
        .scale(c(params.omega0(), 0.0))
        .add(&sq(&a).scale(c(t1 / 4.0, t2 / 4.0)))
        .add(&sq(&ad).scale(c(t1 / 4.0, -t2 / 4.0)))
}

fn dissipator(jump: &SparseOp) -> SuperOp {
    let jd = jump.adjoint();
    let jdj = jd.mul(jump);
    SuperOp::sandwich(ONE, jump, &jd).add(&SuperOp::anticommutator_with(&jdj).scale_re(-0.5))
}

fn virtual_transition(op: &SparseOp) -> SuperOp {
    let op2 = op.mul(op);
    SuperOp::sandwich(ONE, op, op).add(&SuperOp::anticommutator_with(&op2).scale_re(-0.5))
}

/// Builds every superoperator for `params` at `cutoff`, with `D(z)` for the displacement `z`.
pub fn build_superops(params: &ModelParams, z: Option<Complex64>, cutoff: usize) -> SuperOpSet {
    let n = cutoff;
    let a = SparseOp::annihilation(n);
    let ad = SparseOp::creation(n);
    let half = 0.5;

    let l = dissipator(&a);
    let r = dissipator(&ad);
    let v = virtual_transition(&a);
    let vd = virtual_transition(&ad);

    let num = ad.mul(&a);
    let m1 = sq(&a).add(&sq(&ad)).scale(c(half, 0.0));
    let m2 = sq(&a).sub(&sq(&ad)).scale(c(0.0, half));
    let i_l0 = SuperOp::commutator_with(&num).scale(c(0.0, half)).simplified();
    let i_m1 = SuperOp::commutator_with(&m1).scale(c(0.0, half)).simplified();
    let i_m2 = SuperOp::commutator_with(&m2).scale(c(0.0, half)).simplified();
    let o0_shifted = r.sub(&l).scale_re(half).simplified();
    let o_plus = r.add(&l).scale_re(half).simplified();
    let l1_plus = v.add(&vd).scale_re(half).simplified();
    let l2_plus = v.sub(&vd).scale(c(0.0, half)).simplified();

    let (g, e0) = (params.gamma(), params.eta0());
    let chi = params.chi();
    let h0 = hamiltonian(params, n);
    let liouvillian = SuperOp::commutator_with(&h0)
        .scale(c(0.0, -1.0))
        .add(&l.scale_re(-0.5 * (e0 - g)))
        .add(&r.scale_re(-0.5 * (e0 + g)))
        .add(&v.scale(-chi))
        .add(&vd.scale(-chi.conj()))
        .simplified();

    let k0 = i_l0
        .scale_re(2.0 * params.omega0())
        .add(&i_m1.scale_re(params.theta1()))
        .add(&i_m2.scale_re(params.theta2()))
        .add(&o0_shifted.scale_re(g))
        .add(&o_plus.scale_re(e0))
        .add(&l1_plus.scale_re(params.eta1()))
        .add(&l2_plus.scale_re(params.eta2()))
        .simplified();

    let zc = z.unwrap_or(ZERO);
    let d = displacement(zc, n);
    let s2 = std::f64::consts::SQRT_2;
    let (aq, ap) = alpha_from_target(params, s2 * zc.re, s2 * zc.im);
    let alpha = c(aq, ap) / s2;
    let displaced_liouvillian = liouvillian.add(&displacement(alpha, n)).simplified();

    SuperOpSet {
        cutoff: n,
        a,
        ad,
        l,
        r,
        v,
        vd,
        i_l0,
        i_m1,
        i_m2,
        o0_shifted,
        o_plus,
        l1_plus,
        l2_plus,
        liouvillian,
        k0,
        displacement_z: zc,
        displacement: d,
        alpha,
        displaced_liouvillian,
    }
}

/// Liouvillian alone, without the auxiliary generator set.
pub fn liouvillian(params: &ModelParams, cutoff: usize) -> SuperOp {
    build_superops(params, None, cutoff).liouvillian
}

/// Quantum and classical ladder superoperators `a_q = (a. - .a)/sqrt 2`, `a_cl = (a. + .a)/sqrt 2`
/// and their adjoints, in the order `(a_q, a_q^dag, a_cl, a_cl^dag)`.
pub fn keldysh_ladders(cutoff: usize) -> (SuperOp, SuperOp, SuperOp, SuperOp) {
    let a = SparseOp::annihilation(cutoff);
    let ad = SparseOp::creation(cutoff);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let aq = SuperOp::commutator_with(&a).scale_re(s).simplified();
    let aqd = SuperOp::commutator_with(&ad).scale_re(s).simplified();
    let acl = SuperOp::anticommutator_with(&a).scale_re(s).simplified();
    let acld = SuperOp::anticommutator_with(&ad).scale_re(s).simplified();
    (aq, aqd, acl, acld)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(1.3, 0.7, 0.4, -0.3, -1.9, 0.25, -0.15).unwrap()
    }

    fn dense_apply(m: &Mat<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum()).collect()
    }

    fn random_rho(n: usize, seed: u64) -> Vec<Complex64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        (0..n * n).map(|_| c(next(), next())).collect()
    }

    #[test]
    fn matrix_matches_apply() {
        let n = 7;
        let s = build_superops(&params(), Some(c(0.3, -0.2)), n);
        for op in [&s.liouvillian, &s.displacement, &s.k0, &s.l2_plus] {
            let x = random_rho(n, 3);
            let dense = dense_apply(&op.matrix(), &x);
            let direct = op.apply(&x);
            for (u, v) in dense.iter().zip(&direct) {
                assert!((u - v).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn kronecker_convention() {
        // A rho B acts as (B^T kron A) on column-stacked rho.
        let n = 4;
        let a = SparseOp::annihilation(n);
        let b = SparseOp::position(n);
        let m = SuperOp::sandwich(ONE, &a, &b).matrix();
        let (ad, bd) = (a.to_dense(), b.to_dense());
        for r in 0..n * n {
            for col in 0..n * n {
                let (i, l) = (r % n, r / n);
                let (j, k) = (col % n, col / n);
                let expected = bd[k * n + l] * ad[i * n + j];
                assert!((m[(r, col)] - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn two_assemblies_agree() {
        let n = 12;
        let s = build_superops(&params(), None, n);
        let diff = s.liouvillian.add(&s.k0);
        assert!(diff.interior_norm(n) < 1e-12, "{}", diff.interior_norm(n));
    }

    #[test]
    fn keldysh_forms_on_interior() {
        let n = 16;
        let s = build_superops(&params(), None, n);
        let (aq, aqd, acl, acld) = keldysh_ladders(n);
        let o_plus = aqd.compose(&aq).scale_re(-1.0);
        assert!(o_plus.sub(&s.o_plus).interior_norm(n / 2) < 1e-12);
        let o0 = aqd.compose(&acl).sub(&acld.compose(&aq)).scale_re(0.5);
        // O_0 itself, i.e. (O_0 - I/2) + I/2.
        let o0_ref = s.o0_shifted.add(&SuperOp::identity(n).scale_re(0.5));
        assert!(o0.sub(&o0_ref).interior_norm(n / 2) < 1e-12);
        let aq2 = aq.compose(&aq);
        let aqd2 = aqd.compose(&aqd);
        let l1 = aqd2.add(&aq2).scale_re(-0.5);
        assert!(l1.sub(&s.l1_plus).interior_norm(n / 2) < 1e-12);
        let l2 = aqd2.sub(&aq2).scale(c(0.0, 0.5));
        assert!(l2.sub(&s.l2_plus).interior_norm(n / 2) < 1e-12);
    }

    #[test]
    fn quadratic_generators_preserve_parity() {
        let s = build_superops(&params(), Some(c(0.1, 0.1)), 6);
        assert!(s.liouvillian.preserves_parity());
        assert!(!s.displacement.preserves_parity());
        assert_eq!(parity_indices(4, 0).len(), 8);
    }

    #[test]
    fn zero_displacement_is_zero() {
        let d = displacement(ZERO, 8);
        assert!(d.matrix().norm_l2() == 0.0);
    }

    #[test]
    fn compose_is_sequential_application() {
        let n = 6;
        let s = build_superops(&params(), Some(c(0.2, 0.4)), n);
        let x = random_rho(n, 9);
        let lhs = s.liouvillian.compose(&s.displacement).apply(&x);
        let rhs = s.liouvillian.apply(&s.displacement.apply(&x));
        for (u, v) in lhs.iter().zip(&rhs) {
            assert!((u - v).norm() < 1e-12);
        }
    }
}
