//! Operator identities checked as matrix identities on interior-supported inputs.
//!
//! Ladder truncation corrupts the top rows and columns of every superoperator, so each
//! identity is tested only on matrix units `|m><n|` with `m, n < cutoff/2`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ops::SparseOp;
use super::superop::{build_superops, displacement, keldysh_ladders, SuperOp};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Default tolerance of the interior identities.
pub const ALGEBRA_TOLERANCE: f64 = 1e-9;

/// Outcome of one identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgebraCheck {
    pub identity_name: String,
    pub norm: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl AlgebraCheck {
    fn new(name: &str, norm: f64, tolerance: f64) -> Self {
        AlgebraCheck { identity_name: name.to_string(), norm, tolerance, pass: norm <= tolerance }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Random matrix supported on `m, n < limit`, Hermitian and unit-trace when `hermitian`.
pub fn random_interior(cutoff: usize, limit: usize, hermitian: bool, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut x = vec![c(0.0, 0.0); cutoff * cutoff];
    for col in 0..limit {
        for row in 0..limit {
            x[row + cutoff * col] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    if hermitian {
        for col in 0..limit {
            for row in 0..col {
                x[row + cutoff * col] = x[col + cutoff * row].conj();
            }
            x[col + cutoff * col].im = 0.0;
        }
        let tr: f64 = (0..limit).map(|m| x[m + cutoff * m].re).sum();
        if tr.abs() > 1e-3 {
            x.iter_mut().for_each(|v| *v /= tr);
        }
    }
    x
}

fn trace(x: &[Complex64], n: usize) -> Complex64 {
    (0..n).map(|m| x[m + n * m]).sum()
}

fn dagger(x: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut y = vec![c(0.0, 0.0); n * n];
    for col in 0..n {
        for row in 0..n {
            y[col + n * row] = x[row + n * col].conj();
        }
    }
    y
}

fn max_abs(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Runs the commutator, transposition, annihilation and displacement identities.
///
/// `z` is the displacement of `D(z)`; random interior test states are drawn from `seed`.
pub fn algebra_checks(params: &ModelParams, z: Complex64, cutoff: usize, seed: u64) -> Result<Vec<AlgebraCheck>> {
    if !(8..=super::density::MAX_CUTOFF).contains(&cutoff) {
        return Err(Error::InvalidParameter(format!("algebra checks need 8 <= cutoff <= 64, got {cutoff}")));
    }
    let n = cutoff;
    let lim = n / 2;
    let s = build_superops(params, Some(z), n);
    let d = &s.displacement;
    let ident = SuperOp::identity(n);
    let tol = ALGEBRA_TOLERANCE;
    let mut out = Vec::new();
    let mut interior = |name: &str, op: SuperOp, t: f64| out.push(AlgebraCheck::new(name, op.interior_norm(lim), t));

    // Linear relations between the two generator sets.
    interior("O0 - I/2 = (R - L)/2", s.o0_shifted.sub(&s.r.sub(&s.l).scale_re(0.5)), 1e-13);
    interior("O+ = (R + L)/2", s.o_plus.sub(&s.r.add(&s.l).scale_re(0.5)), 1e-13);
    interior("L1+ = (V + V^dag)/2", s.l1_plus.sub(&s.v.add(&s.vd).scale_re(0.5)), 1e-13);
    interior("L2+ = i(V - V^dag)/2", s.l2_plus.sub(&s.v.sub(&s.vd).scale(c(0.0, 0.5))), 1e-13);
    interior("L0 = -K0", s.liouvillian.add(&s.k0), tol);

    let (aq, aqd, acl, acld) = keldysh_ladders(n);
    interior("O+ = -a_q^dag a_q", s.o_plus.add(&aqd.compose(&aq)), tol);
    interior(
        "O0 = (a_q^dag a_cl - a_cl^dag a_q)/2",
        s.o0_shifted.add(&ident.scale_re(0.5)).sub(&aqd.compose(&acl).sub(&acld.compose(&aq)).scale_re(0.5)),
        tol,
    );
    let aq2 = aq.compose(&aq);
    let aqd2 = aqd.compose(&aqd);
    interior("L1+ = -(a_q^dag^2 + a_q^2)/2", s.l1_plus.add(&aqd2.add(&aq2).scale_re(0.5)), tol);
    interior("L2+ = i(a_q^dag^2 - a_q^2)/2", s.l2_plus.sub(&aqd2.sub(&aq2).scale(c(0.0, 0.5))), tol);

    // Commutators with the displacement generator.
    let iz = c(0.0, 1.0) * z;
    interior("[iL0, D(z)] = D(iz)/2", s.i_l0.commutator(d).sub(&displacement(iz, n).scale_re(0.5)), tol);
    interior("[iM1, D(z)] = -D((iz)*)/2", s.i_m1.commutator(d).add(&displacement(iz.conj(), n).scale_re(0.5)), tol);
    interior("[iM2, D(z)] = D(z*)/2", s.i_m2.commutator(d).sub(&displacement(z.conj(), n).scale_re(0.5)), tol);
    interior("[O0 - I/2, D(z)] = D(z)/2", s.o0_shifted.commutator(d).sub(&d.scale_re(0.5)), tol);
    interior("[O+, D(z)] = 0", s.o_plus.commutator(d), tol);
    interior("[L1+, D(z)] = 0", s.l1_plus.commutator(d), tol);
    interior("[L2+, D(z)] = 0", s.l2_plus.commutator(d), tol);
    interior("[L0, D(z)] = -D(alpha)", s.liouvillian.commutator(d).add(&displacement(s.alpha, n)), tol);
    interior("[D(z), D(alpha)] = 0", d.commutator(&displacement(s.alpha, n)), 1e-12);

    // Transpositions.
    interior("iL0^T = -iL0", s.i_l0.transpose().add(&s.i_l0), tol);
    interior("iM1^T = -iM1", s.i_m1.transpose().add(&s.i_m1), tol);
    interior("iM2^T = -iM2", s.i_m2.transpose().add(&s.i_m2), tol);
    interior("(O0 - I/2)^T = -(O0 - I/2) - I", s.o0_shifted.transpose().add(&s.o0_shifted).add(&ident), tol);
    interior("O+^T = O+", s.o_plus.transpose().sub(&s.o_plus), tol);
    interior("L1+^T = L1+", s.l1_plus.transpose().sub(&s.l1_plus), tol);
    interior("L2+^T = L2+", s.l2_plus.transpose().sub(&s.l2_plus), tol);

    // Annihilation of x and p by the symmetric generators, tested through tr(x S(rho)).
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<Complex64>> = (0..4).map(|_| random_interior(n, lim, true, &mut rng)).collect();
    let x = SparseOp::position(n);
    let p = SparseOp::momentum(n);
    for (name, op) in [("O+", &s.o_plus), ("L1+", &s.l1_plus), ("L2+", &s.l2_plus)] {
        for (oname, o) in [("x", &x), ("p", &p)] {
            let worst = samples.iter().map(|r| o.expectation(&op.apply(r)).norm()).fold(0.0, f64::max);
            out.push(AlgebraCheck::new(&format!("tr({oname} {name}(rho)) = 0"), worst, tol));
        }
    }

    // Displacement generator: trace annihilation and adjoint symmetry.
    let general: Vec<Vec<Complex64>> = (0..4).map(|_| random_interior(n, lim, false, &mut rng)).collect();
    let worst_tr = general.iter().map(|r| trace(&d.apply(r), n).norm()).fold(0.0, f64::max);
    out.push(AlgebraCheck::new("tr(D(z) rho) = 0", worst_tr, 1e-11));
    let worst_adj = general
        .iter()
        .map(|r| {
            let lhs = d.apply(&dagger(r, n));
            let rhs = dagger(&d.apply(r), n);
            max_abs(&lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect::<Vec<_>>())
        })
        .fold(0.0, f64::max);
    out.push(AlgebraCheck::new("D(z)(rho^dag) = (D(z) rho)^dag", worst_adj, tol));
    for (name, op) in [("L0", &s.liouvillian), ("L_z", &s.displaced_liouvillian)] {
        let worst = general.iter().map(|r| trace(&op.apply(r), n).norm()).fold(0.0, f64::max);
        out.push(AlgebraCheck::new(&format!("tr({name} rho) = 0"), worst, tol));
        let worst_h = general
            .iter()
            .map(|r| {
                let lhs = op.apply(&dagger(r, n));
                let rhs = dagger(&op.apply(r), n);
                max_abs(&lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect::<Vec<_>>())
            })
            .fold(0.0, f64::max);
        out.push(AlgebraCheck::new(&format!("{name}(rho^dag) = ({name} rho)^dag"), worst_h, tol));
    }
    Ok(out)
}
