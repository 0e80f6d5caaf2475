//! Cross-checks between independent implementations: the Gauss-Hermite rule against a
//! reference crate, and the closed-form Gaussian propagation against the number basis.

use std::num::NonZeroUsize;

use qosc::driving::forced_trajectory;
use qosc::fock::evolve::{evolve_driven, exp_apply};
use qosc::fock::{build_superops, evolve_density, gaussian_to_density, liouvillian, FockDensity};
use qosc::propagator::{evolve_covariance, free_displacement};
use qosc::quadrature::GaussHermite;
use qosc::verify::{covariance_initial_state, covariance_sets};
use qosc::{ForceModel, GaussianState, ModelParams};

#[test]
fn gauss_hermite_matches_reference_rule() {
    for n in [1, 2, 7, 20, 41, 60] {
        let ours = GaussHermite::new(n).unwrap();
        let reference = gauss_quad::GaussHermite::new(NonZeroUsize::new(n).unwrap());
        let pairs: Vec<(f64, f64)> = reference.iter().map(|(x, w)| (*x, *w)).collect();
        assert_eq!(pairs.len(), ours.nodes.len());
        let largest = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
        for (i, (x, w)) in pairs.iter().enumerate() {
            assert!((ours.nodes[i] - x).abs() < 1e-10 * (1.0 + x.abs()), "n = {n}, node {i}");
            // The reference weights belong to the weight function e^{-x^2} and come from
            // eigenvector components, accurate relative to the largest weight only.
            let ours_w = ours.weights[i] * (-x * x).exp();
            assert!((ours_w - w).abs() < 1e-12 * largest, "n = {n}, weight {i}");
        }
    }
}

#[test]
fn gauss_hermite_integrates_gaussian_moments() {
    let rule = GaussHermite::new(30).unwrap();
    // int x^{2k} e^{-x^2} dx = Gamma(k + 1/2).
    let mut exact = std::f64::consts::PI.sqrt();
    for k in 0..20 {
        let sum: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(2 * k) * (-x * x).exp()).sum();
        assert!((sum - exact).abs() < 1e-11 * exact, "k = {k}");
        exact *= k as f64 + 0.5;
    }
}

fn assert_moments_agree(params: &ModelParams, s0: &GaussianState, cutoff: usize, t: f64) {
    let rho = evolve_density(&liouvillian(params, cutoff), &gaussian_to_density(s0, cutoff).unwrap(), t).unwrap();
    let m = rho.moments();
    let (q, p) = free_displacement(params, s0.q(), s0.p(), t).unwrap();
    let cov = evolve_covariance(params, s0, t).unwrap().second_moments();
    assert!((m.q - q).abs() < 1e-6 && (m.p - p).abs() < 1e-6, "first moments at t = {t}");
    assert!(m.second_moments().max_abs_diff(&cov) < 1e-6, "second moments at t = {t}");
}

#[test]
fn gaussian_and_number_basis_moments_agree() {
    let s0 = covariance_initial_state();
    for (_, params) in covariance_sets() {
        for t in [0.3, 1.5] {
            assert_moments_agree(&params, &s0, 40, t);
        }
    }
}

#[test]
fn squeezing_terms_act_the_same_in_both_representations() {
    // Each squeezing coefficient alone, on a displaced squeezed state.
    let s0 = GaussianState::new(0.8, 0.3, 0.2, 0.5, -0.4).unwrap();
    for (t1, t2) in [(0.6, 0.0), (0.0, 0.6), (-0.4, 0.5)] {
        let params = ModelParams::new(1.0, 0.7, t1, t2, -0.7, 0.0, 0.0).unwrap();
        assert_moments_agree(&params, &s0, 40, 1.0);
    }
}

#[test]
fn driven_number_basis_matches_closed_form() {
    let params = ModelParams::new(1.3, 0.9, 0.4, -0.3, -1.2, 0.1, 0.0).unwrap();
    let s0 = GaussianState::coherent(0.3, -0.2).unwrap();
    let forces = [
        ForceModel::Heaviside { amp_a: 0.4, a_time: 0.5, amp_b: -0.3, b_time: 1.2 },
        ForceModel::Impulse { amp_a: 0.5, a_time: 0.7, amp_b: 0.2, b_time: 1.1 },
        ForceModel::Harmonic { amp: 0.3, omega: 1.1 },
    ];
    let times = [0.5, 1.0, 2.0];
    for force in &forces {
        let rhos = evolve_driven(&params, force, &gaussian_to_density(&s0, 36).unwrap(), &times).unwrap();
        for (t, rho) in times.iter().zip(&rhos) {
            let m = rho.moments();
            let (q, p) = forced_trajectory(&params, force, s0.q(), s0.p(), *t).unwrap();
            assert!((m.q - q).abs() < 1e-6 && (m.p - p).abs() < 1e-6, "{force:?} at t = {t}");
        }
    }
}

#[test]
fn exponentiated_squeezing_generators_follow_the_squeezing_laws() {
    let n = 48;
    let s0 = GaussianState::new(0.8, 0.3, 0.2, 0.0, 0.0).unwrap();
    let m0 = s0.second_moments();
    let rho = gaussian_to_density(&s0, n).unwrap();
    let set = build_superops(&ModelParams::gksl(1.0, 1.0, 0.0).unwrap(), None, n);
    let apply = |op, theta: f64| {
        let v = exp_apply(op, rho.as_slice(), theta).unwrap();
        FockDensity::from_vec_unchecked(n, v).unwrap().moments()
    };
    let th: f64 = 0.35;
    let (ch, sh) = (th.cosh(), th.sinh());
    let half = 0.5 * (m0.sxx + m0.spp);

    // e^{theta iM1}: hyperbolic rotation of (half trace, sigma_xp), difference kept.
    let m = apply(&set.i_m1, th);
    assert!((0.5 * (m.sxx + m.spp) - (ch * half + sh * m0.sxp)).abs() < 1e-8);
    assert!((m.sxp - (sh * half + ch * m0.sxp)).abs() < 1e-8);
    assert!(((m.sxx - m.spp) - (m0.sxx - m0.spp)).abs() < 1e-8);

    // e^{theta iM2}: stretches x and compresses p.
    let m = apply(&set.i_m2, th);
    assert!((m.sxx - th.exp() * m0.sxx).abs() < 1e-8);
    assert!((m.spp - (-th).exp() * m0.spp).abs() < 1e-8);
    assert!((m.sxp - m0.sxp).abs() < 1e-8);
}
