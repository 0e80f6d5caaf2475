//! Gauss-Hermite rules and vector-valued adaptive Simpson quadrature.

use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Gauss-Hermite rule in scaled form: `int f(x) dx ~ sum_i weights[i] f(nodes[i])`
/// is exact when `f(x) e^{x^2}` is a polynomial of degree below `2n`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds the `n`-point rule: eigenvalues of the Jacobi matrix give the starting
    /// nodes, which Newton iteration on the normalized Hermite functions then polishes.
    pub fn new(n: usize) -> Result<Self> {
        if !(1..=400).contains(&n) {
            return Err(Error::InvalidParameter(format!("Gauss-Hermite order must be in 1..=400, got {n}")));
        }
        let jacobi = Mat::<f64>::from_fn(n, n, |i, j| {
            if i + 1 == j || j + 1 == i {
                (0.5 * i.max(j) as f64).sqrt()
            } else {
                0.0
            }
        });
        let mut guesses = jacobi
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Integration(format!("Jacobi eigenvalues failed: {e:?}")))?;
        guesses.sort_by(f64::total_cmp);

        let pim4 = std::f64::consts::PI.powf(-0.25);
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Work on the non-negative half and mirror.
            let mut z = guesses[n - 1 - i].max(0.0);
            let mut converged = false;
            let mut dpsi = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4 * (-0.5 * z * z).exp();
                let mut p2 = 0.0;
                for j in 1..=n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                // psi_n'(z) at a root of psi_n reduces to sqrt(2n) psi_{n-1}(z).
                dpsi = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / dpsi;
                if (z - z1).abs() <= 3e-15 * z.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Integration(format!("Gauss-Hermite root {i} of order {n} did not converge")));
            }
            let w = 2.0 / (dpsi * dpsi);
            nodes[n - 1 - i] = z;
            nodes[i] = -z;
            weights[n - 1 - i] = w;
            weights[i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(GaussHermite { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: f64,
    pub evaluations: usize,
}

/// Adaptive Simpson integration of a vector-valued function on `[a, b]` to an
/// absolute tolerance, stopping with an error after `max_evals` evaluations.
pub fn adaptive_simpson<const N: usize, F>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_evals: usize,
) -> Result<Integral<N>>
where
    F: Fn(f64) -> [f64; N],
{
    if b == a {
        return Ok(Integral { value: [0.0; N], error: 0.0, evaluations: 0 });
    }
    struct Seg<const N: usize> {
        a: f64,
        b: f64,
        fa: [f64; N],
        fm: [f64; N],
        fb: [f64; N],
        whole: [f64; N],
        tol: f64,
        depth: u32,
    }
    let simpson = |h: f64, fa: &[f64; N], fm: &[f64; N], fb: &[f64; N]| -> [f64; N] {
        std::array::from_fn(|i| h / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i]))
    };
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let mut evals = 3;
    let whole = simpson(b - a, &fa, &fm, &fb);
    let mut stack = vec![Seg { a, b, fa, fm, fb, whole, tol, depth: 0 }];
    let mut total = [0.0; N];
    let mut err_total: f64 = 0.0;
    // Initial coarse pass subdivides a few levels so narrow features are not missed.
    const MIN_DEPTH: u32 = 4;
    const MAX_DEPTH: u32 = 60;
    while let Some(s) = stack.pop() {
        let m = 0.5 * (s.a + s.b);
        let lm = 0.5 * (s.a + m);
        let rm = 0.5 * (m + s.b);
        let flm = f(lm);
        let frm = f(rm);
        evals += 2;
        if evals > max_evals {
            return Err(Error::Quadrature { estimate: err_total.max(s.tol), evaluations: evals });
        }
        let left = simpson(m - s.a, &s.fa, &flm, &s.fm);
        let right = simpson(s.b - m, &s.fm, &frm, &s.fb);
        let diff = (0..N).map(|i| (left[i] + right[i] - s.whole[i]).abs()).fold(0.0, f64::max);
        if s.depth >= MIN_DEPTH && (diff <= 15.0 * s.tol || s.depth >= MAX_DEPTH) {
            if s.depth >= MAX_DEPTH && diff > 15.0 * s.tol {
                return Err(Error::Quadrature { estimate: diff / 15.0, evaluations: evals });
            }
            for i in 0..N {
                total[i] += left[i] + right[i] + (left[i] + right[i] - s.whole[i]) / 15.0;
            }
            err_total += diff / 15.0;
        } else {
            let t = 0.5 * s.tol;
            stack.push(Seg { a: m, b: s.b, fa: s.fm, fm: frm, fb: s.fb, whole: right, tol: t, depth: s.depth + 1 });
            stack.push(Seg { a: s.a, b: m, fa: s.fa, fm: flm, fb: s.fm, whole: left, tol: t, depth: s.depth + 1 });
        }
    }
    Ok(Integral { value: total, error: err_total, evaluations: evals })
}
