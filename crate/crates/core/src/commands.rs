//! File-producing front-end operations shared by the binary and the tests.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{OutputKind, RunConfig, Sweep};
use crate::driving::{ellipse_from_response, forced_trajectory, harmonic_response, trajectory, EllipseGeometry, ForceModel};
use crate::error::{Error, Result};
use crate::fock::spectrum::{analytic_grid, ep_clusters, match_nearest, Cluster, EigenMatch};
use crate::fock::{full_spectrum, liouvillian};
use crate::gaussian::{grid_integral, wigner_grid, GaussianState};
use crate::model::{renormalized_frequency, Regime};
use crate::output::{create, write_eigenvalues, write_json, write_trajectory, write_wigner};
use crate::propagator::{evolve_covariance, free_displacement};
use crate::verify::{self, Level};

/// Gaussian state of the configured run at time `t`.
pub fn state_at(cfg: &RunConfig, t: f64) -> Result<GaussianState> {
    let (q, p) = match cfg.effective_force() {
        Some(f) => forced_trajectory(&cfg.params, &f, cfg.initial.q(), cfg.initial.p(), t)?,
        None => free_displacement(&cfg.params, cfg.initial.q(), cfg.initial.p(), t)?,
    };
    evolve_covariance(&cfg.params, &cfg.initial, t)?.state(q, p)
}

/// Writes `trajectory.csv`.
pub fn cmd_trajectory(cfg: &RunConfig, dir: &Path) -> Result<PathBuf> {
    let force = cfg.effective_force();
    let rows = trajectory(&cfg.params, &cfg.initial, force.as_ref(), &cfg.times())?;
    let path = dir.join("trajectory.csv");
    write_trajectory(create(&path)?, &rows)?;
    Ok(path)
}

/// Writes `wigner.csv` at the configured snapshot time.
pub fn cmd_wigner(cfg: &RunConfig, dir: &Path) -> Result<PathBuf> {
    let grid = cfg.grid.ok_or_else(|| Error::Config("wigner output requires a grid".into()))?;
    let state = state_at(cfg, cfg.wigner_time.unwrap_or(cfg.t_max))?;
    let values = wigner_grid(&state, &grid)?;
    let path = dir.join("wigner.csv");
    write_wigner(create(&path)?, &values)?;
    Ok(path)
}

/// Conic data of the steady orbit under harmonic driving.
#[derive(Debug, Clone, Serialize)]
pub struct EllipseReport {
    #[serde(flatten)]
    pub geometry: EllipseGeometry,
    pub discriminant: f64,
    /// Largest conic residual over one sampled drive period.
    pub max_residual: f64,
    pub regime: &'static str,
}

/// Ellipse of the harmonic force in `cfg`.
pub fn ellipse_report(cfg: &RunConfig) -> Result<EllipseReport> {
    let Some(ForceModel::Harmonic { amp, omega }) = cfg.effective_force() else {
        return Err(Error::Config("ellipse output requires a harmonic force".into()));
    };
    let h = harmonic_response(&cfg.params, amp, omega)?;
    let geometry = ellipse_from_response(&h)?;
    let period = 2.0 * std::f64::consts::PI / omega.abs();
    let max_residual = (0..256)
        .map(|i| {
            let (q, p) = h.steady(period * i as f64 / 256.0);
            geometry.residual(q, p).abs()
        })
        .fold(0.0, f64::max);
    Ok(EllipseReport {
        geometry,
        discriminant: geometry.discriminant(),
        max_residual,
        regime: renormalized_frequency(&cfg.params).regime.as_str(),
    })
}

/// Writes `ellipse.json`.
pub fn cmd_ellipse(cfg: &RunConfig, dir: &Path) -> Result<PathBuf> {
    let report = ellipse_report(cfg)?;
    let path = dir.join("ellipse.json");
    write_json(create(&path)?, &report)?;
    Ok(path)
}

/// Spectrum summary: analytic comparison and, at an exceptional point, coalescence clusters.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub cutoff: usize,
    pub regime: &'static str,
    pub omega: Complex64,
    pub matches: Vec<EigenMatch>,
    pub clusters: Vec<Cluster>,
}

/// Dense spectrum of the truncated generator, sorted by decreasing real part.
pub fn spectrum_report(cfg: &RunConfig) -> Result<(Vec<Complex64>, SpectrumReport)> {
    let n = cfg.spectrum.cutoff;
    let mut ev = full_spectrum(&liouvillian(&cfg.params, n))?;
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let info = renormalized_frequency(&cfg.params);
    let matches = match_nearest(&ev, &analytic_grid(&cfg.params, 4)?);
    let clusters = if info.regime == Regime::Critical { ep_clusters(&ev, cfg.params.gamma(), 4) } else { Vec::new() };
    let report = SpectrumReport { cutoff: n, regime: info.regime.as_str(), omega: info.omega(), matches, clusters };
    ev.truncate(cfg.spectrum.k);
    Ok((ev, report))
}

/// Writes `spectrum.csv` and `spectrum.json`.
pub fn cmd_spectrum(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let (ev, report) = spectrum_report(cfg)?;
    let csv = dir.join("spectrum.csv");
    write_eigenvalues(create(&csv)?, &ev)?;
    let json = dir.join("spectrum.json");
    write_json(create(&json)?, &report)?;
    Ok(vec![csv, json])
}

/// Runs one output kind into `dir`.
pub fn run_output(cfg: &RunConfig, kind: OutputKind, dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    match kind {
        OutputKind::Trajectory => Ok(vec![cmd_trajectory(cfg, dir)?]),
        OutputKind::Wigner => Ok(vec![cmd_wigner(cfg, dir)?]),
        OutputKind::Ellipse => Ok(vec![cmd_ellipse(cfg, dir)?]),
        OutputKind::Spectrum => cmd_spectrum(cfg, dir),
        OutputKind::Verify => {
            let report = verify::run(Level::Fast, seed)?;
            let path = dir.join("verify.json");
            write_json(create(&path)?, &report)?;
            Ok(vec![path])
        }
    }
}

/// Runs the outputs for every sweep point concurrently, into `dir/sweep_NNN/`.
pub fn run_sweep(base: &Value, sweep: &Sweep, kinds: &[OutputKind], dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let docs = sweep.documents(base)?;
    let configs = docs.into_iter().map(RunConfig::from_value).collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(dir)?;
    let manifest = dir.join("sweep.json");
    write_json(create(&manifest)?, sweep)?;
    let per_point: Vec<Vec<PathBuf>> = configs
        .par_iter()
        .enumerate()
        .map(|(i, cfg)| {
            let sub = dir.join(format!("sweep_{i:03}"));
            let mut files = Vec::new();
            for &k in kinds {
                files.extend(run_output(cfg, k, &sub, seed)?);
            }
            Ok(files)
        })
        .collect::<Result<_>>()?;
    let mut out = vec![manifest];
    out.extend(per_point.into_iter().flatten());
    Ok(out)
}

/// Trapezoidal norm of a Wigner snapshot, for sanity checks.
pub fn wigner_norm(cfg: &RunConfig) -> Result<f64> {
    let grid = cfg.grid.ok_or_else(|| Error::Config("wigner output requires a grid".into()))?;
    let state = state_at(cfg, cfg.wigner_time.unwrap_or(cfg.t_max))?;
    Ok(grid_integral(&grid, &wigner_grid(&state, &grid)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn cfg(v: Value) -> RunConfig {
        RunConfig::from_value(v).unwrap()
    }

    fn base() -> Value {
        json!({
            "params": {"omega0": 2.5, "gamma": 1.0, "theta1": 1.0, "theta2": 1.5, "nbar": 0.0},
            "initial": {"mu": 0.5, "nu": 0.0, "q": 1.0, "p": 1.0},
            "t_max": 5.0,
            "n_samples": 11
        })
    }

    #[test]
    fn vacuum_wigner_is_normalized() {
        let mut v = base();
        v["initial"] = json!({"mu": 0.5, "nu": 0.0});
        v["params"] = json!({"omega0": 1.0, "gamma": 1.0, "nbar": 0.0});
        v["grid"] = json!({"q_min": -8.0, "q_max": 8.0, "n_q": 161, "p_min": -8.0, "p_max": 8.0, "n_p": 161});
        v["wigner_time"] = json!(0.0);
        assert!((wigner_norm(&cfg(v)).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_force_at_origin_stays_put() {
        let mut v = base();
        v["initial"] = json!({"mu": 0.5, "nu": 0.0});
        let dir = tempfile::tempdir().unwrap();
        let path = cmd_trajectory(&cfg(v), dir.path()).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        for line in text.lines().skip(1) {
            let cols: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            assert_eq!((cols[1], cols[2]), (0.0, 0.0));
        }
    }

    #[test]
    fn ellipse_on_harmonic_drive() {
        let mut v = base();
        v["force"] = json!({"type": "harmonic", "R": 1.0, "Omega": 1.0});
        let r = ellipse_report(&cfg(v)).unwrap();
        assert!(r.discriminant > 0.0);
        assert!(r.max_residual < 1e-10);
        assert!(ellipse_report(&cfg(base())).is_err());
    }

    #[test]
    fn spectrum_at_ep_reports_clusters() {
        let mut v = base();
        v["params"] = json!({"omega0": 0.25, "gamma": 1.0, "theta1": 0.3, "theta2": 0.4, "eta0": -1.0});
        v["spectrum"] = json!({"cutoff": 16, "k": 6});
        let (ev, r) = spectrum_report(&cfg(v)).unwrap();
        assert_eq!(ev.len(), 6);
        assert_eq!(r.regime, "critical");
        assert_eq!(r.clusters.len(), 5);
        assert!(r.clusters[1].centroid_error < 1e-6);
    }

    #[test]
    fn sweep_writes_one_directory_per_point() {
        let dir = tempfile::tempdir().unwrap();
        let sweep = Sweep::parse("params.gamma=0.5:1.5:3").unwrap();
        let files = run_sweep(&base(), &sweep, &[OutputKind::Trajectory], dir.path(), 1).unwrap();
        assert_eq!(files.len(), 4);
        assert!(dir.path().join("sweep_002/trajectory.csv").exists());
    }
}
