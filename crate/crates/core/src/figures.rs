//! Data sets of the phase-space figures: constant, impulsive and harmonic driving in the
//! underdamped, critical and overdamped regimes.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{time_grid, DEFAULT_SAMPLES};
use crate::driving::{ellipse_from_response, harmonic_response, trajectory, ForceModel};
use crate::error::Result;
use crate::gaussian::GaussianState;
use crate::model::{renormalized_frequency, ModelParams};
use crate::output::{create, write_json, write_trajectory};
use crate::propagator::DriveSpec;

/// One emitted file and the run behind it.
#[derive(Debug, Clone, Serialize)]
pub struct FigureEntry {
    pub file: String,
    pub figure: String,
    pub regime: &'static str,
    pub params: ModelParams,
    pub omega: Complex64,
    pub initial: [f64; 2],
    pub force: Option<ForceModel>,
    pub t_max: f64,
}

/// A single trajectory request.
struct Panel {
    figure: &'static str,
    name: String,
    params: ModelParams,
    q0: f64,
    p0: f64,
    force: Option<ForceModel>,
    t_max: f64,
}

fn params(omega0: f64, theta1: f64, theta2: f64) -> Result<ModelParams> {
    ModelParams::with_nbar(omega0, 1.0, theta1, theta2, 0.0, 0.0, 0.0)
}

fn regime_label(p: &ModelParams) -> &'static str {
    renormalized_frequency(p).regime.as_str()
}

fn impulse(amp_a: f64, amp_b: f64, at: f64) -> ForceModel {
    ForceModel::Impulse { amp_a, a_time: at, amp_b, b_time: at }
}

fn panels() -> Result<Vec<Panel>> {
    let mut out = Vec::new();
    // Constant drive settling at (2, -2).
    for w0 in [5.0, FRAC_1_SQRT_2, 0.6] {
        let p = params(w0, 1.0, 1.0)?;
        let lam = DriveSpec::from_target(&p, 2.0, -2.0).lambda();
        let label = regime_label(&p);
        out.push(Panel { figure: "1a", name: format!("fig1a_{label}_free"), params: p, q0: 1.0, p0: 1.0, force: None, t_max: 15.0 });
        out.push(Panel {
            figure: "1a",
            name: format!("fig1a_{label}_driven"),
            params: p,
            q0: 1.0,
            p0: 1.0,
            force: Some(ForceModel::Constant { lr: lam.re, li: lam.im }),
            t_max: 15.0,
        });
    }
    // Impulses: the strengths quoted in the text and in the caption.
    for (variant, amp, at) in [("text", 2.0, 0.6), ("caption", 0.5, 0.5)] {
        for w0 in [2.0, FRAC_1_SQRT_2, 0.6] {
            let p = params(w0, 1.0, 1.0)?;
            let label = regime_label(&p);
            let stem = format!("fig1b_{variant}_{label}");
            out.push(Panel { figure: "1b", name: format!("{stem}_free"), params: p, q0: -2.0, p0: 2.0, force: None, t_max: 10.0 });
            out.push(Panel {
                figure: "1b",
                name: format!("{stem}_real_impulse"),
                params: p,
                q0: -2.0,
                p0: 2.0,
                force: Some(impulse(amp, 0.0, at)),
                t_max: 10.0,
            });
            if w0 == 2.0 {
                out.push(Panel {
                    figure: "1b",
                    name: format!("{stem}_imaginary_impulse"),
                    params: p,
                    q0: -2.0,
                    p0: 2.0,
                    force: Some(impulse(0.0, amp, at)),
                    t_max: 10.0,
                });
            }
        }
    }
    // Harmonic drive R = 1, Omega = 1.
    for w0 in [2.5, 13f64.sqrt() / 4.0, 0.8] {
        let p = params(w0, 1.0, 1.5)?;
        let label = regime_label(&p);
        out.push(Panel { figure: "2", name: format!("fig2_{label}_free"), params: p, q0: 1.0, p0: 1.0, force: None, t_max: 40.0 });
        out.push(Panel {
            figure: "2",
            name: format!("fig2_{label}_driven"),
            params: p,
            q0: 1.0,
            p0: 1.0,
            force: Some(ForceModel::Harmonic { amp: 1.0, omega: 1.0 }),
            t_max: 40.0,
        });
    }
    Ok(out)
}

/// Renders every figure data set and `manifest.json` in memory, as `(file name, bytes)`.
pub fn render_figures() -> Result<Vec<(String, Vec<u8>)>> {
    let mut manifest = Vec::new();
    let mut files = Vec::new();
    for panel in panels()? {
        let initial = GaussianState::coherent(panel.q0, panel.p0)?;
        let times = time_grid(panel.t_max, DEFAULT_SAMPLES, false);
        let rows = trajectory(&panel.params, &initial, panel.force.as_ref(), &times)?;
        let file = format!("{}.csv", panel.name);
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &rows)?;
        files.push((file.clone(), buf));
        manifest.push(FigureEntry {
            file,
            figure: panel.figure.to_string(),
            regime: regime_label(&panel.params),
            params: panel.params,
            omega: renormalized_frequency(&panel.params).omega(),
            initial: [panel.q0, panel.p0],
            force: panel.force.clone(),
            t_max: panel.t_max,
        });
        if let (Some(ForceModel::Harmonic { amp, omega }), "2") = (&panel.force, panel.figure) {
            let h = harmonic_response(&panel.params, *amp, *omega)?;
            let g = ellipse_from_response(&h)?;
            let mut buf = Vec::new();
            write_json(&mut buf, &serde_json::json!({ "ellipse": g, "discriminant": g.discriminant(), "response": h }))?;
            files.push((format!("fig2_{}_ellipse.json", regime_label(&panel.params)), buf));
        }
    }
    let mut buf = Vec::new();
    write_json(&mut buf, &manifest)?;
    files.push(("manifest.json".to_string(), buf));
    Ok(files)
}

/// Writes every figure data set and `manifest.json` into `dir`; returns the paths in order.
pub fn write_figures(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (name, bytes) in render_figures()? {
        let path = dir.join(name);
        let mut f = create(&path)?;
        f.write_all(&bytes)?;
        f.flush()?;
        paths.push(path);
    }
    Ok(paths)
}
