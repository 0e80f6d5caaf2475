//! File writers with platform-stable float formatting.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::driving::TrajectoryRow;
use crate::error::Result;

/// Seventeen significant digits in scientific notation, stable across platforms.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        // Normalizes negative zero.
        return "0.0000000000000000e0".to_string();
    }
    format!("{v:.16e}")
}

/// Header of trajectory files.
pub const TRAJECTORY_HEADER: [&str; 10] = ["t", "q", "p", "mu", "nu", "kappa", "sigma_xx", "sigma_pp", "sigma_xp", "R"];

/// Writes trajectory rows as CSV.
pub fn write_trajectory<W: Write>(w: W, rows: &[TrajectoryRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRAJECTORY_HEADER)?;
    for r in rows {
        let vals = [r.t, r.q, r.p, r.mu, r.nu, r.kappa, r.sigma_xx, r.sigma_pp, r.sigma_xp, r.r];
        out.write_record(vals.iter().map(|v| fmt_f64(*v)))?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `(Q, P, W)` samples as CSV.
pub fn write_wigner<W: Write>(w: W, values: &[(f64, f64, f64)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["Q", "P", "W"])?;
    for (q, p, v) in values {
        out.write_record([fmt_f64(*q), fmt_f64(*p), fmt_f64(*v)])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `(index, re, im)` rows as CSV.
pub fn write_eigenvalues<W: Write>(w: W, values: &[Complex64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "re", "im"])?;
    for (i, v) in values.iter().enumerate() {
        out.write_record([i.to_string(), fmt_f64(v.re), fmt_f64(v.im)])?;
    }
    out.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized, W: Write>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Creates `dir` and returns the path of `name` inside it.
pub fn prepare(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}

/// Creates a buffered file for writing.
pub fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(std::io::BufWriter::new(fs::File::create(path)?))
}
