//! Run configuration: a JSON document with dotted-path overrides and sweep specifications.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::driving::ForceModel;
use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, GridSpec};
use crate::model::{renormalized_frequency, ModelParams, Regime};
use crate::propagator::DriveSpec;

/// Largest admitted `growth rate * t_max` in the unstable regime.
pub const MAX_GROWTH_EXPONENT: f64 = 50.0;
/// Default number of output times.
pub const DEFAULT_SAMPLES: usize = 1000;

/// Data products of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Trajectory,
    Wigner,
    Ellipse,
    Spectrum,
    Verify,
}

/// Truncation and count of the dense spectrum output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_k")]
    pub k: usize,
}

fn default_cutoff() -> usize {
    24
}

fn default_k() -> usize {
    20
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        SpectrumSpec { cutoff: default_cutoff(), k: default_k() }
    }
}

/// A complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ModelParams,
    pub initial: GaussianState,
    #[serde(default)]
    pub force: Option<ForceModel>,
    /// Constant drive that settles at this `(q, p)`; exclusive with `force`.
    #[serde(default)]
    pub target: Option<[f64; 2]>,
    pub t_max: f64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub outputs: Vec<OutputKind>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Time of the Wigner snapshot; defaults to `t_max`.
    #[serde(default)]
    pub wigner_time: Option<f64>,
    #[serde(default)]
    pub spectrum: SpectrumSpec,
    #[serde(default)]
    pub log_grid: bool,
}

impl RunConfig {
    /// Parses and validates a JSON value.
    pub fn from_value(v: Value) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses and validates JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_value(v)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Config(format!("t_max must be > 0, got {}", self.t_max)));
        }
        if self.n_samples < 2 {
            return Err(Error::Config(format!("n_samples must be >= 2, got {}", self.n_samples)));
        }
        if self.force.is_some() && self.target.is_some() {
            return Err(Error::Config("give either force or target, not both".into()));
        }
        if let Some(f) = &self.force {
            f.validate()?;
        }
        if let Some([q, p]) = self.target {
            if !(q.is_finite() && p.is_finite()) {
                return Err(Error::Config("target must be finite".into()));
            }
        }
        if self.outputs.contains(&OutputKind::Wigner) && self.grid.is_none() {
            return Err(Error::Config("wigner output requires a grid".into()));
        }
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        if let Some(t) = self.wigner_time {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("wigner_time must be >= 0, got {t}")));
            }
        }
        if self.spectrum.cutoff < 2 || self.spectrum.cutoff > crate::fock::density::MAX_CUTOFF {
            return Err(Error::Config(format!("spectrum cutoff must be in 2..=64, got {}", self.spectrum.cutoff)));
        }
        let info = renormalized_frequency(&self.params);
        if info.regime == Regime::Unstable {
            let growth = info.omega_abs - 0.5 * self.params.gamma();
            if growth * self.t_max > MAX_GROWTH_EXPONENT {
                return Err(Error::Unstable(format!(
                    "growth rate {growth} over t_max = {} exceeds e^{MAX_GROWTH_EXPONENT}",
                    self.t_max
                )));
            }
        }
        Ok(())
    }

    /// The force in effect, with `target` resolved to a constant drive.
    pub fn effective_force(&self) -> Option<ForceModel> {
        match (&self.force, self.target) {
            (Some(f), _) => Some(f.clone()),
            (None, Some([q, p])) => {
                let lam = DriveSpec::from_target(&self.params, q, p).lambda();
                Some(ForceModel::Constant { lr: lam.re, li: lam.im })
            }
            (None, None) => None,
        }
    }

    /// Output times: uniform on `[0, t_max]`, or `0` followed by a geometric grid from
    /// `1e-4 t_max` to `t_max` when `log_grid` is set.
    pub fn times(&self) -> Vec<f64> {
        time_grid(self.t_max, self.n_samples, self.log_grid)
    }
}

/// Uniform or logarithmic sample grid with exact endpoints.
pub fn time_grid(t_max: f64, n: usize, log: bool) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if log {
        out.push(0.0);
        let m = n - 1;
        let lo = (1e-4 * t_max).ln();
        let hi = t_max.ln();
        for i in 0..m {
            let f = if m == 1 { 1.0 } else { i as f64 / (m - 1) as f64 };
            out.push((lo + (hi - lo) * f).exp());
        }
    } else {
        for i in 0..n {
            out.push(t_max * i as f64 / (n - 1) as f64);
        }
    }
    out[n - 1] = t_max;
    out
}

/// Parses a `--set` value: JSON when it parses, a string otherwise.
fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Writes `value` at a dotted `path`, creating objects on the way.
pub fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<()> {
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(Error::Config(format!("invalid key '{path}'")));
    }
    let mut cur = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if cur.is_null() {
            *cur = Value::Object(Default::default());
        }
        let Value::Object(map) = cur else {
            return Err(Error::Config(format!("'{}' is not an object", parts[..i].join("."))));
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        cur = map.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("loop returns on the last component")
}

/// Applies a `key=value` override.
pub fn apply_set(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected key=value, got '{assignment}'")))?;
    set_path(doc, key.trim(), parse_value(raw.trim()))
}

/// A `key=start:stop:n` parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub key: String,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = || Error::Config(format!("expected key=start:stop:n, got '{spec}'"));
        let (key, range) = spec.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(bad());
        };
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if n == 0 || !a.is_finite() || !b.is_finite() {
            return Err(bad());
        }
        let values = if n == 1 { vec![a] } else { (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect() };
        Ok(Sweep { key: key.trim().to_string(), values })
    }

    /// One configuration document per sweep point.
    pub fn documents(&self, base: &Value) -> Result<Vec<Value>> {
        self.values
            .iter()
            .map(|&v| {
                let mut doc = base.clone();
                set_path(&mut doc, &self.key, Value::from(v))?;
                Ok(doc)
            })
            .collect()
    }
}
