//! Run configuration: preset choice, flat key=value overrides, seeds.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::SolverConfig;
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Keys accepted by `--set` and config files.
pub const OVERRIDE_KEYS: &[&str] = &[
    "n_atoms",
    "g_c",
    "g",
    "j",
    "omega",
    "delta_s",
    "delta_q",
    "kappa_p",
    "kappa_s",
    "gamma_s",
    "gamma_c",
    "alpha0",
    "compensate_stark",
    "pump_cutoff",
    "signal_cutoff",
    "rtol",
    "atol",
    "max_step",
    "jump_tol",
    "ntraj",
    "t_end",
    "samples",
    "method",
    "memory_limit_gb",
];

/// Which solver integrates a quantum run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Master equation up to [`AUTO_MASTER_DIM`], trajectories above.
    Auto,
    Master,
    Trajectories,
}

/// Largest Hilbert-space dimension `Method::Auto` hands to the master equation.
pub const AUTO_MASTER_DIM: usize = 1024;

pub const DEFAULT_MEMORY_LIMIT_GB: f64 = 8.0;

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "me" | "master" | "mesolve" => Ok(Method::Master),
            "mc" | "trajectories" | "mcsolve" => Ok(Method::Trajectories),
            _ => Err(Error::Usage(format!("unknown method '{s}' (auto, me, mc)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub preset: String,
    pub overrides: BTreeMap<String, String>,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Trajectory count; `None` keeps the preset's value.
    pub ntraj: Option<usize>,
    pub quick: bool,
}

impl ExperimentConfig {
    pub fn new(preset: impl Into<String>) -> Self {
        Self {
            preset: preset.into(),
            overrides: BTreeMap::new(),
            out_dir: PathBuf::from("out"),
            seed: 0,
            ntraj: None,
            quick: false,
        }
    }

    /// Records one override after checking the key and the value's syntax.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        check_value(key, value)?;
        self.overrides.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Parses `key=value`.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("expected key=value, got '{assignment}'")))?;
        self.set(k, v)
    }

    /// Merges a config file; later `set` calls win over file entries.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (k, v) in parse_config_text(&text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !super::presets::PRESETS.iter().any(|p| p.name == self.preset) {
            return Err(Error::Usage(format!(
                "unknown preset '{}'; run list-presets for the registered names",
                self.preset
            )));
        }
        for (k, v) in &self.overrides {
            check_value(k, v)?;
        }
        if self.overrides.contains_key("g") && self.overrides.contains_key("g_c") {
            return Err(Error::Usage("set either g or g_c, not both".into()));
        }
        if self.ntraj == Some(0) {
            return Err(Error::Usage("--traj must be >= 1".into()));
        }
        Ok(())
    }

    pub fn memory_limit_bytes(&self) -> Result<f64> {
        let gb = match self.overrides.get("memory_limit_gb") {
            Some(v) => parse_f64(v)?,
            None => DEFAULT_MEMORY_LIMIT_GB,
        };
        Ok(gb * 1024.0 * 1024.0 * 1024.0)
    }

    pub fn method(&self) -> Result<Method> {
        self.overrides.get("method").map_or(Ok(Method::Auto), |m| m.parse())
    }
}

/// Flat `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("config line {}: expected key = value", no + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn check_value(key: &str, value: &str) -> Result<()> {
    match key {
        "n_atoms" | "pump_cutoff" | "signal_cutoff" | "ntraj" | "samples" => parse_usize(value).map(drop),
        "omega" | "alpha0" => parse_complex(value).map(drop),
        "compensate_stark" => parse_bool(value).map(drop),
        "method" => value.parse::<Method>().map(drop),
        k if OVERRIDE_KEYS.contains(&k) => parse_f64(value).map(drop),
        _ => Err(Error::Usage(format!("unknown override key '{key}'"))),
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Usage(format!("'{s}' is not a number")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse::<usize>().map_err(|_| Error::Usage(format!("'{s}' is not a non-negative integer")))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Usage(format!("'{s}' is not a boolean"))),
    }
}

/// Parses `1.5`, `i`, `-2i`, `0.3+1.2i`, `1e-3-4e2i`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let bad = || Error::Usage(format!("'{s}' is not a complex number"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return Ok(C64::new(t.parse().map_err(|_| bad())?, 0.0));
    };
    // split at the last sign that is not the leading one or part of an exponent
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let imag = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => Ok(C64::new(body[..k].parse().map_err(|_| bad())?, imag(&body[k..])?)),
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

/// Applies physics overrides. `n_atoms` is applied first and keeps `g_c`.
pub fn apply_model_overrides(p: &mut ModelParams, ov: &BTreeMap<String, String>) -> Result<()> {
    if let Some(v) = ov.get("n_atoms") {
        let g_c = p.g_c();
        p.n_atoms = parse_usize(v)?;
        p.set_g_c(g_c);
    }
    for (k, v) in ov {
        match k.as_str() {
            "g_c" => p.set_g_c(parse_f64(v)?),
            "g" => p.g = parse_f64(v)?,
            "j" => p.j = parse_f64(v)?,
            "omega" => p.omega = parse_complex(v)?,
            "delta_s" => p.delta_s = parse_f64(v)?,
            "delta_q" => p.delta_q = parse_f64(v)?,
            "kappa_p" => p.kappa_p = parse_f64(v)?,
            "kappa_s" => p.kappa_s = parse_f64(v)?,
            "gamma_s" => p.gamma_s = parse_f64(v)?,
            "gamma_c" => p.gamma_c = parse_f64(v)?,
            "alpha0" => p.alpha0 = parse_complex(v)?,
            "compensate_stark" => p.compensate_stark = parse_bool(v)?,
            "pump_cutoff" => p.pump_cutoff = Some(parse_usize(v)?),
            "signal_cutoff" => p.signal_cutoff = Some(parse_usize(v)?),
            _ => {}
        }
    }
    p.validate()
}

pub fn apply_solver_overrides(cfg: &mut SolverConfig, ov: &BTreeMap<String, String>) -> Result<()> {
    for (k, v) in ov {
        match k.as_str() {
            "rtol" => cfg.rtol = parse_f64(v)?,
            "atol" => cfg.atol = parse_f64(v)?,
            "max_step" => cfg.max_step = Some(parse_f64(v)?),
            "jump_tol" => cfg.jump_tol = parse_f64(v)?,
            "ntraj" => cfg.ntraj = parse_usize(v)?,
            _ => {}
        }
    }
    cfg.validate()
}

/// Grid overrides `(t_end, samples)` on top of a preset grid.
pub fn apply_grid_overrides(t_end: &mut f64, samples: &mut usize, ov: &BTreeMap<String, String>) -> Result<()> {
    if let Some(v) = ov.get("t_end") {
        *t_end = parse_f64(v)?;
    }
    if let Some(v) = ov.get("samples") {
        *samples = parse_usize(v)?;
    }
    Ok(())
}
