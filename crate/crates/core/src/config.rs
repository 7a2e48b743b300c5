//! Run configuration in a flat `section.key = value` text format.
//!
//! ```text
//! # Cahn-Hilliard spinodal decomposition
//! model.name = ch
//! model.W = 1.0
//! grid.n = 256
//! grid.length = 16*pi
//! time.method = etd
//! time.h = 0.01
//! time.t_final = 1500
//! ic.kind = uniform_noise
//! ic.eta0 = 0.5
//! ic.noise = 0.02
//! ```
//!
//! Lines starting with `#` are comments, values may be quoted, and reals
//! accept a trailing `pi` factor (`16*pi`, `-pi`, `2pi`). Unknown keys are
//! rejected so that typos surface as errors instead of silent defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Precision};
use crate::integrators::Method;
use crate::models::{AdvDiffParams, BurgersParams, CHParams, ModelKind, ModelName, PFCParams};

pub const CONFIG_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub origin: f64,
}

impl GridConfig {
    pub fn build(&self, precision: Precision) -> Result<GridSpec> {
        Ok(GridSpec::new(self.dim, self.n, self.length, self.origin)?.with_precision(precision))
    }
}

/// Initial-condition recipe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `eta0 + noise * N(0, 1)` at every grid point.
    UniformNoise { eta0: f64, noise: f64 },
    /// `intensity` on `[x0, x0 + width)` along every axis, 0 elsewhere.
    TopHat { x0: f64, width: f64, intensity: f64 },
    /// `exp(-10 (x/2)^2)`, a product over axes in 2D.
    GaussianBump,
    /// `eta0 + epsilon * cos(k0 x)`; deterministic.
    CosineProbe { eta0: f64, epsilon: f64, k0: f64 },
}

impl InitialCondition {
    pub fn kind_name(&self) -> &'static str {
        match self {
            InitialCondition::UniformNoise { .. } => "uniform_noise",
            InitialCondition::TopHat { .. } => "top_hat",
            InitialCondition::GaussianBump => "gaussian_bump",
            InitialCondition::CosineProbe { .. } => "cosine_probe",
        }
    }
}

pub const IC_KINDS: &str = "uniform_noise, top_hat, gaussian_bump, cosine_probe";

/// Everything needed to reproduce one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelKind,
    pub grid: GridConfig,
    pub method: Method,
    pub h: f64,
    pub t_final: f64,
    pub frame_interval: f64,
    pub seed: u64,
    pub ic: InitialCondition,
    pub output_dir: PathBuf,
    pub precision: Precision,
}

/// Tolerance used when converting times to step counts.
const STEP_SLACK: f64 = 1e-9;

impl RunConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        self.grid.build(self.precision)
    }

    /// Number of steps to reach `t` (the first step with `n h >= t`).
    pub fn steps_to(&self, t: f64) -> u64 {
        (t / self.h - STEP_SLACK).ceil().max(0.0) as u64
    }

    pub fn total_steps(&self) -> u64 {
        self.steps_to(self.t_final)
    }

    pub fn frame_count(&self) -> u64 {
        (self.t_final / self.frame_interval + STEP_SLACK).floor() as u64
    }

    /// Step index at which frame `i` (1-based) is written.
    pub fn frame_step(&self, i: u64) -> u64 {
        self.steps_to(i as f64 * self.frame_interval)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid_spec()?;
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::config("time.h", format!("must be > 0, got {}", self.h)));
        }
        if !(self.frame_interval.is_finite() && self.frame_interval >= self.h) {
            return Err(Error::config(
                "time.frame_interval",
                format!("must be >= time.h ({}), got {}", self.h, self.frame_interval),
            ));
        }
        if !(self.t_final.is_finite() && self.t_final >= self.frame_interval) {
            return Err(Error::config(
                "time.t_final",
                format!(
                    "must be >= time.frame_interval ({}), got {}",
                    self.frame_interval, self.t_final
                ),
            ));
        }
        match self.ic {
            InitialCondition::UniformNoise { eta0, noise } => {
                finite("ic.eta0", eta0)?;
                if !(noise.is_finite() && noise >= 0.0) {
                    return Err(Error::config("ic.noise", format!("must be >= 0, got {noise}")));
                }
            }
            InitialCondition::TopHat { x0, width, intensity } => {
                finite("ic.x0", x0)?;
                finite("ic.intensity", intensity)?;
                if !(width.is_finite() && width > 0.0) {
                    return Err(Error::config("ic.width", format!("must be > 0, got {width}")));
                }
            }
            InitialCondition::GaussianBump => {}
            InitialCondition::CosineProbe { eta0, epsilon, k0 } => {
                finite("ic.eta0", eta0)?;
                finite("ic.epsilon", epsilon)?;
                finite("ic.k0", k0)?;
            }
        }
        Ok(())
    }

    /// Canonical text form; parses back to an identical config.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("format.version", CONFIG_FORMAT_VERSION.to_string());
        kv("model.name", self.model.name().to_string());
        match self.model {
            ModelKind::CahnHilliard(p) => {
                kv("model.W", real(p.w));
                kv("model.kappa", real(p.kappa));
                kv("model.M", real(p.mobility));
            }
            ModelKind::PhaseFieldCrystal(p) => {
                kv("model.r", real(p.r));
                kv("model.M", real(p.mobility));
            }
            ModelKind::AdvectionDiffusion(p) => {
                kv("model.u", real(p.u));
                kv("model.D", real(p.d));
            }
            ModelKind::Burgers(p) => kv("model.nu", real(p.nu)),
        }
        kv("grid.dim", self.grid.dim.to_string());
        kv("grid.n", self.grid.n.to_string());
        kv("grid.length", real(self.grid.length));
        kv("grid.origin", real(self.grid.origin));
        kv("time.method", self.method.to_string());
        kv("time.h", real(self.h));
        kv("time.t_final", real(self.t_final));
        kv("time.frame_interval", real(self.frame_interval));
        kv("ic.kind", self.ic.kind_name().to_string());
        match self.ic {
            InitialCondition::UniformNoise { eta0, noise } => {
                kv("ic.eta0", real(eta0));
                kv("ic.noise", real(noise));
            }
            InitialCondition::TopHat { x0, width, intensity } => {
                kv("ic.x0", real(x0));
                kv("ic.width", real(width));
                kv("ic.intensity", real(intensity));
            }
            InitialCondition::GaussianBump => {}
            InitialCondition::CosineProbe { eta0, epsilon, k0 } => {
                kv("ic.eta0", real(eta0));
                kv("ic.epsilon", real(epsilon));
                kv("ic.k0", real(k0));
            }
        }
        kv("run.seed", self.seed.to_string());
        kv("run.output_dir", format!("\"{}\"", self.output_dir.display()));
        kv("run.precision", self.precision.to_string());
        s
    }
}

/// Shortest decimal that round-trips.
fn real(x: f64) -> String {
    format!("{x:?}")
}

fn finite(key: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, "must be finite"))
    }
}

/// Parses a real, allowing a trailing `pi` factor.
pub fn parse_real(key: &str, raw: &str) -> Result<f64> {
    let s = raw.trim();
    let bad = || Error::config(key, format!("expected a real number, got `{raw}`"));
    let lower = s.to_ascii_lowercase();
    let value = if let Some(coef) = lower.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*').trim();
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        c * std::f64::consts::PI
    } else {
        s.parse::<f64>().map_err(|_| bad())?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// `key = value` entries, consumed as they are read.
struct Entries {
    map: BTreeMap<String, String>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::config(
                    format!("line {}", lineno + 1),
                    format!("expected `key = value`, got `{line}`"),
                )
            })?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::config(format!("line {}", lineno + 1), "empty key"));
            }
            let value = strip_comment(v.trim());
            let value = value
                .strip_prefix('"')
                .and_then(|s| s.strip_suffix('"'))
                .unwrap_or(value)
                .to_string();
            if map.insert(key.clone(), value).is_some() {
                return Err(Error::config(key, "duplicate key"));
            }
        }
        Ok(Entries { map })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<String> {
        self.take(key).ok_or_else(|| Error::config(key, "missing required key"))
    }

    fn real(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|v| parse_real(key, &v)).transpose()
    }

    fn real_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.real(key)?.unwrap_or(default))
    }

    fn require_real(&mut self, key: &str) -> Result<f64> {
        let v = self.require(key)?;
        parse_real(key, &v)
    }

    fn integer<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        self.take(key)
            .map(|v| {
                v.trim()
                    .parse::<T>()
                    .map_err(|_| Error::config(key, format!("expected a non-negative integer, got `{v}`")))
            })
            .transpose()
    }

    fn finish(self) -> Result<()> {
        match self.map.into_keys().next() {
            Some(key) => Err(Error::config(key, "unknown key")),
            None => Ok(()),
        }
    }
}

fn strip_comment(v: &str) -> &str {
    if v.starts_with('"') {
        return v;
    }
    match v.find(" #") {
        Some(i) => v[..i].trim_end(),
        None => v,
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut e = Entries::parse(text)?;

        if let Some(v) = e.integer::<u32>("format.version")? {
            if v != CONFIG_FORMAT_VERSION {
                return Err(Error::config(
                    "format.version",
                    format!("unsupported version {v} (this build reads {CONFIG_FORMAT_VERSION})"),
                ));
            }
        }

        let name: ModelName = e.require("model.name")?.parse()?;
        let model = match name {
            ModelName::CahnHilliard => {
                let d = CHParams::default();
                ModelKind::CahnHilliard(CHParams::new(
                    e.real_or("model.W", d.w)?,
                    e.real_or("model.kappa", d.kappa)?,
                    e.real_or("model.M", d.mobility)?,
                )?)
            }
            ModelName::PhaseFieldCrystal => {
                let d = PFCParams::default();
                ModelKind::PhaseFieldCrystal(PFCParams::new(
                    e.real_or("model.r", d.r)?,
                    e.real_or("model.M", d.mobility)?,
                )?)
            }
            ModelName::AdvectionDiffusion => {
                let d = AdvDiffParams::default();
                ModelKind::AdvectionDiffusion(AdvDiffParams::new(
                    e.real_or("model.u", d.u)?,
                    e.real_or("model.D", d.d)?,
                )?)
            }
            ModelName::Burgers => {
                let d = BurgersParams::default();
                ModelKind::Burgers(BurgersParams::new(e.real_or("model.nu", d.nu)?)?)
            }
        };

        let one_d = matches!(
            model,
            ModelKind::AdvectionDiffusion(_) | ModelKind::Burgers(_)
        );
        let grid = GridConfig {
            dim: e.integer("grid.dim")?.unwrap_or(if one_d { 1 } else { 2 }),
            n: e
                .integer("grid.n")?
                .ok_or_else(|| Error::config("grid.n", "missing required key"))?,
            length: e.require_real("grid.length")?,
            origin: e.real_or("grid.origin", 0.0)?,
        };

        let method: Method = e.require("time.method")?.parse()?;
        let h = e.require_real("time.h")?;
        let t_final = e.require_real("time.t_final")?;
        let frame_interval = e.real_or("time.frame_interval", t_final)?;

        let ic_kind = e.require("ic.kind")?;
        let ic = match ic_kind.to_ascii_lowercase().as_str() {
            "uniform_noise" => {
                let eta0 = e.require_real("ic.eta0")?;
                let absolute = e.real("ic.noise")?;
                let relative = e.real("ic.relative_noise")?;
                let noise = match (absolute, relative) {
                    (Some(_), Some(_)) => {
                        return Err(Error::config(
                            "ic.relative_noise",
                            "give either ic.noise or ic.relative_noise, not both",
                        ))
                    }
                    (Some(a), None) => a,
                    (None, Some(r)) => r * eta0.abs(),
                    (None, None) => 0.0,
                };
                InitialCondition::UniformNoise { eta0, noise }
            }
            "top_hat" => InitialCondition::TopHat {
                x0: e.real_or("ic.x0", grid.origin)?,
                width: e.require_real("ic.width")?,
                intensity: e.real_or("ic.intensity", 1.0)?,
            },
            "gaussian_bump" => InitialCondition::GaussianBump,
            "cosine_probe" => InitialCondition::CosineProbe {
                eta0: e.real_or("ic.eta0", 0.0)?,
                epsilon: e.require_real("ic.epsilon")?,
                k0: e.require_real("ic.k0")?,
            },
            other => {
                return Err(Error::config(
                    "ic.kind",
                    format!("unknown initial condition `{other}` (expected one of: {IC_KINDS})"),
                ))
            }
        };

        let seed = e.integer("run.seed")?.unwrap_or(12345);
        let output_dir = PathBuf::from(e.take("run.output_dir").unwrap_or_else(|| "out".into()));
        let precision = match e.take("run.precision") {
            Some(p) => p.parse()?,
            None => Precision::Double,
        };
        e.finish()?;

        let config = RunConfig {
            model,
            grid,
            method,
            h,
            t_final,
            frame_interval,
            seed,
            ic,
            output_dir,
            precision,
        };
        config.validate()?;
        Ok(config)
    }
}
