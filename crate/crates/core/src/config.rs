//! TOML run configuration with mandatory unit suffixes.
//!
//! Every physical quantity is a string such as `"10 ns"` or `"1000 W/cm^2"`;
//! dimensionless settings are plain numbers. Unknown keys are rejected.
//! [`RunConfig::echo`] writes the fully resolved configuration back in
//! canonical units, and parsing the echo reproduces the same [`RunConfig`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::channel::Manifold;
use crate::ensemble::{EnsembleSpec, DEFAULT_ALIGNMENT_FLOOR};
use crate::experiment::{PulseParams, RunSpec, TrainParams};
use crate::propagate::Controls;
use crate::radial::{shared_grid, PotentialCurve, RadialError, RadialGrid, TabulatedCurve};
use crate::sweep::{Axis, SweepError, SweepOutput, SweepParameter, SweepPlan};
use crate::system::{calibrated_ground, model_excited, GridSpec, ModelSpec, DEFAULT_TRANSITION_DIPOLE_DEBYE};
use crate::units::RB87_PAIR_REDUCED_MASS_AMU;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("{key}: {message}")]
    Value { key: String, message: String },
    #[error("{key}: {source}")]
    Potential { key: String, source: RadialError },
    #[error(transparent)]
    Sweep(#[from] SweepError),
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value { key: key.to_string(), message: message.into() }
}

/// Physical dimensions accepted in quantity strings, with unit scale factors
/// to the canonical unit (listed first).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Time,
    Frequency,
    ChirpRate,
    Intensity,
    Length,
    InverseLength,
    Temperature,
    Dipole,
    Mass,
    C3,
    C6,
    ForceConstant,
    Rate,
}

impl Dimension {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Time => &[("ns", 1.0), ("ps", 1e-3), ("us", 1e3), ("µs", 1e3), ("ms", 1e6), ("s", 1e9)],
            Dimension::Frequency => &[("MHz", 1.0), ("kHz", 1e-3), ("Hz", 1e-6), ("GHz", 1e3)],
            Dimension::ChirpRate => &[("MHz/ns", 1.0), ("GHz/ns", 1e3), ("MHz/us", 1e-3)],
            Dimension::Intensity => &[("W/cm^2", 1.0), ("kW/cm^2", 1e3), ("MW/cm^2", 1e6), ("mW/cm^2", 1e-3)],
            Dimension::Length => &[("bohr", 1.0), ("a0", 1.0), ("angstrom", 1.889_726_124_6), ("nm", 18.897_261_246)],
            Dimension::InverseLength => &[("1/bohr", 1.0), ("1/angstrom", 1.0 / 1.889_726_124_6)],
            Dimension::Temperature => &[("uK", 1.0), ("µK", 1.0), ("nK", 1e-3), ("mK", 1e3), ("K", 1e6)],
            Dimension::Dipole => &[("D", 1.0), ("debye", 1.0)],
            Dimension::Mass => &[("amu", 1.0), ("u", 1.0)],
            Dimension::C3 => &[("GHz*bohr^3", 1.0)],
            Dimension::C6 => &[("GHz*bohr^6", 1.0)],
            Dimension::ForceConstant => &[("GHz/bohr^2", 1.0)],
            Dimension::Rate => &[("1/ns", 1.0), ("1/us", 1e-3)],
        }
    }

    pub fn canonical_unit(self) -> &'static str {
        self.units()[0].0
    }
}

/// Parse `"<number> <unit>"` into the canonical unit of `dim`.
pub fn parse_quantity(key: &str, text: &str, dim: Dimension) -> Result<f64, ConfigError> {
    let text = text.trim();
    let (num, unit) = text
        .split_once(char::is_whitespace)
        .ok_or_else(|| bad(key, format!("\"{text}\" needs a unit, e.g. \"{} {}\"", text, dim.canonical_unit())))?;
    let value: f64 = num.parse().map_err(|_| bad(key, format!("\"{num}\" is not a number")))?;
    if !value.is_finite() {
        return Err(bad(key, "value must be finite"));
    }
    let unit = unit.trim();
    let scale = dim
        .units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, s)| *s)
        .ok_or_else(|| {
            let known: Vec<&str> = dim.units().iter().map(|(u, _)| *u).collect();
            bad(key, format!("unknown unit \"{unit}\" (expected one of {})", known.join(", ")))
        })?;
    Ok(value * scale)
}

fn quantity(value: f64, dim: Dimension) -> String {
    format!("{value:?} {}", dim.canonical_unit())
}

// ---------------------------------------------------------------------------
// File schema

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<RawModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<RawGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ensemble: Option<RawEnsemble>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pulse: Option<RawPulse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    train: Option<RawTrain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    propagation: Option<RawPropagation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<RawOutput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eigen: Option<RawEigen>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sweep: Option<RawSweep>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    mass: Option<String>,
    target_level: Option<usize>,
    intermediate_level: Option<usize>,
    j_max: Option<i32>,
    box_states: Option<usize>,
    convergence_tolerance: Option<String>,
    ground: Option<RawCurve>,
    excited: Option<RawCurve>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    kind: String,
    depth: Option<String>,
    c3: Option<String>,
    c6: Option<String>,
    wall_exponent: Option<f64>,
    alpha: Option<String>,
    r_e: Option<String>,
    k: Option<String>,
    r0: Option<String>,
    path: Option<String>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    kind: Option<String>,
    r_min: Option<String>,
    r_max: Option<String>,
    beta: Option<f64>,
    energy_cap: Option<String>,
    points: Option<usize>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    temperature: Option<String>,
    nuclear_spin: Option<f64>,
    alignment_floor: Option<f64>,
    projection: Option<String>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawPulse {
    peak_intensity: Option<String>,
    sigma: Option<String>,
    chirp: Option<String>,
    detuning: Option<String>,
    transition_dipole: Option<String>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawTrain {
    count: Option<usize>,
    delay: Option<String>,
    allow_overlap: Option<bool>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawPropagation {
    tolerance: Option<f64>,
    initial_step: Option<String>,
    min_step: Option<String>,
    max_step: Option<String>,
    norm_drift: Option<String>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    stride: Option<String>,
    tail_periods: Option<f64>,
    prefix: Option<String>,
    traces: Option<bool>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawEigen {
    j: Option<Vec<i32>>,
    energy_cap: Option<String>,
    max_levels: Option<usize>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    outputs: Option<Vec<String>>,
    workers: Option<usize>,
    #[serde(default)]
    axis: Vec<RawAxis>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    parameter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<toml::Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start: Option<toml::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stop: Option<toml::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    step: Option<toml::Value>,
}

// ---------------------------------------------------------------------------
// Resolved configuration

/// A potential curve with the file it was loaded from, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveConfig {
    pub curve: PotentialCurve,
    pub source: Option<PathBuf>,
}

/// Grid used by the eigensolver report. Dynamics always use the mapped grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridConfig {
    Mapped(GridSpec),
    Uniform { r_min: f64, r_max: f64, points: usize },
}

impl GridConfig {
    /// Grid for `curves`; a mapped grid resolves all of them.
    pub fn build(&self, curves: &[&PotentialCurve], mass_amu: f64) -> Result<RadialGrid, RadialError> {
        match *self {
            GridConfig::Mapped(g) => shared_grid(curves, g.r_max, g.energy_cap_ghz, g.beta, mass_amu),
            GridConfig::Uniform { r_min, r_max, points } => RadialGrid::uniform(r_min, r_max, points, mass_amu),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenConfig {
    pub j_values: Vec<i32>,
    /// Report levels below this energy, GHz above the asymptote.
    pub energy_cap_ghz: f64,
    pub max_levels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub prefix: String,
    /// Write a trace file for every sweep point.
    pub traces: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub axes: Vec<Axis>,
    pub outputs: Vec<SweepOutput>,
    pub workers: usize,
}

/// Fully resolved configuration; every field has a value.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub ground: CurveConfig,
    pub excited: CurveConfig,
    pub model: ModelSpec,
    pub grid: GridConfig,
    pub run: RunSpec,
    pub output: OutputConfig,
    pub eigen: EigenConfig,
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse_in(&text, path.parent())
    }

    /// Parse text; relative potential paths resolve against the working directory.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::parse_in(text, None)
    }

    fn parse_in(text: &str, base: Option<&Path>) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        resolve(raw, base)
    }

    /// Canonical TOML rendering of every resolved value.
    pub fn echo(&self) -> String {
        toml::to_string(&self.to_raw()).expect("configuration serializes")
    }

    /// SHA-256 of [`RunConfig::echo`], hex encoded.
    pub fn hash(&self) -> String {
        hash_text(&self.echo())
    }

    /// Hash of the resolved model alone, shared by every sweep point.
    pub fn model_fingerprint(&self) -> String {
        hash_text(&format!("{:?}", self.model))
    }

    /// Model spec for dynamics; requires the mapped grid.
    pub fn dynamics_model(&self) -> Result<ModelSpec, ConfigError> {
        match self.grid {
            GridConfig::Mapped(_) => Ok(self.model.clone()),
            GridConfig::Uniform { .. } => Err(bad("grid.kind", "dynamics need a mapped grid")),
        }
    }

    pub fn sweep_plan(&self) -> Result<SweepPlan, ConfigError> {
        let s = self.sweep.as_ref().ok_or_else(|| bad("sweep", "no [sweep] section with axes"))?;
        let mut plan = SweepPlan::new(self.run.clone(), s.axes.clone())?;
        plan.outputs = s.outputs.clone();
        plan.workers = s.workers;
        plan.traces = self.output.traces;
        Ok(plan)
    }

    fn to_raw(&self) -> RawConfig {
        let m = &self.model;
        let r = &self.run;
        let q = quantity;
        let grid = match self.grid {
            GridConfig::Mapped(g) => RawGrid {
                kind: Some("mapped".into()),
                r_max: Some(q(g.r_max, Dimension::Length)),
                beta: Some(g.beta),
                energy_cap: Some(q(g.energy_cap_ghz * 1e3, Dimension::Frequency)),
                ..Default::default()
            },
            GridConfig::Uniform { r_min, r_max, points } => RawGrid {
                kind: Some("uniform".into()),
                r_min: Some(q(r_min, Dimension::Length)),
                r_max: Some(q(r_max, Dimension::Length)),
                points: Some(points),
                ..Default::default()
            },
        };
        RawConfig {
            model: Some(RawModel {
                mass: Some(q(m.mass_amu, Dimension::Mass)),
                target_level: Some(m.target_level),
                intermediate_level: Some(m.intermediate_level),
                j_max: Some(m.j_max),
                box_states: Some(m.box_states),
                convergence_tolerance: m.convergence_tolerance_mhz.map(|v| q(v, Dimension::Frequency)),
                ground: Some(curve_to_raw(&self.ground)),
                excited: Some(curve_to_raw(&self.excited)),
            }),
            grid: Some(grid),
            ensemble: Some(RawEnsemble {
                temperature: Some(q(r.ensemble.temperature_uk, Dimension::Temperature)),
                nuclear_spin: Some(r.ensemble.nuclear_spin),
                alignment_floor: Some(r.ensemble.alignment_floor),
                projection: Some(r.ensemble.projection.name().into()),
            }),
            pulse: Some(RawPulse {
                peak_intensity: Some(q(r.pulse.peak_intensity, Dimension::Intensity)),
                sigma: Some(q(r.pulse.sigma, Dimension::Time)),
                chirp: Some(q(r.pulse.chirp, Dimension::ChirpRate)),
                detuning: Some(q(r.pulse.detuning, Dimension::Frequency)),
                transition_dipole: Some(q(r.mu_debye, Dimension::Dipole)),
            }),
            train: Some(RawTrain {
                count: Some(r.train.count),
                delay: Some(q(r.train.delay, Dimension::Time)),
                allow_overlap: Some(r.train.allow_overlap),
            }),
            propagation: Some(RawPropagation {
                tolerance: Some(r.controls.tolerance),
                initial_step: Some(q(r.controls.initial_step, Dimension::Time)),
                min_step: Some(q(r.controls.min_step, Dimension::Time)),
                max_step: Some(q(r.controls.max_step, Dimension::Time)),
                norm_drift: Some(q(r.controls.norm_drift_per_ns, Dimension::Rate)),
            }),
            output: Some(RawOutput {
                stride: Some(q(r.stride, Dimension::Time)),
                tail_periods: Some(r.tail_periods),
                prefix: Some(self.output.prefix.clone()),
                traces: Some(self.output.traces),
            }),
            eigen: Some(RawEigen {
                j: Some(self.eigen.j_values.clone()),
                energy_cap: Some(q(self.eigen.energy_cap_ghz * 1e3, Dimension::Frequency)),
                max_levels: self.eigen.max_levels,
            }),
            sweep: self.sweep.as_ref().map(|s| RawSweep {
                outputs: Some(s.outputs.iter().map(|o| o.name().to_string()).collect()),
                workers: Some(s.workers),
                axis: s
                    .axes
                    .iter()
                    .map(|a| RawAxis {
                        parameter: a.parameter().name().into(),
                        values: Some(a.values().iter().map(|&v| axis_value_to_raw(a.parameter(), v)).collect()),
                        ..Default::default()
                    })
                    .collect(),
            }),
        }
    }
}

pub fn hash_text(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn curve_to_raw(c: &CurveConfig) -> RawCurve {
    let q = quantity;
    if let Some(path) = &c.source {
        return RawCurve { kind: "tabulated".into(), path: Some(path.display().to_string()), ..Default::default() };
    }
    match &c.curve {
        PotentialCurve::ModelGround { depth_ghz, c6, wall_exponent } => RawCurve {
            kind: "model-ground".into(),
            depth: Some(q(depth_ghz * 1e3, Dimension::Frequency)),
            c6: Some(q(*c6, Dimension::C6)),
            wall_exponent: Some(*wall_exponent),
            ..Default::default()
        },
        PotentialCurve::ModelExcited { depth_ghz, c3, wall_exponent } => RawCurve {
            kind: "model-excited".into(),
            depth: Some(q(depth_ghz * 1e3, Dimension::Frequency)),
            c3: Some(q(*c3, Dimension::C3)),
            wall_exponent: Some(*wall_exponent),
            ..Default::default()
        },
        PotentialCurve::Morse { depth_ghz, alpha, r_e } => RawCurve {
            kind: "morse".into(),
            depth: Some(q(depth_ghz * 1e3, Dimension::Frequency)),
            alpha: Some(q(*alpha, Dimension::InverseLength)),
            r_e: Some(q(*r_e, Dimension::Length)),
            ..Default::default()
        },
        PotentialCurve::Harmonic { k_ghz_per_bohr2, r0 } => RawCurve {
            kind: "harmonic".into(),
            k: Some(q(*k_ghz_per_bohr2, Dimension::ForceConstant)),
            r0: Some(q(*r0, Dimension::Length)),
            ..Default::default()
        },
        PotentialCurve::Flat => RawCurve { kind: "flat".into(), ..Default::default() },
        PotentialCurve::Tabulated(_) => unreachable!("tabulated curves always carry their source path"),
    }
}

fn axis_dimension(p: SweepParameter) -> Option<Dimension> {
    match p {
        SweepParameter::PeakIntensity => Some(Dimension::Intensity),
        SweepParameter::Sigma | SweepParameter::Delay => Some(Dimension::Time),
        SweepParameter::Chirp => Some(Dimension::ChirpRate),
        SweepParameter::Detuning => Some(Dimension::Frequency),
        SweepParameter::Pulses => None,
    }
}

fn axis_value_to_raw(p: SweepParameter, v: f64) -> toml::Value {
    match axis_dimension(p) {
        Some(d) => toml::Value::String(quantity(v, d)),
        None => toml::Value::Integer(v as i64),
    }
}

fn axis_value(key: &str, p: SweepParameter, v: &toml::Value) -> Result<f64, ConfigError> {
    match (axis_dimension(p), v) {
        (Some(d), toml::Value::String(s)) => parse_quantity(key, s, d),
        (Some(d), _) => Err(bad(key, format!("expected a quantity string such as \"1 {}\"", d.canonical_unit()))),
        (None, toml::Value::Integer(n)) => Ok(*n as f64),
        (None, _) => Err(bad(key, "expected an integer")),
    }
}

// ---------------------------------------------------------------------------
// Resolution

fn opt_quantity(key: &str, v: &Option<String>, dim: Dimension, default: f64) -> Result<f64, ConfigError> {
    v.as_deref().map_or(Ok(default), |s| parse_quantity(key, s, dim))
}

fn required(key: &str, v: &Option<String>, dim: Dimension) -> Result<f64, ConfigError> {
    let s = v.as_deref().ok_or_else(|| bad(key, "missing"))?;
    parse_quantity(key, s, dim)
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(bad(key, format!("must be positive, got {v}")))
    }
}

fn resolve_curve(key: &str, raw: Option<&RawCurve>, default: PotentialCurve, base: Option<&Path>) -> Result<CurveConfig, ConfigError> {
    let Some(c) = raw else {
        return Ok(CurveConfig { curve: default, source: None });
    };
    let k = |f: &str| format!("{key}.{f}");
    let curve = match c.kind.as_str() {
        "calibrated" => calibrated_ground(),
        "model-ground" => PotentialCurve::ModelGround {
            depth_ghz: positive(&k("depth"), required(&k("depth"), &c.depth, Dimension::Frequency)? * 1e-3)?,
            c6: positive(&k("c6"), required(&k("c6"), &c.c6, Dimension::C6)?)?,
            wall_exponent: c.wall_exponent.unwrap_or(12.0),
        },
        "model-excited" => PotentialCurve::ModelExcited {
            depth_ghz: positive(&k("depth"), required(&k("depth"), &c.depth, Dimension::Frequency)? * 1e-3)?,
            c3: positive(&k("c3"), required(&k("c3"), &c.c3, Dimension::C3)?)?,
            wall_exponent: c.wall_exponent.unwrap_or(12.0),
        },
        "morse" => PotentialCurve::Morse {
            depth_ghz: positive(&k("depth"), required(&k("depth"), &c.depth, Dimension::Frequency)? * 1e-3)?,
            alpha: positive(&k("alpha"), required(&k("alpha"), &c.alpha, Dimension::InverseLength)?)?,
            r_e: positive(&k("r_e"), required(&k("r_e"), &c.r_e, Dimension::Length)?)?,
        },
        "harmonic" => PotentialCurve::Harmonic {
            k_ghz_per_bohr2: positive(&k("k"), required(&k("k"), &c.k, Dimension::ForceConstant)?)?,
            r0: positive(&k("r0"), required(&k("r0"), &c.r0, Dimension::Length)?)?,
        },
        "flat" => PotentialCurve::Flat,
        "tabulated" => {
            let p = c.path.as_deref().ok_or_else(|| bad(&k("path"), "missing"))?;
            let path = PathBuf::from(p);
            let full = match base {
                Some(b) if path.is_relative() => b.join(&path),
                _ => path.clone(),
            };
            let table =
                TabulatedCurve::load(&full).map_err(|source| ConfigError::Potential { key: k("path"), source })?;
            return Ok(CurveConfig { curve: PotentialCurve::Tabulated(table), source: Some(path) });
        }
        other => {
            return Err(bad(
                &k("kind"),
                format!("unknown curve kind \"{other}\" (calibrated, model-ground, model-excited, morse, harmonic, flat, tabulated)"),
            ))
        }
    };
    Ok(CurveConfig { curve, source: None })
}

fn resolve(raw: RawConfig, base: Option<&Path>) -> Result<RunConfig, ConfigError> {
    let dm = ModelSpec::default();
    let model_raw = raw.model.unwrap_or_default();
    let ground = resolve_curve("model.ground", model_raw.ground.as_ref(), dm.ground.clone(), base)?;
    let excited = resolve_curve("model.excited", model_raw.excited.as_ref(), model_excited(), base)?;

    let g = raw.grid.unwrap_or_default();
    let dg = GridSpec::default();
    let grid = match g.kind.as_deref().unwrap_or("mapped") {
        "mapped" => {
            if g.points.is_some() || g.r_min.is_some() {
                return Err(bad("grid", "points and r_min apply to uniform grids only"));
            }
            let beta = g.beta.unwrap_or(dg.beta);
            if !(beta >= 2.0) {
                return Err(bad("grid.beta", format!("need at least 2 points per wavelength, got {beta}")));
            }
            GridConfig::Mapped(GridSpec {
                r_max: positive("grid.r_max", opt_quantity("grid.r_max", &g.r_max, Dimension::Length, dg.r_max)?)?,
                beta,
                energy_cap_ghz: opt_quantity("grid.energy_cap", &g.energy_cap, Dimension::Frequency, dg.energy_cap_ghz * 1e3)?
                    * 1e-3,
            })
        }
        "uniform" => {
            if g.beta.is_some() || g.energy_cap.is_some() {
                return Err(bad("grid", "beta and energy_cap apply to mapped grids only"));
            }
            let r_min = positive("grid.r_min", required("grid.r_min", &g.r_min, Dimension::Length)?)?;
            let r_max = required("grid.r_max", &g.r_max, Dimension::Length)?;
            if r_max <= r_min {
                return Err(bad("grid.r_max", "must exceed r_min"));
            }
            let points = g.points.ok_or_else(|| bad("grid.points", "missing"))?;
            GridConfig::Uniform { r_min, r_max, points }
        }
        other => return Err(bad("grid.kind", format!("unknown grid kind \"{other}\" (mapped, uniform)"))),
    };

    let model = ModelSpec {
        ground: ground.curve.clone(),
        excited: excited.curve.clone(),
        mass_amu: positive("model.mass", opt_quantity("model.mass", &model_raw.mass, Dimension::Mass, RB87_PAIR_REDUCED_MASS_AMU)?)?,
        target_level: model_raw.target_level.unwrap_or(dm.target_level),
        intermediate_level: model_raw.intermediate_level.unwrap_or(dm.intermediate_level),
        grid: match grid {
            GridConfig::Mapped(spec) => spec,
            GridConfig::Uniform { .. } => dm.grid,
        },
        box_states: model_raw.box_states.unwrap_or(dm.box_states),
        j_max: model_raw.j_max.unwrap_or(dm.j_max),
        convergence_tolerance_mhz: model_raw
            .convergence_tolerance
            .as_deref()
            .map(|s| parse_quantity("model.convergence_tolerance", s, Dimension::Frequency))
            .transpose()?,
    };
    if model.j_max < 0 {
        return Err(bad("model.j_max", "must be non-negative"));
    }
    if model.box_states == 0 {
        return Err(bad("model.box_states", "must be at least 1"));
    }

    let e = raw.ensemble.unwrap_or_default();
    let de = EnsembleSpec::default();
    let projection = match e.projection.as_deref().unwrap_or("target") {
        "target" => Manifold::Target,
        "intermediate" => Manifold::Intermediate,
        other => return Err(bad("ensemble.projection", format!("\"{other}\" is not target or intermediate"))),
    };
    let ensemble = EnsembleSpec {
        temperature_uk: opt_quantity("ensemble.temperature", &e.temperature, Dimension::Temperature, de.temperature_uk)?,
        nuclear_spin: e.nuclear_spin.unwrap_or(de.nuclear_spin),
        alignment_floor: e.alignment_floor.unwrap_or(DEFAULT_ALIGNMENT_FLOOR),
        projection,
    };

    let p = raw.pulse.unwrap_or_default();
    let pulse = PulseParams {
        peak_intensity: opt_quantity("pulse.peak_intensity", &p.peak_intensity, Dimension::Intensity, 0.0)?,
        sigma: positive("pulse.sigma", opt_quantity("pulse.sigma", &p.sigma, Dimension::Time, 10.0)?)?,
        chirp: opt_quantity("pulse.chirp", &p.chirp, Dimension::ChirpRate, 0.0)?,
        detuning: opt_quantity("pulse.detuning", &p.detuning, Dimension::Frequency, 0.0)?,
    };
    let t = raw.train.unwrap_or_default();
    let train = TrainParams {
        count: t.count.unwrap_or(1),
        delay: opt_quantity("train.delay", &t.delay, Dimension::Time, 0.0)?,
        allow_overlap: t.allow_overlap.unwrap_or(false),
    };
    if train.count == 0 {
        return Err(bad("train.count", "must be at least 1"));
    }
    let pr = raw.propagation.unwrap_or_default();
    let dc = Controls::default();
    let controls = Controls {
        tolerance: positive("propagation.tolerance", pr.tolerance.unwrap_or(dc.tolerance))?,
        initial_step: positive("propagation.initial_step", opt_quantity("propagation.initial_step", &pr.initial_step, Dimension::Time, dc.initial_step)?)?,
        min_step: positive("propagation.min_step", opt_quantity("propagation.min_step", &pr.min_step, Dimension::Time, dc.min_step)?)?,
        max_step: positive("propagation.max_step", opt_quantity("propagation.max_step", &pr.max_step, Dimension::Time, dc.max_step)?)?,
        norm_drift_per_ns: positive("propagation.norm_drift", opt_quantity("propagation.norm_drift", &pr.norm_drift, Dimension::Rate, dc.norm_drift_per_ns)?)?,
    };
    let o = raw.output.unwrap_or_default();
    let mut run = RunSpec::new(pulse);
    run.train = train;
    run.mu_debye = opt_quantity("pulse.transition_dipole", &p.transition_dipole, Dimension::Dipole, DEFAULT_TRANSITION_DIPOLE_DEBYE)?;
    run.ensemble = ensemble;
    run.controls = controls;
    run.stride = positive("output.stride", opt_quantity("output.stride", &o.stride, Dimension::Time, run.stride)?)?;
    run.tail_periods = o.tail_periods.unwrap_or(run.tail_periods);
    if run.tail_periods < 1.0 {
        return Err(bad("output.tail_periods", "must cover at least one revival period"));
    }
    let output = OutputConfig { prefix: o.prefix.unwrap_or_else(|| "photoalign".into()), traces: o.traces.unwrap_or(false) };
    if output.prefix.is_empty() || output.prefix.contains(['/', '\\']) {
        return Err(bad("output.prefix", "must be a plain file-name prefix"));
    }

    let ei = raw.eigen.unwrap_or_default();
    let eigen = EigenConfig {
        j_values: ei.j.unwrap_or_else(|| vec![0]),
        energy_cap_ghz: opt_quantity("eigen.energy_cap", &ei.energy_cap, Dimension::Frequency, 0.0)? * 1e-3,
        max_levels: ei.max_levels,
    };
    if eigen.j_values.iter().any(|&j| j < 0) {
        return Err(bad("eigen.j", "J must be non-negative"));
    }

    let sweep = raw.sweep.map(resolve_sweep).transpose()?;
    Ok(RunConfig { ground, excited, model, grid, run, output, eigen, sweep })
}

fn resolve_sweep(s: RawSweep) -> Result<SweepConfig, ConfigError> {
    if s.axis.is_empty() {
        return Err(bad("sweep.axis", "at least one axis is required"));
    }
    let mut axes = Vec::new();
    for (i, a) in s.axis.iter().enumerate() {
        let key = format!("sweep.axis[{i}]");
        let p = SweepParameter::from_name(&a.parameter).ok_or_else(|| {
            let names: Vec<&str> = SweepParameter::ALL.iter().map(|p| p.name()).collect();
            bad(&key, format!("unknown parameter \"{}\" ({})", a.parameter, names.join(", ")))
        })?;
        let axis = match (&a.values, &a.start, &a.stop, &a.step) {
            (Some(vs), None, None, None) => {
                let values = vs.iter().map(|v| axis_value(&key, p, v)).collect::<Result<Vec<_>, _>>()?;
                Axis::new(p, values)?
            }
            (None, Some(start), Some(stop), Some(step)) => {
                Axis::range(p, axis_value(&key, p, start)?, axis_value(&key, p, stop)?, axis_value(&key, p, step)?)?
            }
            _ => return Err(bad(&key, "give either values or start, stop and step")),
        };
        axes.push(axis);
    }
    let outputs = match s.outputs {
        None => SweepOutput::ALL.to_vec(),
        Some(names) => names
            .iter()
            .map(|n| SweepOutput::from_name(n).ok_or_else(|| bad("sweep.outputs", format!("unknown output \"{n}\""))))
            .collect::<Result<Vec<_>, _>>()?,
    };
    if outputs.is_empty() {
        return Err(bad("sweep.outputs", "request at least one output"));
    }
    Ok(SweepConfig { axes, outputs, workers: s.workers.unwrap_or(0) })
}
