//! Parameter scans over the run layer.
//!
//! Points run on a dedicated thread pool; results always come back in plan
//! order, and a failing point becomes a row with an error code instead of
//! aborting the scan.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::ensemble::EnsembleResult;
use crate::experiment::{simulate, RunError, RunSpec, Sampling, Summary};
use crate::system::PhotoassociationSystem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("axis {0} has no values")]
    EmptyAxis(&'static str),
    #[error("axis {axis} has a non-finite value {value}")]
    NonFinite { axis: &'static str, value: f64 },
    #[error("axis {axis}: {value} is not a positive whole number of pulses")]
    PulseCount { axis: &'static str, value: f64 },
    #[error("axis {0} appears twice")]
    DuplicateAxis(&'static str),
    #[error("range on {axis} needs a positive step and start <= stop")]
    Range { axis: &'static str },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// A scannable run parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParameter {
    PeakIntensity,
    Sigma,
    Chirp,
    Detuning,
    Delay,
    Pulses,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 6] = [
        SweepParameter::PeakIntensity,
        SweepParameter::Sigma,
        SweepParameter::Chirp,
        SweepParameter::Detuning,
        SweepParameter::Delay,
        SweepParameter::Pulses,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::PeakIntensity => "peak_intensity",
            SweepParameter::Sigma => "sigma",
            SweepParameter::Chirp => "chirp",
            SweepParameter::Detuning => "detuning",
            SweepParameter::Delay => "delay",
            SweepParameter::Pulses => "pulses",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            SweepParameter::PeakIntensity => "W/cm^2",
            SweepParameter::Sigma | SweepParameter::Delay => "ns",
            SweepParameter::Chirp => "MHz/ns",
            SweepParameter::Detuning => "MHz",
            SweepParameter::Pulses => "",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn apply(self, spec: &mut RunSpec, value: f64) {
        match self {
            SweepParameter::PeakIntensity => spec.pulse.peak_intensity = value,
            SweepParameter::Sigma => spec.pulse.sigma = value,
            SweepParameter::Chirp => spec.pulse.chirp = value,
            SweepParameter::Detuning => spec.pulse.detuning = value,
            SweepParameter::Delay => spec.train.delay = value,
            SweepParameter::Pulses => spec.train.count = value as usize,
        }
    }
}

/// Values of one scanned parameter, sorted ascending without duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    parameter: SweepParameter,
    values: Vec<f64>,
}

impl Axis {
    pub fn new(parameter: SweepParameter, mut values: Vec<f64>) -> Result<Self, SweepError> {
        let axis = parameter.name();
        if values.is_empty() {
            return Err(SweepError::EmptyAxis(axis));
        }
        if let Some(&value) = values.iter().find(|v| !v.is_finite()) {
            return Err(SweepError::NonFinite { axis, value });
        }
        if parameter == SweepParameter::Pulses {
            if let Some(&value) = values.iter().find(|v| **v < 1.0 || v.fract() != 0.0) {
                return Err(SweepError::PulseCount { axis, value });
            }
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        Ok(Self { parameter, values })
    }

    /// `start, start + step, ...` up to `stop` inclusive (within step/1e6).
    pub fn range(parameter: SweepParameter, start: f64, stop: f64, step: f64) -> Result<Self, SweepError> {
        if !(step > 0.0 && start <= stop && step.is_finite() && (stop - start).is_finite()) {
            return Err(SweepError::Range { axis: parameter.name() });
        }
        let n = ((stop - start) / step + 1e-6).floor() as usize;
        Self::new(parameter, (0..=n).map(|k| start + k as f64 * step).collect())
    }

    pub fn parameter(&self) -> SweepParameter {
        self.parameter
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Scalar columns a sweep can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOutput {
    FinalPopulation,
    StaticAlignment,
    DynamicAmplitude,
}

impl SweepOutput {
    pub const ALL: [SweepOutput; 3] =
        [SweepOutput::FinalPopulation, SweepOutput::StaticAlignment, SweepOutput::DynamicAmplitude];

    pub fn name(self) -> &'static str {
        match self {
            SweepOutput::FinalPopulation => "final_population",
            SweepOutput::StaticAlignment => "static_alignment",
            SweepOutput::DynamicAmplitude => "dynamic_amplitude",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == name)
    }

    pub fn read(self, s: &Summary) -> Option<f64> {
        match self {
            SweepOutput::FinalPopulation => Some(s.final_population),
            SweepOutput::StaticAlignment => s.static_alignment,
            SweepOutput::DynamicAmplitude => s.dynamic_amplitude,
        }
    }
}

/// Cartesian scan: the first axis varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub axes: Vec<Axis>,
    pub base: RunSpec,
    pub outputs: Vec<SweepOutput>,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    /// Keep the full time series of every point.
    pub traces: bool,
}

impl SweepPlan {
    pub fn new(base: RunSpec, axes: Vec<Axis>) -> Result<Self, SweepError> {
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.parameter == a.parameter) {
                return Err(SweepError::DuplicateAxis(a.parameter.name()));
            }
        }
        Ok(Self { axes, base, outputs: SweepOutput::ALL.to_vec(), workers: 0, traces: false })
    }

    pub fn point_count(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Coordinates of every point in plan order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out
    }

    /// Base spec with the axes set to `coordinates`.
    pub fn resolve(&self, coordinates: &[f64]) -> RunSpec {
        let mut spec = self.base.clone();
        for (axis, &v) in self.axes.iter().zip(coordinates) {
            axis.parameter.apply(&mut spec, v);
        }
        spec
    }
}

/// Why a point produced no numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub code: &'static str,
    pub message: String,
}

impl From<RunError> for PointFailure {
    fn from(e: RunError) -> Self {
        Self { code: e.code(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub coordinates: Vec<f64>,
    pub spec: RunSpec,
    pub outcome: Result<Summary, PointFailure>,
    /// Full time series, when the plan asks for traces.
    pub trace: Option<EnsembleResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub parameters: Vec<SweepParameter>,
    pub outputs: Vec<SweepOutput>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    /// One output over all rows; `None` for failed or undefined points.
    pub fn column(&self, output: SweepOutput) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.outcome.as_ref().ok().and_then(|s| output.read(s))).collect()
    }

    /// Values of one axis over all rows.
    pub fn coordinate(&self, parameter: SweepParameter) -> Option<Vec<f64>> {
        let i = self.parameters.iter().position(|&p| p == parameter)?;
        Some(self.rows.iter().map(|r| r.coordinates[i]).collect())
    }
}

/// Runs every point of `plan`. Without traces only the field-free tail is sampled.
pub fn run_sweep(system: &PhotoassociationSystem, plan: &SweepPlan) -> Result<SweepTable, SweepError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let points = plan.points();
    let total = points.len();
    let rows = pool.install(|| {
        points
            .into_par_iter()
            .enumerate()
            .map(|(k, coordinates)| {
                let spec = plan.resolve(&coordinates);
                let sampling = if plan.traces { Sampling::Full } else { Sampling::AfterPulses };
                let (outcome, trace) = match simulate(system, &spec, sampling) {
                    Ok(o) => (Ok(o.summary), plan.traces.then_some(o.result)),
                    Err(e) => (Err(PointFailure::from(e)), None),
                };
                if let Err(f) = &outcome {
                    log::warn!("point {}/{} failed ({}): {}", k + 1, total, f.code, f.message);
                } else {
                    log::debug!("point {}/{} done", k + 1, total);
                }
                SweepRow { coordinates, spec, outcome, trace }
            })
            .collect()
    });
    Ok(SweepTable {
        parameters: plan.axes.iter().map(|a| a.parameter).collect(),
        outputs: plan.outputs.clone(),
        rows,
    })
}

/// N-slit interference pattern in delay for a beat at `frequency_mhz`:
/// sin²(Nπfτ) / (N² sin²(πfτ)), equal to 1 at τ = k/f.
pub fn nslit_reference(n: usize, delay_ns: f64, frequency_mhz: f64) -> f64 {
    let x = PI * frequency_mhz * 1e-3 * delay_ns;
    let s = x.sin();
    if s.abs() < 1e-12 {
        return 1.0;
    }
    let nf = n as f64;
    ((nf * x).sin() / (nf * s)).powi(2)
}
