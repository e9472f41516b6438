//! One thermal run: pulse parameters in, traces and scalar summaries out.
//!
//! Time origin: the first pulse is centered at 5σ, so t = 0 is the start of
//! its integration window.

use std::fmt::Write as _;

use thiserror::Error;

use crate::basis::Parity;
use crate::ensemble::{dynamic_alignment_amplitude, run_ensemble, static_alignment, EnsembleError, EnsembleResult, EnsembleSpec};
use crate::propagate::{sample_times, Controls};
use crate::pulse::{make_train, PulseError, PulseSpec, PulseTrain, MIN_GAP_SIGMAS};
use crate::system::{PhotoassociationSystem, SystemError, DEFAULT_TRANSITION_DIPOLE_DEBYE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("{0}")]
    Invalid(String),
}

impl RunError {
    /// Short machine-readable tag for result tables.
    pub fn code(&self) -> &'static str {
        match self {
            RunError::Pulse(_) => "pulse",
            RunError::System(_) => "model",
            RunError::Ensemble(EnsembleError::Propagation(_)) => "propagation",
            RunError::Ensemble(_) => "ensemble",
            RunError::Invalid(_) => "invalid",
        }
    }
}

/// Shape of every pulse in a run. The center is not a parameter: the first
/// pulse sits at 5σ and the rest follow at the train delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    /// W/cm².
    pub peak_intensity: f64,
    /// ns.
    pub sigma: f64,
    /// MHz/ns.
    pub chirp: f64,
    /// MHz at the pulse peak, from the intermediate band origin.
    pub detuning: f64,
}

impl PulseParams {
    pub fn transform_limited(peak_intensity: f64, sigma: f64) -> Self {
        Self { peak_intensity, sigma, chirp: 0.0, detuning: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub count: usize,
    /// Center-to-center spacing, ns.
    pub delay: f64,
    /// Permit spacings below 5σ.
    pub allow_overlap: bool,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self { count: 1, delay: 0.0, allow_overlap: false }
    }
}

/// Complete description of one run on a built system.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub pulse: PulseParams,
    pub train: TrainParams,
    pub mu_debye: f64,
    pub ensemble: EnsembleSpec,
    pub controls: Controls,
    /// Output sampling stride, ns.
    pub stride: f64,
    /// Field-free tail after the last pulse window, in revival periods.
    pub tail_periods: f64,
}

impl RunSpec {
    pub fn new(pulse: PulseParams) -> Self {
        Self {
            pulse,
            train: TrainParams::default(),
            mu_debye: DEFAULT_TRANSITION_DIPOLE_DEBYE,
            ensemble: EnsembleSpec::default(),
            controls: Controls::default(),
            stride: 0.1,
            tail_periods: 2.0,
        }
    }

    pub fn with_train(mut self, count: usize, delay: f64) -> Self {
        self.train.count = count;
        self.train.delay = delay;
        self
    }

    pub fn pulse_train(&self) -> Result<PulseTrain, RunError> {
        let p = &self.pulse;
        let base = PulseSpec::new(p.peak_intensity, p.sigma, p.chirp, MIN_GAP_SIGMAS * p.sigma, p.detuning)?;
        if self.train.count <= 1 {
            return Ok(PulseTrain::single(base));
        }
        Ok(make_train(base, self.train.count, self.train.delay, self.train.allow_overlap)?)
    }

    fn validate(&self) -> Result<(), RunError> {
        if !(self.stride > 0.0 && self.stride.is_finite()) {
            return Err(RunError::Invalid(format!("sampling stride must be positive, got {} ns", self.stride)));
        }
        if !(self.tail_periods >= 1.0 && self.tail_periods.is_finite()) {
            return Err(RunError::Invalid(format!(
                "the free-evolution tail must cover at least one revival period, got {}",
                self.tail_periods
            )));
        }
        if !(self.mu_debye >= 0.0 && self.mu_debye.is_finite()) {
            return Err(RunError::Invalid(format!("transition dipole must be non-negative, got {} D", self.mu_debye)));
        }
        Ok(())
    }

    /// Every resolved field, one `key = value` per line, with floats in
    /// shortest round-trip form. Hashing this identifies the run.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let p = &self.pulse;
        let c = &self.controls;
        let e = &self.ensemble;
        let _ = writeln!(s, "pulse.peak_intensity_w_cm2 = {:?}", p.peak_intensity);
        let _ = writeln!(s, "pulse.sigma_ns = {:?}", p.sigma);
        let _ = writeln!(s, "pulse.chirp_mhz_per_ns = {:?}", p.chirp);
        let _ = writeln!(s, "pulse.detuning_mhz = {:?}", p.detuning);
        let _ = writeln!(s, "train.count = {}", self.train.count);
        let _ = writeln!(s, "train.delay_ns = {:?}", self.train.delay);
        let _ = writeln!(s, "train.allow_overlap = {}", self.train.allow_overlap);
        let _ = writeln!(s, "mu_debye = {:?}", self.mu_debye);
        let _ = writeln!(s, "ensemble.temperature_uk = {:?}", e.temperature_uk);
        let _ = writeln!(s, "ensemble.nuclear_spin = {:?}", e.nuclear_spin);
        let _ = writeln!(s, "ensemble.alignment_floor = {:?}", e.alignment_floor);
        let _ = writeln!(s, "ensemble.projection = {}", e.projection);
        let _ = writeln!(s, "controls.tolerance = {:?}", c.tolerance);
        let _ = writeln!(s, "controls.initial_step_ns = {:?}", c.initial_step);
        let _ = writeln!(s, "controls.min_step_ns = {:?}", c.min_step);
        let _ = writeln!(s, "controls.max_step_ns = {:?}", c.max_step);
        let _ = writeln!(s, "controls.norm_drift_per_ns = {:?}", c.norm_drift_per_ns);
        let _ = writeln!(s, "stride_ns = {:?}", self.stride);
        let _ = writeln!(s, "tail_periods = {:?}", self.tail_periods);
        s
    }
}

/// Which samples a run records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// The whole run at the configured stride.
    Full,
    /// Start, end of the last pulse window and the field-free tail only.
    AfterPulses,
}

/// Scalar results of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub final_population: f64,
    pub population_even: f64,
    pub population_odd: f64,
    /// `None` when the projected population stays below the floor.
    pub static_alignment: Option<f64>,
    pub dynamic_amplitude: Option<f64>,
    pub max_norm_drift: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub truncated_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub result: EnsembleResult,
    pub summary: Summary,
    /// Field-free analysis window [end of last pulse, end of run], ns.
    pub window: (f64, f64),
    /// Revival period used for the summaries, ns.
    pub period: f64,
}

/// Thermal run of `spec` on `system`.
pub fn simulate(system: &PhotoassociationSystem, spec: &RunSpec, sampling: Sampling) -> Result<RunOutput, RunError> {
    spec.validate()?;
    let train = spec.pulse_train()?;
    let even = system.model(Parity::Even, &train, spec.mu_debye)?;
    let odd = system.model(Parity::Odd, &train, spec.mu_debye)?;
    let period = system.revival_period_ns();
    let t_pulse = train.window().1;
    let t_stop = t_pulse + spec.tail_periods * period;
    let samples = match sampling {
        Sampling::Full => sample_times(0.0, t_stop, spec.stride),
        Sampling::AfterPulses => {
            let mut s = vec![0.0];
            s.extend(sample_times(t_pulse, t_stop, spec.stride));
            s
        }
    };
    let result = run_ensemble(&even, &odd, &spec.ensemble, &samples, &spec.controls)?;
    let window = (t_pulse, t_stop);
    let floor = spec.ensemble.alignment_floor;
    let optional = |r: Result<f64, EnsembleError>| match r {
        Ok(v) => Ok(Some(v)),
        Err(EnsembleError::Undefined) => Ok(None),
        Err(e) => Err(e),
    };
    let static_alignment = optional(static_alignment(&result.total, window, period, floor))?;
    let dynamic_amplitude = optional(dynamic_alignment_amplitude(&result.total, window, period, floor))?;
    let summary = Summary {
        final_population: result.total.final_population(),
        population_even: result.even.final_population(),
        population_odd: result.odd.final_population(),
        static_alignment,
        dynamic_amplitude,
        max_norm_drift: result.stats.max_norm_drift,
        accepted_steps: result.stats.accepted,
        rejected_steps: result.stats.rejected,
        truncated_fraction: result.truncated_fraction,
    };
    Ok(RunOutput { result, summary, window, period })
}
