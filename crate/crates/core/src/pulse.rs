//! Gaussian, linearly chirped pulses and phase-coherent pulse trains.
//!
//! A pulse couples with `Ω₀ exp(−(t − t_c)²/σ²)` and carries the instantaneous
//! detuning `δ(t) = δ + r (t − t_c)` from the intermediate band origin. All
//! pulses of a train share one carrier phase reference, so pulse k contributes
//! the phase `2π [δ_k t + r_k (t − t_k)²/2]` with t in ns and frequencies in MHz
//! (times 10⁻³).

use std::f64::consts::PI;

use thiserror::Error;

use crate::units::{DEBYE_SI, EPSILON0_SI, PLANCK_SI, SPEED_OF_LIGHT_SI};

/// Minimum center-to-center spacing of train pulses, in units of σ.
pub const MIN_GAP_SIGMAS: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("pulse width must be positive, got {0} ns")]
    Width(f64),
    #[error("peak intensity must be non-negative and finite, got {0} W/cm²")]
    Intensity(f64),
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("a train needs at least one pulse")]
    EmptyTrain,
    #[error("delay {delay} ns is shorter than {min} ns (5σ); pass allow_overlap to override")]
    Overlap { delay: f64, min: f64 },
    #[error("train pulses must be time-ordered")]
    Order,
}

/// One linearly Z-polarized Gaussian pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    peak_intensity: f64,
    sigma: f64,
    chirp: f64,
    center: f64,
    detuning: f64,
}

impl PulseSpec {
    /// `peak_intensity` in W/cm², `sigma` and `center` in ns, `chirp` in MHz/ns and
    /// `detuning` in MHz at the pulse peak.
    pub fn new(peak_intensity: f64, sigma: f64, chirp: f64, center: f64, detuning: f64) -> Result<Self, PulseError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(PulseError::Width(sigma));
        }
        if !(peak_intensity >= 0.0 && peak_intensity.is_finite()) {
            return Err(PulseError::Intensity(peak_intensity));
        }
        for (name, v) in [("chirp", chirp), ("center", center), ("detuning", detuning)] {
            if !v.is_finite() {
                return Err(PulseError::NonFinite(name));
            }
        }
        Ok(Self { peak_intensity, sigma, chirp, center, detuning })
    }

    /// Transform-limited pulse.
    pub fn transform_limited(peak_intensity: f64, sigma: f64, center: f64, detuning: f64) -> Result<Self, PulseError> {
        Self::new(peak_intensity, sigma, 0.0, center, detuning)
    }

    pub fn peak_intensity(&self) -> f64 {
        self.peak_intensity
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn chirp(&self) -> f64 {
        self.chirp
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn with_center(self, center: f64) -> Self {
        Self { center, ..self }
    }

    pub fn with_intensity(self, peak_intensity: f64) -> Result<Self, PulseError> {
        Self::new(peak_intensity, self.sigma, self.chirp, self.center, self.detuning)
    }

    /// Peak coupling Ω₀ in MHz for a transition dipole `mu_debye`.
    pub fn peak_rabi(&self, mu_debye: f64) -> f64 {
        intensity_to_rabi(self.peak_intensity, mu_debye)
    }

    /// exp(−(t − t_c)²/σ²).
    pub fn shape(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.sigma;
        (-x * x).exp()
    }

    /// Ω₀ exp(−(t − t_c)²/σ²) in MHz.
    pub fn envelope(&self, t: f64, mu_debye: f64) -> f64 {
        self.peak_rabi(mu_debye) * self.shape(t)
    }

    /// δ(t) = δ + r (t − t_c) in MHz.
    pub fn instantaneous_detuning(&self, t: f64) -> f64 {
        self.detuning + self.chirp * (t - self.center)
    }

    /// Coefficient χ of the quadratic phase χ (t − t_c)², in rad/ns².
    pub fn quadratic_phase_coefficient(&self) -> f64 {
        PI * self.chirp * 1e-3
    }

    /// Carrier phase of this pulse relative to the shared reference, in cycles.
    pub fn carrier_cycles(&self, t: f64) -> f64 {
        let s = t - self.center;
        1e-3 * (self.detuning * t + 0.5 * self.chirp * s * s)
    }

    /// Start and end of the default integration window t_c ± 5σ.
    pub fn window(&self) -> (f64, f64) {
        (self.center - MIN_GAP_SIGMAS * self.sigma, self.center + MIN_GAP_SIGMAS * self.sigma)
    }

    /// ∫ Ω(t)² dt in MHz²·ns.
    pub fn energy(&self, mu_debye: f64) -> f64 {
        let o = self.peak_rabi(mu_debye);
        o * o * self.sigma * (PI / 2.0).sqrt()
    }
}

/// Ω₀ = μ₀ E₀ / h in MHz with E₀ = √(2 I₀/(ε₀ c)).
pub fn intensity_to_rabi(peak_intensity_w_cm2: f64, mu_debye: f64) -> f64 {
    let intensity = peak_intensity_w_cm2 * 1e4;
    let field = (2.0 * intensity / (EPSILON0_SI * SPEED_OF_LIGHT_SI)).sqrt();
    mu_debye * DEBYE_SI * field / PLANCK_SI * 1e-6
}

/// Time-ordered, phase-coherent sequence of pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    pulses: Vec<PulseSpec>,
}

impl PulseTrain {
    pub fn new(pulses: Vec<PulseSpec>) -> Result<Self, PulseError> {
        if pulses.is_empty() {
            return Err(PulseError::EmptyTrain);
        }
        if pulses.windows(2).any(|w| w[1].center < w[0].center) {
            return Err(PulseError::Order);
        }
        Ok(Self { pulses })
    }

    pub fn single(pulse: PulseSpec) -> Self {
        Self { pulses: vec![pulse] }
    }

    pub fn pulses(&self) -> &[PulseSpec] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn first(&self) -> &PulseSpec {
        &self.pulses[0]
    }

    pub fn last(&self) -> &PulseSpec {
        &self.pulses[self.pulses.len() - 1]
    }

    /// Union of the per-pulse windows.
    pub fn window(&self) -> (f64, f64) {
        let start = self.pulses.iter().map(|p| p.window().0).fold(f64::INFINITY, f64::min);
        let end = self.pulses.iter().map(|p| p.window().1).fold(f64::NEG_INFINITY, f64::max);
        (start, end)
    }

    /// Index of the pulse whose center is nearest to `t`.
    pub fn active(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, p) in self.pulses.iter().enumerate() {
            if (t - p.center).abs() < (t - self.pulses[best].center).abs() {
                best = k;
            }
        }
        best
    }

    /// Detuning of the active pulse.
    pub fn instantaneous_detuning(&self, t: f64) -> f64 {
        self.pulses[self.active(t)].instantaneous_detuning(t)
    }

    /// D(t) = D₀ + ∫₀ᵗ δ_active dt' in MHz·ns, continuous across pulse
    /// hand-overs. D₀ is chosen so that D equals the carrier phase of the first
    /// pulse while it is active.
    pub fn integrated_detuning(&self, t: f64) -> f64 {
        let first = &self.pulses[0];
        let mut acc = 0.5 * first.chirp * first.center * first.center;
        let mut from = 0.0;
        for k in 0..self.pulses.len() {
            let to = if k + 1 < self.pulses.len() {
                0.5 * (self.pulses[k].center + self.pulses[k + 1].center)
            } else {
                f64::INFINITY
            };
            let upper = t.min(to);
            if upper > from || k == 0 {
                let p = &self.pulses[k];
                let prim = |s: f64| p.detuning * s + 0.5 * p.chirp * (s - p.center).powi(2);
                acc += prim(upper) - prim(from);
            }
            if t <= to {
                break;
            }
            from = to;
        }
        acc
    }

    /// Complex envelope factor of the whole train in the frame that rotates with
    /// the active detuning: Σ_k Ω_k(t) e^{−i2π[φ_k(t) − D(t)·10⁻³]}, as (re, im) in MHz.
    pub fn field(&self, t: f64, mu_debye: f64) -> (f64, f64) {
        let d = 1e-3 * self.integrated_detuning(t);
        let mut re = 0.0;
        let mut im = 0.0;
        for p in &self.pulses {
            let a = p.envelope(t, mu_debye);
            if a == 0.0 {
                continue;
            }
            let ph = -2.0 * PI * (p.carrier_cycles(t) - d);
            re += a * ph.cos();
            im += a * ph.sin();
        }
        (re, im)
    }
}

/// `n` copies of `base` with centers `t_c + k·delay`.
pub fn make_train(base: PulseSpec, n: usize, delay: f64, allow_overlap: bool) -> Result<PulseTrain, PulseError> {
    if n == 0 {
        return Err(PulseError::EmptyTrain);
    }
    if !delay.is_finite() {
        return Err(PulseError::NonFinite("delay"));
    }
    let min = MIN_GAP_SIGMAS * base.sigma;
    if n > 1 && delay < min && !allow_overlap {
        return Err(PulseError::Overlap { delay, min });
    }
    if n > 1 && delay < 0.0 {
        return Err(PulseError::Order);
    }
    let pulses = (0..n).map(|k| base.with_center(base.center + k as f64 * delay)).collect();
    Ok(PulseTrain { pulses })
}
