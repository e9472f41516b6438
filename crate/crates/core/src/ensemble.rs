//! Thermal ensembles, nuclear-spin weighting and alignment observables.
//!
//! Alignment is the conditional expectation ⟨cos²θ⟩ of the amplitudes
//! projected onto one manifold (the target by default), renormalized by the
//! projected population. Mixtures combine population-weighted sums, so the
//! alignment of a mixture is Σ wᵢ Pᵢ Aᵢ / Σ wᵢ Pᵢ.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::erf::erf;
use thiserror::Error;

use crate::angmom::cos2theta_element;
use crate::basis::{ChannelBasis, HamiltonianModel, Parity};
use crate::channel::Manifold;
use crate::propagate::{BlockEngine, Controls, PropagationError, StepStats, Trajectory};
use crate::units::KB_MHZ_PER_UK;

/// Projected population below which alignment is reported as undefined.
pub const DEFAULT_ALIGNMENT_FLOOR: f64 = 1e-10;

/// Members lighter than this are not propagated; their total contribution to
/// any weighted observable is below double-precision resolution.
pub const NEGLIGIBLE_MEMBER_WEIGHT: f64 = 1e-16;

/// Thermal ensemble fraction above which truncation by the box cap is reported.
pub const TRUNCATION_WARNING: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error("temperature must be non-negative and finite, got {0} μK")]
    Temperature(f64),
    #[error("nuclear spin must be positive, got {0}")]
    NuclearSpin(f64),
    #[error("basis has no scattering levels")]
    NoMembers,
    #[error("traces are sampled on different time grids")]
    GridMismatch,
    #[error("window [{start}, {end}] ns is shorter than one period of {period} ns")]
    Window { start: f64, end: f64, period: f64 },
    #[error("no samples with defined alignment in the window")]
    Undefined,
}

/// Statistical description of the initial scattering ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub temperature_uk: f64,
    /// Nuclear spin I of each atom; odd:even = (I + 1):I.
    pub nuclear_spin: f64,
    pub alignment_floor: f64,
    /// Manifold onto which alignment is projected.
    pub projection: Manifold,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self { temperature_uk: 100.0, nuclear_spin: 1.5, alignment_floor: DEFAULT_ALIGNMENT_FLOOR, projection: Manifold::Target }
    }
}

/// Fractions of the odd and even parity families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityFractions {
    pub odd: f64,
    pub even: f64,
}

impl ParityFractions {
    pub fn of(&self, parity: Parity) -> f64 {
        match parity {
            Parity::Odd => self.odd,
            Parity::Even => self.even,
        }
    }
}

/// P_odd / P_even = (I + 1)/I, normalized.
pub fn parity_fractions(nuclear_spin: f64) -> Result<ParityFractions, EnsembleError> {
    if !(nuclear_spin > 0.0 && nuclear_spin.is_finite()) {
        return Err(EnsembleError::NuclearSpin(nuclear_spin));
    }
    let total = 2.0 * nuclear_spin + 1.0;
    Ok(ParityFractions { odd: (nuclear_spin + 1.0) / total, even: nuclear_spin / total })
}

/// One initial basis level and its weight within its parity family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalMember {
    pub index: usize,
    pub weight: f64,
}

/// Weighted initial states of one parity family; weights sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalEnsemble {
    pub parity: Parity,
    pub members: Vec<ThermalMember>,
    /// Estimated thermal weight lying above the highest included box state.
    pub truncated_fraction: f64,
}

/// Boltzmann-weighted scattering levels of `basis`, every M sublevel equally.
pub fn thermal_initial_states(basis: &ChannelBasis, spec: &EnsembleSpec) -> Result<ThermalEnsemble, EnsembleError> {
    let t = spec.temperature_uk;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(EnsembleError::Temperature(t));
    }
    let kt = t * KB_MHZ_PER_UK;
    let levels = basis.levels();
    let scattering: Vec<usize> = (0..levels.len()).filter(|&i| levels[i].manifold == Manifold::Scattering).collect();
    if scattering.is_empty() {
        return Err(EnsembleError::NoMembers);
    }
    let e_min = scattering.iter().map(|&i| levels[i].energy).fold(f64::INFINITY, f64::min);
    let boltzmann = |e: f64| {
        if kt > 0.0 {
            (-(e - e_min) / kt).exp()
        } else if e == e_min {
            1.0
        } else {
            0.0
        }
    };
    let raw: Vec<f64> = scattering.iter().map(|&i| boltzmann(levels[i].energy)).collect();
    let z: f64 = raw.iter().sum();
    let members = scattering.iter().zip(&raw).map(|(&index, &w)| ThermalMember { index, weight: w / z }).collect();

    // Box levels are evenly spaced in momentum, so the density of states goes
    // as E^(-1/2) and the weight below E_c is erf(√(E_c/kT)) of the channel total.
    let mut included = 0.0;
    let mut estimated = 0.0;
    let mut js: Vec<i32> = scattering.iter().map(|&i| levels[i].state.j()).collect();
    js.sort();
    js.dedup();
    for j in js {
        let mut es: Vec<f64> = scattering
            .iter()
            .filter(|&&i| levels[i].state.j() == j && levels[i].state.m() == 0)
            .map(|&i| levels[i].energy)
            .collect();
        es.sort_by(f64::total_cmp);
        let zj: f64 = es.iter().map(|&e| boltzmann(e)).sum::<f64>() * (2 * j + 1) as f64;
        let cut = match es.as_slice() {
            [.., a, b] => b + 0.5 * (b - a),
            [b] => 2.0 * b,
            [] => continue,
        };
        let f = if kt > 0.0 { erf((cut.max(0.0) / kt).sqrt()) } else { 1.0 };
        included += zj;
        estimated += zj / f.max(f64::MIN_POSITIVE);
    }
    let truncated_fraction = if estimated > 0.0 { (1.0 - included / estimated).max(0.0) } else { 0.0 };
    if truncated_fraction > TRUNCATION_WARNING {
        log::warn!(
            "{} family: box cap truncates {:.2}% of the thermal weight at {t} μK",
            basis.parity(),
            100.0 * truncated_fraction
        );
    }
    Ok(ThermalEnsemble { parity: basis.parity(), members, truncated_fraction })
}

/// Population of the projected manifold and its cos²θ-weighted counterpart
/// Σ P·⟨cos²θ⟩ on a time grid. Alignment follows as their ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableTrace {
    pub times: Vec<f64>,
    pub population: Vec<f64>,
    pub weighted_alignment: Vec<f64>,
}

impl ObservableTrace {
    fn zeros(times: &[f64]) -> Self {
        Self { times: times.to_vec(), population: vec![0.0; times.len()], weighted_alignment: vec![0.0; times.len()] }
    }

    /// Conditional ⟨cos²θ⟩, `None` where the population is below `floor`.
    pub fn alignment(&self, floor: f64) -> Vec<Option<f64>> {
        self.population
            .iter()
            .zip(&self.weighted_alignment)
            .map(|(&p, &n)| (p >= floor && p > 0.0).then(|| n / p))
            .collect()
    }

    pub fn final_population(&self) -> f64 {
        self.population.last().copied().unwrap_or(0.0)
    }
}

/// cos²θ restricted to the levels of `manifold`, as (row, column, element) triples.
fn cos2_entries(basis: &ChannelBasis, indices: &[usize], manifold: Manifold) -> Vec<(usize, usize, f64)> {
    let levels = basis.levels();
    let sel: Vec<usize> = (0..indices.len()).filter(|&p| levels[indices[p]].manifold == manifold).collect();
    let mut out = Vec::new();
    for &a in &sel {
        for &b in &sel {
            let la = &levels[indices[a]];
            let lb = &levels[indices[b]];
            if la.n != lb.n && !basis.is_vibronic() {
                continue;
            }
            let x = if basis.is_vibronic() {
                if a == b {
                    1.0 / 3.0
                } else {
                    0.0
                }
            } else {
                cos2theta_element(&la.state, &lb.state)
            };
            if x != 0.0 {
                out.push((a, b, x));
            }
        }
    }
    out
}

fn observe(amps: impl Fn(usize) -> Complex64, entries: &[(usize, usize, f64)]) -> (f64, f64) {
    let mut pop = 0.0;
    let mut num = 0.0;
    for &(a, b, x) in entries {
        let z = amps(a).conj() * amps(b) * x;
        num += z.re;
        if a == b {
            pop += amps(a).norm_sqr();
        }
    }
    (pop, num)
}

/// Projected population and alignment of a single trajectory.
pub fn alignment_trace(traj: &Trajectory, model: &HamiltonianModel, projection: Manifold) -> ObservableTrace {
    let indices: Vec<usize> = (0..model.len()).collect();
    let entries = cos2_entries(model.basis(), &indices, projection);
    let mut out = ObservableTrace::zeros(&traj.times);
    for (k, s) in traj.states.iter().enumerate() {
        let (p, n) = observe(|i| s.amplitudes[i], &entries);
        out.population[k] = p;
        out.weighted_alignment[k] = n;
    }
    out
}

/// Weighted incoherent mixture of traces sharing one time grid.
pub fn average_ensemble(members: &[(f64, &ObservableTrace)]) -> Result<ObservableTrace, EnsembleError> {
    let Some((_, first)) = members.first() else {
        return Err(EnsembleError::NoMembers);
    };
    let mut out = ObservableTrace::zeros(&first.times);
    for (w, tr) in members {
        if tr.times != out.times {
            return Err(EnsembleError::GridMismatch);
        }
        for k in 0..out.times.len() {
            out.population[k] += w * tr.population[k];
            out.weighted_alignment[k] += w * tr.weighted_alignment[k];
        }
    }
    Ok(out)
}

/// Propagate every member of one parity family and sum their weighted
/// observables. M < 0 blocks mirror M > 0 and are folded in with weight 2.
///
/// The integrator stops at the end of the pulse train; later samples use the
/// exact field-free phases.
pub fn propagate_family(
    model: &HamiltonianModel,
    thermal: &ThermalEnsemble,
    samples: &[f64],
    controls: &Controls,
    projection: Manifold,
) -> Result<(ObservableTrace, StepStats), EnsembleError> {
    let blocks = model.blocks();
    let t_end = model.train().window().1;
    let t0 = samples.first().copied().unwrap_or(0.0);
    let (during, after): (Vec<f64>, Vec<f64>) = samples.iter().partition(|&&t| t <= t_end);
    let mut stop = during.clone();
    if !after.is_empty() && stop.last().is_none_or(|&t| t < t_end) {
        stop.push(t_end.max(t0));
    }

    let per_block: Vec<Result<(ObservableTrace, StepStats), PropagationError>> = blocks
        .par_iter()
        .filter(|b| b.m >= 0)
        .map(|block| {
            let fold = if block.m > 0 { 2.0 } else { 1.0 };
            let members: Vec<(usize, f64)> = thermal
                .members
                .iter()
                .filter(|m| m.weight >= NEGLIGIBLE_MEMBER_WEIGHT)
                .filter_map(|m| block.indices.iter().position(|&g| g == m.index).map(|p| (p, fold * m.weight)))
                .collect();
            let mut trace = ObservableTrace::zeros(samples);
            if members.is_empty() {
                return Ok((trace, StepStats::default()));
            }
            let engine = BlockEngine::new(model, block);
            let entries = cos2_entries(model.basis(), &block.indices, projection);
            let init = DMatrix::from_fn(block.indices.len(), members.len(), |p, c| {
                if p == members[c].0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let record = |trace: &mut ObservableTrace, k: usize, amps: &DMatrix<Complex64>| {
                for (c, &(_, w)) in members.iter().enumerate() {
                    let (p, n) = observe(|a| amps[(a, c)], &entries);
                    trace.population[k] += w * p;
                    trace.weighted_alignment[k] += w * n;
                }
            };
            let y0 = engine.to_interaction(t0, &init);
            let n_during = during.len();
            let (y_end, stats) = engine.run(t0, y0, &stop, controls, |k, t, y| {
                if k < n_during {
                    record(&mut trace, k, &engine.to_schrodinger(t, y));
                }
            })?;
            for (j, &t) in after.iter().enumerate() {
                record(&mut trace, n_during + j, &engine.to_schrodinger(t, &y_end));
            }
            Ok((trace, stats))
        })
        .collect();

    let mut total = ObservableTrace::zeros(samples);
    let mut stats = StepStats::default();
    for r in per_block {
        let (tr, s) = r?;
        for k in 0..samples.len() {
            total.population[k] += tr.population[k];
            total.weighted_alignment[k] += tr.weighted_alignment[k];
        }
        stats.merge(s);
    }
    Ok((total, stats))
}

/// Parity-resolved and total observables of a thermal run.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub even: ObservableTrace,
    pub odd: ObservableTrace,
    pub total: ObservableTrace,
    pub fractions: ParityFractions,
    pub alignment_floor: f64,
    pub truncated_fraction: f64,
    pub stats: StepStats,
}

impl EnsembleResult {
    pub fn final_population(&self) -> f64 {
        self.total.final_population()
    }
}

/// Thermal average over both parity families.
pub fn run_ensemble(
    even: &HamiltonianModel,
    odd: &HamiltonianModel,
    spec: &EnsembleSpec,
    samples: &[f64],
    controls: &Controls,
) -> Result<EnsembleResult, EnsembleError> {
    let fractions = parity_fractions(spec.nuclear_spin)?;
    let te = thermal_initial_states(even.basis(), spec)?;
    let to = thermal_initial_states(odd.basis(), spec)?;
    let (even_trace, se) = propagate_family(even, &te, samples, controls, spec.projection)?;
    let (odd_trace, so) = propagate_family(odd, &to, samples, controls, spec.projection)?;
    let total = average_ensemble(&[(fractions.odd, &odd_trace), (fractions.even, &even_trace)])?;
    let mut stats = se;
    stats.merge(so);
    Ok(EnsembleResult {
        times: samples.to_vec(),
        even: even_trace,
        odd: odd_trace,
        total,
        fractions,
        alignment_floor: spec.alignment_floor,
        truncated_fraction: fractions.even * te.truncated_fraction + fractions.odd * to.truncated_fraction,
        stats,
    })
}

/// Samples covering the largest whole number of periods inside `window`.
fn period_window(
    trace: &ObservableTrace,
    window: (f64, f64),
    period: f64,
) -> Result<Vec<usize>, EnsembleError> {
    let (start, end) = window;
    let whole = ((end - start) / period + 1e-9).floor();
    if !(whole >= 1.0) {
        return Err(EnsembleError::Window { start, end, period });
    }
    let stop = start + whole * period;
    let eps = 1e-9 * period;
    Ok((0..trace.times.len()).filter(|&k| trace.times[k] >= start - eps && trace.times[k] <= stop + eps).collect())
}

/// Population-weighted time average of ⟨cos²θ⟩ over whole periods in `window`.
pub fn static_alignment(
    trace: &ObservableTrace,
    window: (f64, f64),
    period: f64,
    floor: f64,
) -> Result<f64, EnsembleError> {
    let idx = period_window(trace, window, period)?;
    let defined: Vec<usize> = idx.into_iter().filter(|&k| trace.population[k] >= floor && trace.population[k] > 0.0).collect();
    if defined.len() < 2 {
        return Err(EnsembleError::Undefined);
    }
    // Trapezoid rule on the (possibly uneven) sample grid.
    let mut num = 0.0;
    let mut den = 0.0;
    for w in defined.windows(2) {
        let dt = trace.times[w[1]] - trace.times[w[0]];
        num += 0.5 * dt * (trace.weighted_alignment[w[0]] + trace.weighted_alignment[w[1]]);
        den += 0.5 * dt * (trace.population[w[0]] + trace.population[w[1]]);
    }
    Ok(num / den)
}

/// Half the peak-to-peak excursion of ⟨cos²θ⟩ over whole periods in `window`.
pub fn dynamic_alignment_amplitude(
    trace: &ObservableTrace,
    window: (f64, f64),
    period: f64,
    floor: f64,
) -> Result<f64, EnsembleError> {
    let idx = period_window(trace, window, period)?;
    let align = trace.alignment(floor);
    let vals: Vec<f64> = idx.into_iter().filter_map(|k| align[k]).collect();
    if vals.is_empty() {
        return Err(EnsembleError::Undefined);
    }
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(0.5 * (max - min))
}

/// Closed-form ⟨cos²θ⟩(t) of c₀|J=0⟩ + c₂|J=2⟩ (M = Ω = 0) split by 6B.
pub fn two_state_alignment(c0: f64, c2: f64, b_mhz: f64, t_ns: f64) -> f64 {
    let x00 = 1.0 / 3.0;
    let x22 = 1.0 / 3.0 + (2.0 / 3.0) * 6.0 / 21.0;
    let x02 = 2.0 / (3.0 * 5f64.sqrt());
    let norm = c0 * c0 + c2 * c2;
    (c0 * c0 * x00 + c2 * c2 * x22 + 2.0 * c0 * c2 * x02 * (2.0 * PI * 1e-3 * 6.0 * b_mhz * t_ns).cos()) / norm
}
