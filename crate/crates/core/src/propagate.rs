//! Time propagation in the interaction picture of the static energies.
//!
//! Within an M block the coupling is bipartite: intermediate levels (hubs)
//! couple only to scattering and target levels (leaves). The fourth-order
//! commutator-free Magnus step
//!
//! ```text
//! y ← exp(−iτ(α₁A₁ + α₂A₂)) exp(−iτ(α₂A₁ + α₁A₂)) y,   τ = 2π·10⁻³·h
//! ```
//!
//! with A₁, A₂ sampled at the Gauss nodes therefore only needs exponentials of
//! bipartite matrices [[0, C], [C†, 0]], which are evaluated exactly from the
//! eigen-decomposition of the small hub matrix CC†. Every step is unitary to
//! rounding. Step sizes adapt by step doubling.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::basis::{Block, HamiltonianModel};
use crate::channel::Manifold;

const SQRT3: f64 = 1.732_050_807_568_877_2;
const NODE1: f64 = 0.5 - SQRT3 / 6.0;
const NODE2: f64 = 0.5 + SQRT3 / 6.0;
// Weight of the earlier node in the first exponential, and of the later one.
const ALPHA_BIG: f64 = 0.25 + SQRT3 / 6.0;
const ALPHA_SMALL: f64 = 0.25 - SQRT3 / 6.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagationError {
    #[error("step size underflow at t = {time} ns (step {step:e} ns)")]
    StepUnderflow { time: f64, step: f64 },
    #[error("norm drift {drift:e} at t = {time} ns exceeds the contract")]
    NormDrift { time: f64, drift: f64 },
    #[error("state has {got} amplitudes, model has {expected} levels")]
    Dimension { got: usize, expected: usize },
    #[error("initial state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("sample times must be ordered in the direction of propagation")]
    Samples,
}

/// Integrator controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    /// Local error tolerance per step (absolute on unit-norm amplitudes).
    pub tolerance: f64,
    /// First trial step, ns.
    pub initial_step: f64,
    /// Step size below which propagation is abandoned, ns.
    pub min_step: f64,
    /// Largest step, ns.
    pub max_step: f64,
    /// Allowed norm drift per ns of propagated time.
    pub norm_drift_per_ns: f64,
}

impl Default for Controls {
    fn default() -> Self {
        Self { tolerance: 1e-10, initial_step: 0.01, min_step: 1e-9, max_step: 5.0, norm_drift_per_ns: 1e-8 }
    }
}

/// Counters from one propagation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub max_norm_drift: f64,
}

impl StepStats {
    pub fn merge(&mut self, other: StepStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.max_norm_drift = self.max_norm_drift.max(other.max_norm_drift);
    }
}

/// Complex amplitudes over the full basis (Schrödinger picture, static frame).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub time: f64,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// All population in basis level `index`.
    pub fn basis_state(len: usize, index: usize, time: f64) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); len];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { time, amplitudes }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Population in one manifold.
    pub fn population(&self, model: &HamiltonianModel, manifold: Manifold) -> f64 {
        model
            .basis()
            .levels()
            .iter()
            .zip(&self.amplitudes)
            .filter(|(l, _)| l.manifold == manifold)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Sampled trajectory of one propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn last(&self) -> &StateVector {
        self.states.last().expect("trajectory has at least one sample")
    }
}

/// Per-block propagation kernel shared by single-state and ensemble runs.
#[derive(Debug, Clone)]
pub struct BlockEngine<'a> {
    model: &'a HamiltonianModel,
    block: &'a Block,
    hub_freq: Vec<f64>,
    leaf_freq: Vec<f64>,
    coupling: DMatrix<f64>,
}

/// Block state: hub rows and leaf rows, one column per propagated vector,
/// in the interaction picture.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    pub hubs: DMatrix<Complex64>,
    pub leaves: DMatrix<Complex64>,
}

impl BlockState {
    pub fn columns(&self) -> usize {
        self.hubs.ncols()
    }

    fn max_abs_diff(&self, other: &BlockState) -> f64 {
        let a = self.hubs.iter().zip(other.hubs.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let b = self.leaves.iter().zip(other.leaves.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        a.max(b)
    }

    /// Largest |‖column‖² − 1|.
    pub fn norm_drift(&self) -> f64 {
        (0..self.columns())
            .map(|c| {
                let n: f64 = self.hubs.column(c).iter().chain(self.leaves.column(c).iter()).map(|z| z.norm_sqr()).sum();
                (n - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// cos(τ√S), sin(τ√S)/√S and (cos(τ√S) − 1)/S for the positive hub matrix
/// S = CC†. With them, exp(−iτ[[0, C], [C†, 0]]) maps (hubs, leaves) to
/// (cos·h − i sinc·C l, l + C†(cosm1·C l − i sinc·h)).
struct HubFunctions {
    cos: DMatrix<Complex64>,
    sinc: DMatrix<Complex64>,
    cosm1: DMatrix<Complex64>,
}

impl HubFunctions {
    fn new(s: &DMatrix<Complex64>, tau: f64) -> Self {
        let x2 = tau * tau * s.norm();
        if x2 <= 1.0 {
            Self::series(s, tau)
        } else {
            Self::spectral(s, tau)
        }
    }

    // Power series in τ²S; converges to rounding within 10 terms for τ²‖S‖ ≤ 1.
    fn series(s: &DMatrix<Complex64>, tau: f64) -> Self {
        let h = s.nrows();
        let id = DMatrix::<Complex64>::identity(h, h);
        let t2 = tau * tau;
        let bound = t2 * s.norm();
        let mut cos = id.clone();
        let mut sinc = id.scale(tau);
        let mut cosm1 = DMatrix::<Complex64>::zeros(h, h);
        let mut power = id; // S^(n-1)
        let mut coeff = 1.0; // τ^(2n)/(2n)! with sign
        let mut scalar = 1.0;
        for n in 1..=20 {
            let nf = n as f64;
            coeff *= -t2 / ((2.0 * nf - 1.0) * (2.0 * nf));
            cosm1 += power.scale(coeff);
            let next = &power * s;
            cos += next.scale(coeff);
            sinc += next.scale(coeff * tau / (2.0 * nf + 1.0));
            power = next;
            scalar *= bound / ((2.0 * nf - 1.0) * (2.0 * nf));
            if scalar < 1e-18 {
                break;
            }
        }
        Self { cos, sinc, cosm1 }
    }

    fn spectral(s: &DMatrix<Complex64>, tau: f64) -> Self {
        let eig = SymmetricEigen::new(s.clone());
        let q = eig.eigenvectors;
        let qa = q.adjoint();
        let h = s.nrows();
        let mut d = [DMatrix::<Complex64>::zeros(h, h), DMatrix::zeros(h, h), DMatrix::zeros(h, h)];
        for (e, &lam) in eig.eigenvalues.iter().enumerate() {
            let sv = lam.max(0.0).sqrt();
            let x = tau * sv;
            let (c, sn, cm) = if x < 1e-4 {
                let x2 = x * x;
                (1.0 - x2 / 2.0, tau * (1.0 - x2 / 6.0), -tau * tau * (0.5 - x2 / 24.0))
            } else {
                (x.cos(), x.sin() / sv, (x.cos() - 1.0) / (sv * sv))
            };
            d[0][(e, e)] = Complex64::new(c, 0.0);
            d[1][(e, e)] = Complex64::new(sn, 0.0);
            d[2][(e, e)] = Complex64::new(cm, 0.0);
        }
        let [dc, ds, dm] = d;
        Self { cos: &q * dc * &qa, sinc: &q * ds * &qa, cosm1: &q * dm * &qa }
    }
}

impl<'a> BlockEngine<'a> {
    pub fn new(model: &'a HamiltonianModel, block: &'a Block) -> Self {
        let levels = model.basis().levels();
        let energy = |p: usize| levels[block.indices[p]].energy;
        let hub_freq = block.hubs.iter().map(|&p| 2.0 * PI * 1e-3 * energy(p)).collect();
        let leaf_freq = block.leaves.iter().map(|&p| 2.0 * PI * 1e-3 * energy(p)).collect();
        let coupling = DMatrix::from_fn(block.hubs.len(), block.leaves.len(), |a, b| block.coupling[a][b]);
        Self { model, block, hub_freq, leaf_freq, coupling }
    }

    pub fn block(&self) -> &Block {
        self.block
    }

    /// Interaction-picture state for Schrödinger amplitudes given per block position.
    pub fn to_interaction(&self, t: f64, columns: &DMatrix<Complex64>) -> BlockState {
        let k = columns.ncols();
        let hubs = DMatrix::from_fn(self.block.hubs.len(), k, |a, c| {
            columns[(self.block.hubs[a], c)] * Complex64::from_polar(1.0, self.hub_freq[a] * t)
        });
        let leaves = DMatrix::from_fn(self.block.leaves.len(), k, |b, c| {
            columns[(self.block.leaves[b], c)] * Complex64::from_polar(1.0, self.leaf_freq[b] * t)
        });
        BlockState { hubs, leaves }
    }

    /// Schrödinger amplitudes (rows in block order) from an interaction-picture state.
    pub fn to_schrodinger(&self, t: f64, state: &BlockState) -> DMatrix<Complex64> {
        let k = state.columns();
        let mut out = DMatrix::zeros(self.block.indices.len(), k);
        for (a, &p) in self.block.hubs.iter().enumerate() {
            let ph = Complex64::from_polar(1.0, -self.hub_freq[a] * t);
            for c in 0..k {
                out[(p, c)] = state.hubs[(a, c)] * ph;
            }
        }
        for (b, &p) in self.block.leaves.iter().enumerate() {
            let ph = Complex64::from_polar(1.0, -self.leaf_freq[b] * t);
            for c in 0..k {
                out[(p, c)] = state.leaves[(b, c)] * ph;
            }
        }
        out
    }

    /// Interaction-picture hub × leaf coupling (MHz) at time t.
    fn coupling_at(&self, t: f64) -> DMatrix<Complex64> {
        let mut f = Complex64::new(0.0, 0.0);
        for p in self.model.train().pulses() {
            let a = p.envelope(t, self.model.mu_debye());
            if a != 0.0 {
                f += Complex64::from_polar(a, -2.0 * PI * p.carrier_cycles(t));
            }
        }
        let hp: Vec<Complex64> = self.hub_freq.iter().map(|w| Complex64::from_polar(1.0, w * t)).collect();
        let lp: Vec<Complex64> = self.leaf_freq.iter().map(|w| Complex64::from_polar(1.0, -w * t)).collect();
        DMatrix::from_fn(self.coupling.nrows(), self.coupling.ncols(), |a, b| {
            f * hp[a] * lp[b] * self.coupling[(a, b)]
        })
    }

    /// exp(−iτ [[0, C], [C†, 0]]) applied to `y`.
    fn apply_exp(c: &DMatrix<Complex64>, tau: f64, y: &BlockState) -> BlockState {
        let h = c.nrows();
        if h == 0 || c.ncols() == 0 {
            return y.clone();
        }
        let l = c.ncols();
        let mut s = DMatrix::<Complex64>::zeros(h, h);
        for a in 0..h {
            for b in a..h {
                let mut acc = Complex64::new(0.0, 0.0);
                for e in 0..l {
                    acc += c[(a, e)] * c[(b, e)].conj();
                }
                s[(a, b)] = acc;
                s[(b, a)] = acc.conj();
            }
        }
        let f = HubFunctions::new(&s, tau);
        let k = y.columns();
        // The matrices are short and wide, where generic complex products are
        // slow; explicit loops keep the leaf sums contiguous.
        let ct = c.transpose();
        let mut cy = DMatrix::<Complex64>::zeros(h, k);
        for col in 0..k {
            let leaf = y.leaves.column(col);
            let leaf = leaf.as_slice();
            for a in 0..h {
                let row = ct.column(a);
                cy[(a, col)] = row.as_slice().iter().zip(leaf).map(|(x, z)| x * z).sum();
            }
        }
        let i = Complex64::new(0.0, 1.0);
        let hubs = &f.cos * &y.hubs - (&f.sinc * &cy) * i;
        let back = &f.cosm1 * &cy - (&f.sinc * &y.hubs) * i;
        let mut leaves = y.leaves.clone();
        let cc = c.map(|z| z.conj());
        for col in 0..k {
            let out = leaves.column_mut(col);
            let out = out.data.into_slice_mut();
            for a in 0..h {
                let coef = back[(a, col)];
                if coef == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (b, o) in out.iter_mut().enumerate().take(l) {
                    *o += cc[(a, b)] * coef;
                }
            }
        }
        BlockState { hubs, leaves }
    }

    /// One fourth-order commutator-free Magnus step from t to t + h.
    pub fn step(&self, t: f64, h: f64, y: &BlockState) -> BlockState {
        let a1 = self.coupling_at(t + NODE1 * h);
        let a2 = self.coupling_at(t + NODE2 * h);
        let tau = 2.0 * PI * 1e-3 * h;
        let first = a1.scale(ALPHA_BIG) + a2.scale(ALPHA_SMALL);
        let second = a1.scale(ALPHA_SMALL) + a2.scale(ALPHA_BIG);
        let mid = Self::apply_exp(&first, tau, y);
        Self::apply_exp(&second, tau, &mid)
    }

    /// Propagate from `t0` through each time in `samples` (ordered away from t0),
    /// calling `visit` at every sample with the interaction-picture state.
    pub fn run<F>(
        &self,
        t0: f64,
        mut y: BlockState,
        samples: &[f64],
        controls: &Controls,
        mut visit: F,
    ) -> Result<(BlockState, StepStats), PropagationError>
    where
        F: FnMut(usize, f64, &BlockState),
    {
        let mut stats = StepStats::default();
        let mut t = t0;
        let dir = match samples.last() {
            Some(&end) if end < t0 => -1.0,
            _ => 1.0,
        };
        if samples.windows(2).any(|w| dir * (w[1] - w[0]) < 0.0) || samples.first().is_some_and(|&s| dir * (s - t0) < 0.0)
        {
            return Err(PropagationError::Samples);
        }
        let mut h = controls.initial_step.min(controls.max_step);
        let drift0 = y.norm_drift();
        for (k, &target) in samples.iter().enumerate() {
            while dir * (target - t) > 1e-12 {
                let remaining = dir * (target - t);
                let trial = h.min(remaining).min(controls.max_step);
                let big = self.step(t, dir * trial, &y);
                let half = self.step(t, dir * trial / 2.0, &y);
                let small = self.step(t + dir * trial / 2.0, dir * trial / 2.0, &half);
                let err = small.max_abs_diff(&big) / 15.0;
                if err <= controls.tolerance {
                    t = if trial == remaining { target } else { t + dir * trial };
                    y = small;
                    stats.accepted += 1;
                    let grow = if err == 0.0 { 2.0 } else { (0.9 * (controls.tolerance / err).powf(0.2)).clamp(0.2, 2.0) };
                    if trial == h.min(controls.max_step) || grow < 1.0 {
                        h = trial * grow;
                    }
                } else {
                    stats.rejected += 1;
                    h = trial * (0.9 * (controls.tolerance / err).powf(0.2)).clamp(0.1, 0.9);
                    if h < controls.min_step {
                        return Err(PropagationError::StepUnderflow { time: t, step: h });
                    }
                }
            }
            let drift = (y.norm_drift() - drift0).abs();
            stats.max_norm_drift = stats.max_norm_drift.max(drift);
            let allowed = controls.norm_drift_per_ns * (t - t0).abs().max(1.0);
            if drift > allowed {
                return Err(PropagationError::NormDrift { time: t, drift });
            }
            visit(k, t, &y);
        }
        Ok((y, stats))
    }
}

/// Propagate one state through the model, sampling at `samples` (which must run
/// monotonically away from the initial time).
pub fn propagate(
    initial: &StateVector,
    model: &HamiltonianModel,
    samples: &[f64],
    controls: &Controls,
) -> Result<Trajectory, PropagationError> {
    let n = model.len();
    if initial.amplitudes.len() != n {
        return Err(PropagationError::Dimension { got: initial.amplitudes.len(), expected: n });
    }
    let norm = initial.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(PropagationError::NotNormalized(norm));
    }
    let blocks = model.blocks();
    let mut states: Vec<StateVector> = samples
        .iter()
        .map(|&t| StateVector { time: t, amplitudes: vec![Complex64::new(0.0, 0.0); n] })
        .collect();
    let mut stats = StepStats::default();
    for block in &blocks {
        let weight: f64 = block.indices.iter().map(|&i| initial.amplitudes[i].norm_sqr()).sum();
        if weight == 0.0 {
            continue;
        }
        let engine = BlockEngine::new(model, block);
        // Normalize the block component so drift checks are scale free.
        let scale = weight.sqrt();
        let col = DMatrix::from_fn(block.indices.len(), 1, |p, _| initial.amplitudes[block.indices[p]] / scale);
        let y0 = engine.to_interaction(initial.time, &col);
        let (_, s) = engine.run(initial.time, y0, samples, controls, |k, t, y| {
            let amps = engine.to_schrodinger(t, y);
            for (p, &g) in block.indices.iter().enumerate() {
                states[k].amplitudes[g] = amps[(p, 0)] * scale;
            }
        })?;
        stats.merge(s);
    }
    Ok(Trajectory { times: samples.to_vec(), states, stats })
}

/// Field-free evolution by exact diagonal phases with the static energies.
pub fn free_evolve(state: &StateVector, model: &HamiltonianModel, duration: f64) -> StateVector {
    let amplitudes = state
        .amplitudes
        .iter()
        .zip(model.basis().levels())
        .map(|(a, l)| a * Complex64::from_polar(1.0, -2.0 * PI * 1e-3 * l.energy * duration))
        .collect();
    StateVector { time: state.time + duration, amplitudes }
}

/// Evenly spaced sample times from `t0` to `t1` inclusive with at most `stride` spacing.
pub fn sample_times(t0: f64, t1: f64, stride: f64) -> Vec<f64> {
    let n = ((t1 - t0).abs() / stride).ceil().max(1.0) as usize;
    (0..=n).map(|k| t0 + (t1 - t0) * k as f64 / n as f64).collect()
}
