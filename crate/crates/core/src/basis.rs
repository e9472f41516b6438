//! Three-manifold ro-vibronic basis and the rotating-frame Hamiltonian.
//!
//! Energies are MHz relative to the ground (scattering) asymptote in a frame
//! rotating with the carrier tuned to the intermediate band origin. In that
//! frame the scattering box states sit at their collision energies, the
//! intermediate levels at their rotational energy, and the target levels at
//! `−binding + B_v J(J+1)`. The pulse detuning enters the intermediate
//! diagonal as `−δ(t)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angmom::{dipole_rotational_factor, AngularState};
use crate::channel::{ChannelLabel, Manifold};
use crate::pulse::PulseTrain;
use crate::radial::{franck_condon, RadialSolution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("missing radial solution for channel {0}")]
    MissingChannel(ChannelLabel),
    #[error("channel {label} has only {available} box states, {requested} requested")]
    BoxStates { label: ChannelLabel, available: usize, requested: usize },
    #[error("missing Franck-Condon entry between {0} and {1}")]
    MissingOverlap(LevelKey, LevelKey),
    #[error("J_max = {0} is outside the supported range")]
    JMax(i32),
    #[error("coupling {0} -> {1} must join an intermediate level to a lower level of the same M")]
    InvalidCoupling(usize, usize),
}

/// Parity family, named after the rotational parity of the scattering states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(j: i32) -> Self {
        if j % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn contains(&self, j: i32) -> bool {
        Parity::of(j) == *self
    }

    pub fn name(&self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Radial identity of a level: manifold, J and vibrational or box index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelKey {
    pub manifold: Manifold,
    pub j: i32,
    pub n: usize,
}

impl fmt::Display for LevelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} J={} n={}", self.manifold, self.j, self.n)
    }
}

/// One basis state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelLevel {
    pub manifold: Manifold,
    /// Box index for scattering levels, vibrational index otherwise.
    pub n: usize,
    pub state: AngularState,
    /// Static rotating-frame energy in MHz.
    pub energy: f64,
    /// Rotational constant of the vibrational level, MHz (0 for box states).
    pub rotational_constant: f64,
}

impl ChannelLevel {
    pub fn key(&self) -> LevelKey {
        LevelKey { manifold: self.manifold, j: self.state.j(), n: self.n }
    }
}

/// Designated bound level of one channel.
#[derive(Debug, Clone)]
pub struct BoundChannel {
    pub solution: Arc<RadialSolution>,
    pub level: usize,
}

/// Radial input to the basis builder.
#[derive(Debug, Clone)]
pub struct RadialData {
    /// Box-discretized scattering channels by J.
    pub scattering: BTreeMap<i32, Arc<RadialSolution>>,
    /// Intermediate designated level by J'.
    pub intermediate: BTreeMap<i32, BoundChannel>,
    /// Target designated level by J''.
    pub target: BTreeMap<i32, BoundChannel>,
    /// Vibrational indices of the designated levels (for labelling).
    pub intermediate_v: usize,
    pub target_v: usize,
    /// Number of box states per scattering channel.
    pub box_states: usize,
    pub intermediate_rotational_constant: f64,
    pub target_rotational_constant: f64,
    pub target_binding: f64,
}

impl RadialData {
    fn scattering(&self, j: i32) -> Result<&Arc<RadialSolution>, BasisError> {
        let label = ChannelLabel { manifold: Manifold::Scattering, j, omega: 0 };
        let sol = self.scattering.get(&j).ok_or(BasisError::MissingChannel(label))?;
        let available = sol.len() - sol.bound_count();
        if available < self.box_states {
            return Err(BasisError::BoxStates { label, available, requested: self.box_states });
        }
        Ok(sol)
    }

    fn bound(&self, manifold: Manifold, j: i32) -> Result<&BoundChannel, BasisError> {
        let map = match manifold {
            Manifold::Intermediate => &self.intermediate,
            Manifold::Target => &self.target,
            Manifold::Scattering => unreachable!("scattering channels are not bound channels"),
        };
        map.get(&j).ok_or(BasisError::MissingChannel(ChannelLabel { manifold, j, omega: 0 }))
    }

    /// Signed radial overlap between two levels.
    pub fn overlap(&self, a: LevelKey, b: LevelKey) -> Result<f64, BasisError> {
        let (sa, la) = self.radial(a)?;
        let (sb, lb) = self.radial(b)?;
        Ok(franck_condon(sa, la, sb, lb))
    }

    fn radial(&self, k: LevelKey) -> Result<(&RadialSolution, usize), BasisError> {
        match k.manifold {
            Manifold::Scattering => {
                let s = self.scattering(k.j)?;
                Ok((s, s.bound_count() + k.n))
            }
            m => {
                let b = self.bound(m, k.j)?;
                Ok((&b.solution, b.level))
            }
        }
    }
}

/// Radial overlaps for every dipole-allowed pair of a basis.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FcTable {
    entries: BTreeMap<(LevelKey, LevelKey), f64>,
}

impl FcTable {
    /// Overlaps for all pairs with |ΔJ| = 1 between the upper manifold and the others.
    pub fn compute(radial: &RadialData, basis: &ChannelBasis) -> Result<Self, BasisError> {
        let mut keys: Vec<LevelKey> = basis.levels.iter().map(|l| l.key()).collect();
        keys.sort();
        keys.dedup();
        let uppers: Vec<LevelKey> = keys.iter().copied().filter(|k| k.manifold == Manifold::Intermediate).collect();
        let lowers: Vec<LevelKey> = keys.iter().copied().filter(|k| k.manifold != Manifold::Intermediate).collect();
        let mut entries = BTreeMap::new();
        for u in &uppers {
            for l in &lowers {
                if (u.j - l.j).abs() == 1 || basis.vibronic {
                    entries.insert((*u, *l), radial.overlap(*u, *l)?);
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn insert(&mut self, upper: LevelKey, lower: LevelKey, value: f64) {
        self.entries.insert((upper, lower), value);
    }

    pub fn get(&self, upper: LevelKey, lower: LevelKey) -> Option<f64> {
        self.entries.get(&(upper, lower)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (LevelKey, LevelKey, f64)> + '_ {
        self.entries.iter().map(|((a, b), v)| (*a, *b, *v))
    }
}

/// All levels of one parity family, ordered by M, then manifold, J and n.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBasis {
    parity: Parity,
    j_max: i32,
    vibronic: bool,
    levels: Vec<ChannelLevel>,
}

impl ChannelBasis {
    /// Scattering J ≤ J_max of the given parity, intermediate J' ≤ J_max + 1 of
    /// the opposite parity, target J'' ≤ J_max of the same parity; Ω = 0 and all M.
    pub fn build(radial: &RadialData, j_max: i32, parity: Parity) -> Result<Self, BasisError> {
        if !(0..=crate::angmom::MAX_J - 2).contains(&j_max) {
            return Err(BasisError::JMax(j_max));
        }
        let js: Vec<i32> = (0..=j_max).filter(|j| parity.contains(*j)).collect();
        let jps: Vec<i32> = (0..=j_max + 1).filter(|j| !parity.contains(*j)).collect();
        let m_max = j_max + 1;
        let mut levels = Vec::new();
        for m in -m_max..=m_max {
            for &j in &js {
                if m.abs() > j {
                    continue;
                }
                let sol = radial.scattering(j)?;
                let nb = sol.bound_count();
                for n in 0..radial.box_states {
                    levels.push(ChannelLevel {
                        manifold: Manifold::Scattering,
                        n,
                        state: angular(j, m),
                        energy: sol.energy_mhz(nb + n),
                        rotational_constant: 0.0,
                    });
                }
            }
            for &jp in &jps {
                if m.abs() > jp {
                    continue;
                }
                radial.bound(Manifold::Intermediate, jp)?;
                let b = radial.intermediate_rotational_constant;
                levels.push(ChannelLevel {
                    manifold: Manifold::Intermediate,
                    n: radial.intermediate_v,
                    state: angular(jp, m),
                    energy: b * rot(jp),
                    rotational_constant: b,
                });
            }
            for &j in &js {
                if m.abs() > j {
                    continue;
                }
                radial.bound(Manifold::Target, j)?;
                let b = radial.target_rotational_constant;
                levels.push(ChannelLevel {
                    manifold: Manifold::Target,
                    n: radial.target_v,
                    state: angular(j, m),
                    energy: -radial.target_binding + b * rot(j),
                    rotational_constant: b,
                });
            }
        }
        Ok(Self { parity, j_max, vibronic: false, levels })
    }

    /// Purely vibronic reference: every manifold at J = 0 and unit rotational factors.
    pub fn vibronic(radial: &RadialData) -> Result<Self, BasisError> {
        let sol = radial.scattering(0)?;
        let nb = sol.bound_count();
        let mut levels: Vec<ChannelLevel> = (0..radial.box_states)
            .map(|n| ChannelLevel {
                manifold: Manifold::Scattering,
                n,
                state: angular(0, 0),
                energy: sol.energy_mhz(nb + n),
                rotational_constant: 0.0,
            })
            .collect();
        radial.bound(Manifold::Intermediate, 0)?;
        radial.bound(Manifold::Target, 0)?;
        levels.push(ChannelLevel {
            manifold: Manifold::Intermediate,
            n: radial.intermediate_v,
            state: angular(0, 0),
            energy: 0.0,
            rotational_constant: radial.intermediate_rotational_constant,
        });
        levels.push(ChannelLevel {
            manifold: Manifold::Target,
            n: radial.target_v,
            state: angular(0, 0),
            energy: -radial.target_binding,
            rotational_constant: radial.target_rotational_constant,
        });
        Ok(Self { parity: Parity::Even, j_max: 0, vibronic: true, levels })
    }

    /// Basis from an explicit level list, for model studies and tests.
    pub fn from_levels(parity: Parity, levels: Vec<ChannelLevel>) -> Self {
        let j_max = levels.iter().map(|l| l.state.j()).max().unwrap_or(0);
        Self { parity, j_max, vibronic: false, levels }
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn is_vibronic(&self) -> bool {
        self.vibronic
    }

    pub fn levels(&self) -> &[ChannelLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Distinct M values present, ascending.
    pub fn m_values(&self) -> Vec<i32> {
        let mut ms: Vec<i32> = self.levels.iter().map(|l| l.state.m()).collect();
        ms.sort();
        ms.dedup();
        ms
    }

    /// Number of levels per manifold.
    pub fn count(&self, manifold: Manifold) -> usize {
        self.levels.iter().filter(|l| l.manifold == manifold).count()
    }
}

fn angular(j: i32, m: i32) -> AngularState {
    AngularState::new(j, m, 0).expect("|M| ≤ J checked by the builder")
}

fn rot(j: i32) -> f64 {
    (j * (j + 1)) as f64
}

/// Dipole coupling between an intermediate level and a lower level, as
/// indices into the basis. The coupling at time t is `coefficient × field(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub upper: usize,
    pub lower: usize,
    /// ½ × rotational factor × Franck-Condon overlap (dimensionless).
    pub coefficient: f64,
}

/// One M block: hub (intermediate) and leaf (scattering, target) levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub m: i32,
    /// Basis indices of the block, in basis order.
    pub indices: Vec<usize>,
    /// Positions within `indices` of the intermediate levels.
    pub hubs: Vec<usize>,
    /// Positions within `indices` of the other levels.
    pub leaves: Vec<usize>,
    /// Hub × leaf coupling coefficients.
    pub coupling: Vec<Vec<f64>>,
}

/// Basis, couplings and pulse train: everything needed to evaluate H(t).
#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    basis: ChannelBasis,
    couplings: Vec<Coupling>,
    train: PulseTrain,
    mu_debye: f64,
}

/// Couple every dipole-allowed pair of `basis` and attach the pulse train.
pub fn assemble_hamiltonian(
    basis: &ChannelBasis,
    train: &PulseTrain,
    fc: &FcTable,
    mu_debye: f64,
) -> Result<HamiltonianModel, BasisError> {
    let mut couplings = Vec::new();
    let levels = basis.levels();
    for (u, up) in levels.iter().enumerate() {
        if up.manifold != Manifold::Intermediate {
            continue;
        }
        for (l, low) in levels.iter().enumerate() {
            if low.manifold == Manifold::Intermediate || low.state.m() != up.state.m() {
                continue;
            }
            let rotational = if basis.vibronic { 1.0 } else { dipole_rotational_factor(&up.state, &low.state, 0) };
            if rotational == 0.0 {
                continue;
            }
            let overlap = fc.get(up.key(), low.key()).ok_or(BasisError::MissingOverlap(up.key(), low.key()))?;
            couplings.push(Coupling { upper: u, lower: l, coefficient: 0.5 * rotational * overlap });
        }
    }
    Ok(HamiltonianModel { basis: basis.clone(), couplings, train: train.clone(), mu_debye })
}

impl HamiltonianModel {
    /// Model with explicit couplings (coefficients multiply the field in MHz).
    pub fn from_parts(
        basis: ChannelBasis,
        couplings: Vec<Coupling>,
        train: PulseTrain,
        mu_debye: f64,
    ) -> Result<Self, BasisError> {
        let levels = basis.levels();
        for c in &couplings {
            let ok = c.upper < levels.len()
                && c.lower < levels.len()
                && levels[c.upper].manifold == Manifold::Intermediate
                && levels[c.lower].manifold != Manifold::Intermediate
                && levels[c.upper].state.m() == levels[c.lower].state.m();
            if !ok {
                return Err(BasisError::InvalidCoupling(c.upper, c.lower));
            }
        }
        Ok(Self { basis, couplings, train, mu_debye })
    }

    /// Same basis and couplings driven by a different pulse train.
    pub fn with_train(&self, train: PulseTrain) -> Self {
        Self { train, ..self.clone() }
    }

    pub fn basis(&self) -> &ChannelBasis {
        &self.basis
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn train(&self) -> &PulseTrain {
        &self.train
    }

    pub fn mu_debye(&self) -> f64 {
        self.mu_debye
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Static energies in MHz (frame rotating at the intermediate band origin).
    pub fn static_energies(&self) -> Vec<f64> {
        self.basis.levels.iter().map(|l| l.energy).collect()
    }

    /// Rotating-frame diagonal at time t: intermediate levels shifted by −δ(t).
    pub fn diagonal(&self, t: f64) -> Vec<f64> {
        let d = self.train.instantaneous_detuning(t);
        self.basis
            .levels
            .iter()
            .map(|l| if l.manifold == Manifold::Intermediate { l.energy - d } else { l.energy })
            .collect()
    }

    /// Complex field factor multiplying every coupling coefficient in the rotating frame.
    pub fn field(&self, t: f64) -> (f64, f64) {
        self.train.field(t, self.mu_debye)
    }

    /// Dense rotating-frame Hamiltonian at time t, MHz, as (re, im) row-major.
    pub fn matrix(&self, t: f64) -> Vec<Vec<(f64, f64)>> {
        let n = self.len();
        let mut h = vec![vec![(0.0, 0.0); n]; n];
        for (i, d) in self.diagonal(t).into_iter().enumerate() {
            h[i][i] = (d, 0.0);
        }
        let (fr, fi) = self.field(t);
        for c in &self.couplings {
            h[c.upper][c.lower] = (c.coefficient * fr, c.coefficient * fi);
            h[c.lower][c.upper] = (c.coefficient * fr, -c.coefficient * fi);
        }
        h
    }

    /// Decomposition into independent M blocks.
    pub fn blocks(&self) -> Vec<Block> {
        let levels = &self.basis.levels;
        let mut out = Vec::new();
        for m in self.basis.m_values() {
            let indices: Vec<usize> = (0..levels.len()).filter(|&i| levels[i].state.m() == m).collect();
            let pos = |g: usize| indices.iter().position(|&i| i == g);
            let hubs: Vec<usize> =
                (0..indices.len()).filter(|&p| levels[indices[p]].manifold == Manifold::Intermediate).collect();
            let leaves: Vec<usize> =
                (0..indices.len()).filter(|&p| levels[indices[p]].manifold != Manifold::Intermediate).collect();
            let mut coupling = vec![vec![0.0; leaves.len()]; hubs.len()];
            for c in &self.couplings {
                if let (Some(pu), Some(pl)) = (pos(c.upper), pos(c.lower)) {
                    let h = hubs.iter().position(|&p| p == pu).expect("upper is a hub");
                    let l = leaves.iter().position(|&p| p == pl).expect("lower is a leaf");
                    coupling[h][l] = c.coefficient;
                }
            }
            out.push(Block { m, indices, hubs, leaves, coupling });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn levels_for(j_max: i32, parity: Parity) -> Vec<(Manifold, i32, i32)> {
        let mut v = Vec::new();
        let m_max = j_max + 1;
        for m in -m_max..=m_max {
            for j in 0..=j_max {
                if parity.contains(j) && m.abs() <= j {
                    v.push((Manifold::Scattering, j, m));
                }
            }
            for j in 0..=j_max + 1 {
                if !parity.contains(j) && m.abs() <= j {
                    v.push((Manifold::Intermediate, j, m));
                }
            }
            for j in 0..=j_max {
                if parity.contains(j) && m.abs() <= j {
                    v.push((Manifold::Target, j, m));
                }
            }
        }
        v
    }

    #[test]
    fn parity_helpers() {
        assert_eq!(Parity::of(0), Parity::Even);
        assert_eq!(Parity::of(3), Parity::Odd);
        assert!(Parity::Odd.contains(5));
        assert!(!Parity::Even.contains(5));
    }

    #[test]
    fn selection_rule_closure_by_enumeration() {
        // Every level reachable by ΔJ = ±1 dipole steps from the scattering set,
        // restricted to the target J ≤ J_max, appears in the enumeration.
        for parity in [Parity::Even, Parity::Odd] {
            let en = levels_for(4, parity);
            for &(man, j, m) in &en {
                if man == Manifold::Scattering {
                    for jp in [j - 1, j + 1] {
                        if jp >= m.abs() && jp >= 0 {
                            assert!(en.contains(&(Manifold::Intermediate, jp, m)));
                        }
                    }
                }
            }
        }
    }
}
