//! End-to-end model assembly: curves → shared grid → channel solutions →
//! per-parity bases with Franck-Condon tables.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::basis::{
    assemble_hamiltonian, BasisError, BoundChannel, ChannelBasis, FcTable, HamiltonianModel, Parity, RadialData,
};
use crate::channel::{ChannelLabel, Manifold};
use crate::pulse::PulseTrain;
use crate::radial::{
    rotational_constant, shared_grid, solve_channel, PotentialCurve, RadialError, RadialGrid, RadialSolution,
    SolveOptions,
};
use crate::units::{amu_to_me, hartree_to_mhz, HARTREE_GHZ, RB87_PAIR_REDUCED_MASS_AMU};

/// Transition dipole μ₀ used to convert intensity into a Rabi frequency, debye.
pub const DEFAULT_TRANSITION_DIPOLE_DEBYE: f64 = 10.7;

/// Ground-asymptote curve fitted so that the next-to-last level of the J = 0
/// channel (v = 39 of 41) is bound by 764 MHz with B_v = 16.3 MHz.
pub fn calibrated_ground() -> PotentialCurve {
    PotentialCurve::ModelGround { depth_ghz: 11_978.351_595_724_933, c6: 26_095_623_651.525_833, wall_exponent: 12.0 }
}

/// Long-range −C₃/R³ excited curve whose level v' = 31 has its outer turning
/// point near 57 bohr.
pub fn model_excited() -> PotentialCurve {
    PotentialCurve::ModelExcited { depth_ghz: 1600.0, c3: 10.0 * HARTREE_GHZ, wall_exponent: 12.0 }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("{0}")]
    Invalid(String),
}

/// Mapped-grid parameters shared by every channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Outer wall, bohr. Sets the box-state spacing of the continuum.
    pub r_max: f64,
    /// Points per local de Broglie wavelength.
    pub beta: f64,
    /// Kinetic energy resolved everywhere on the grid, GHz.
    pub energy_cap_ghz: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { r_max: 1000.0, beta: 8.0, energy_cap_ghz: 0.2 }
    }
}

/// Everything needed to build the radial data and bases.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub ground: PotentialCurve,
    pub excited: PotentialCurve,
    pub mass_amu: f64,
    /// Target level index from the bottom of the J = 0 ground channel.
    pub target_level: usize,
    /// Intermediate level index from the bottom of the excited channel.
    pub intermediate_level: usize,
    pub grid: GridSpec,
    /// Scattering box states per J.
    pub box_states: usize,
    pub j_max: i32,
    /// Re-solve every channel on a refined grid and require this agreement, MHz.
    pub convergence_tolerance_mhz: Option<f64>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            ground: calibrated_ground(),
            excited: model_excited(),
            mass_amu: RB87_PAIR_REDUCED_MASS_AMU,
            target_level: 39,
            intermediate_level: 31,
            grid: GridSpec::default(),
            box_states: 16,
            j_max: 5,
            convergence_tolerance_mhz: None,
        }
    }
}

/// A level that had to be borrowed from the J = 0 channel because it is not
/// bound at higher J.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fallback {
    pub label: ChannelLabel,
    pub level: usize,
}

/// Solved radial problem plus both parity bases.
#[derive(Debug, Clone)]
pub struct PhotoassociationSystem {
    spec: ModelSpec,
    grid: Arc<RadialGrid>,
    radial: RadialData,
    even: (ChannelBasis, FcTable),
    odd: (ChannelBasis, FcTable),
    fallbacks: Vec<Fallback>,
}

impl PhotoassociationSystem {
    pub fn build(spec: ModelSpec) -> Result<Self, SystemError> {
        if spec.box_states == 0 {
            return Err(SystemError::Invalid("at least one box state is required".into()));
        }
        let grid = Arc::new(shared_grid(
            &[&spec.ground, &spec.excited],
            spec.grid.r_max,
            spec.grid.energy_cap_ghz,
            spec.grid.beta,
            spec.mass_amu,
        )?);

        let mut jobs = Vec::new();
        for j in 0..=spec.j_max {
            jobs.push(ChannelLabel { manifold: Manifold::Scattering, j, omega: 0 });
            jobs.push(ChannelLabel { manifold: Manifold::Target, j, omega: 0 });
        }
        for j in 0..=spec.j_max + 1 {
            jobs.push(ChannelLabel { manifold: Manifold::Intermediate, j, omega: 0 });
        }
        let solved: Vec<Result<RadialSolution, RadialError>> = jobs
            .par_iter()
            .map(|&label| {
                let (curve, cap) = match label.manifold {
                    Manifold::Scattering => (&spec.ground, spec.grid.energy_cap_ghz),
                    Manifold::Target => (&spec.ground, 0.0),
                    Manifold::Intermediate => (&spec.excited, 0.0),
                };
                let opts = SolveOptions {
                    energy_cap_ghz: cap,
                    max_levels: None,
                    convergence_tolerance_mhz: spec.convergence_tolerance_mhz,
                };
                solve_channel(curve, label, grid.clone(), &opts)
            })
            .collect();

        let mut scattering = BTreeMap::new();
        let mut intermediate = BTreeMap::new();
        let mut target = BTreeMap::new();
        for (label, sol) in jobs.iter().zip(solved) {
            let sol = Arc::new(sol?);
            match label.manifold {
                Manifold::Scattering => scattering.insert(label.j, sol),
                Manifold::Intermediate => intermediate.insert(label.j, sol),
                Manifold::Target => target.insert(label.j, sol),
            };
        }

        let mut fallbacks = Vec::new();
        let target = designate(&target, spec.target_level, &mut fallbacks)?;
        let intermediate = designate(&intermediate, spec.intermediate_level, &mut fallbacks)?;
        let t0 = &target[&0];
        let i0 = &intermediate[&0];
        let radial = RadialData {
            scattering,
            target_binding: -t0.solution.energy_mhz(t0.level),
            target_rotational_constant: rotational_constant(&t0.solution, t0.level)?,
            intermediate_rotational_constant: rotational_constant(&i0.solution, i0.level)?,
            intermediate,
            target,
            intermediate_v: spec.intermediate_level,
            target_v: spec.target_level,
            box_states: spec.box_states,
        };
        let family = |parity| -> Result<(ChannelBasis, FcTable), BasisError> {
            let basis = ChannelBasis::build(&radial, spec.j_max, parity)?;
            let fc = FcTable::compute(&radial, &basis)?;
            Ok((basis, fc))
        };
        let even = family(Parity::Even)?;
        let odd = family(Parity::Odd)?;
        for f in &fallbacks {
            log::warn!("{}: level {} unbound, using the J = 0 wavefunction", f.label, f.level);
        }
        Ok(Self { spec, grid, radial, even, odd, fallbacks })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn radial(&self) -> &RadialData {
        &self.radial
    }

    pub fn basis(&self, parity: Parity) -> &ChannelBasis {
        &self.family(parity).0
    }

    pub fn fc_table(&self, parity: Parity) -> &FcTable {
        &self.family(parity).1
    }

    /// Channels whose designated level was borrowed from J = 0.
    pub fn fallbacks(&self) -> &[Fallback] {
        &self.fallbacks
    }

    pub fn target_binding_mhz(&self) -> f64 {
        self.radial.target_binding
    }

    pub fn target_rotational_constant_mhz(&self) -> f64 {
        self.radial.target_rotational_constant
    }

    /// Field-free revival period 1/(2B) of the target manifold, ns.
    pub fn revival_period_ns(&self) -> f64 {
        1e3 / (2.0 * self.radial.target_rotational_constant)
    }

    /// Hamiltonian of one parity family driven by `train`.
    pub fn model(&self, parity: Parity, train: &PulseTrain, mu_debye: f64) -> Result<HamiltonianModel, SystemError> {
        let (basis, fc) = self.family(parity);
        Ok(assemble_hamiltonian(basis, train, fc, mu_debye)?)
    }

    fn family(&self, parity: Parity) -> &(ChannelBasis, FcTable) {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }
}

fn designate(
    solutions: &BTreeMap<i32, Arc<RadialSolution>>,
    level: usize,
    fallbacks: &mut Vec<Fallback>,
) -> Result<BTreeMap<i32, BoundChannel>, RadialError> {
    let base = &solutions[&0];
    if level >= base.bound_count() {
        return Err(RadialError::MissingLevel { label: base.label(), level });
    }
    let mut out = BTreeMap::new();
    for (&j, sol) in solutions {
        let chosen = if level < sol.bound_count() {
            BoundChannel { solution: sol.clone(), level }
        } else {
            fallbacks.push(Fallback { label: sol.label(), level });
            BoundChannel { solution: base.clone(), level }
        };
        out.insert(j, chosen);
    }
    Ok(out)
}

/// Levels of one channel with ħ²/(2m⟨R²⟩) for each, MHz.
#[derive(Debug, Clone)]
pub struct LevelTable {
    pub solution: RadialSolution,
    pub rotational_constants_mhz: Vec<f64>,
}

/// Solve each channel on `grid` and tabulate its levels.
pub fn level_tables(
    channels: &[(ChannelLabel, &PotentialCurve)],
    grid: Arc<RadialGrid>,
    opts: &SolveOptions,
) -> Result<Vec<LevelTable>, RadialError> {
    channels
        .par_iter()
        .map(|(label, curve)| {
            let solution = solve_channel(curve, *label, grid.clone(), opts)?;
            let mass = amu_to_me(grid.mass_amu());
            let rotational_constants_mhz =
                (0..solution.len()).map(|v| hartree_to_mhz(1.0 / (2.0 * mass * solution.mean_r2(v)))).collect();
            Ok(LevelTable { solution, rotational_constants_mhz })
        })
        .collect()
}
