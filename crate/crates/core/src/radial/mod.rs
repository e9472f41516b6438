//! Radial channel problems: potential curves, mapped sine-DVR grids, bound and
//! box-discretized levels, Franck-Condon overlaps and rotational constants.

mod calibrate;
mod grid;
mod potential;
mod solver;

use thiserror::Error;

use crate::channel::ChannelLabel;
use crate::units::ghz_to_hartree;

pub use calibrate::{
    calibrate_model_potential, designated_level, Calibration, CalibrationSettings, CalibrationTargets,
    LevelObservables,
};
pub use grid::{sine_dvr_second_derivative, MappingProfile, RadialGrid};
pub use potential::{EnvelopeTerm, PotentialCurve, TabulatedCurve};
pub use solver::{
    effective_potential, franck_condon, overlap_density, rotational_constant, solve_channel, RadialSolution,
    SolveOptions,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadialError {
    #[error("projection Ω = {omega} not allowed for J = {j}")]
    Projection { j: i32, omega: i32 },
    #[error("grid: {0}")]
    Grid(String),
    #[error("tabulated potential: {0}")]
    Table(String),
    #[error("{label}: grid not converged: {detail}")]
    NotConverged { label: ChannelLabel, detail: String },
    #[error("{label}: level {level} does not exist")]
    MissingLevel { label: ChannelLabel, level: usize },
    #[error("{label}: level {level} is not bound")]
    Unbound { label: ChannelLabel, level: usize },
    #[error("calibration infeasible: {0}")]
    Infeasible(String),
    #[error("calibration failed: {0}")]
    Calibration(String),
}

/// Mapped grid resolving every curve in `curves` down to its well bottom and
/// out to `r_max`, with `energy_cap_ghz` of kinetic energy everywhere.
pub fn shared_grid(
    curves: &[&PotentialCurve],
    r_max: f64,
    energy_cap_ghz: f64,
    beta: f64,
    mass_amu: f64,
) -> Result<RadialGrid, RadialError> {
    let envelope: Vec<EnvelopeTerm> = curves.iter().filter_map(|c| c.envelope()).collect();
    if envelope.is_empty() {
        return Err(RadialError::Grid("no curve provides a long-range envelope".into()));
    }
    let r_min = curves
        .iter()
        .filter_map(|c| c.equilibrium_radius())
        .fold(f64::INFINITY, f64::min)
        * 0.65;
    let profile = MappingProfile { envelope, energy_cap: ghz_to_hartree(energy_cap_ghz), beta };
    RadialGrid::mapped(r_min, r_max, mass_amu, profile)
}
