//! Fit the model ground curve to a level's binding energy and rotational constant.

use std::sync::Arc;

use super::solver::{rotational_constant, solve_channel, SolveOptions};
use super::{shared_grid, PotentialCurve, RadialError};
use crate::channel::{ChannelLabel, Manifold};
use crate::units::{rotor_energy_mhz, RB87_PAIR_REDUCED_MASS_AMU};

/// Which level to fit and the values it must reproduce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTargets {
    /// Vibrational index counted from the bottom of the J = 0 channel.
    pub level: usize,
    pub binding_mhz: f64,
    pub rotational_constant_mhz: f64,
}

/// Grid and convergence controls for the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSettings {
    pub mass_amu: f64,
    pub r_max: f64,
    pub beta: f64,
    pub energy_cap_ghz: f64,
    pub binding_tolerance_mhz: f64,
    pub rotational_tolerance_mhz: f64,
    pub max_iterations: usize,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            mass_amu: RB87_PAIR_REDUCED_MASS_AMU,
            r_max: 400.0,
            beta: 8.0,
            energy_cap_ghz: 0.05,
            binding_tolerance_mhz: 1e-3,
            rotational_tolerance_mhz: 1e-4,
            max_iterations: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelObservables {
    pub binding_mhz: f64,
    pub rotational_constant_mhz: f64,
    pub bound_levels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub curve: PotentialCurve,
    pub observables: LevelObservables,
    pub iterations: usize,
}

/// Binding energy and B_v of level `level` of the J = 0 channel of `curve`.
pub fn designated_level(
    curve: &PotentialCurve,
    level: usize,
    settings: &CalibrationSettings,
) -> Result<LevelObservables, RadialError> {
    let grid = Arc::new(shared_grid(&[curve], settings.r_max, settings.energy_cap_ghz, settings.beta, settings.mass_amu)?);
    let label = ChannelLabel { manifold: Manifold::Target, j: 0, omega: 0 };
    let sol = solve_channel(curve, label, grid, &SolveOptions::default())?;
    let bound = sol.bound_count();
    if level >= bound {
        return Err(RadialError::MissingLevel { label, level });
    }
    Ok(LevelObservables {
        binding_mhz: -sol.energy_mhz(level),
        rotational_constant_mhz: rotational_constant(&sol, level)?,
        bound_levels: bound,
    })
}

fn with_params(curve: &PotentialCurve, depth: f64, c6: f64) -> PotentialCurve {
    match curve {
        PotentialCurve::ModelGround { wall_exponent, .. } => {
            PotentialCurve::ModelGround { depth_ghz: depth, c6, wall_exponent: *wall_exponent }
        }
        other => other.clone(),
    }
}

/// Newton search over (well depth, C6) starting from `initial`, which must be a
/// [`PotentialCurve::ModelGround`].
pub fn calibrate_model_potential(
    initial: &PotentialCurve,
    targets: CalibrationTargets,
    settings: &CalibrationSettings,
) -> Result<Calibration, RadialError> {
    let PotentialCurve::ModelGround { depth_ghz, c6, .. } = *initial else {
        return Err(RadialError::Calibration(format!("cannot calibrate a {} curve", initial.kind())));
    };
    if !(targets.binding_mhz > 0.0 && targets.rotational_constant_mhz > 0.0) {
        return Err(RadialError::Infeasible("targets must be positive".into()));
    }
    let re = initial.equilibrium_radius().unwrap_or(f64::INFINITY);
    let rigid = rotor_energy_mhz(settings.mass_amu, re);
    if targets.rotational_constant_mhz >= rigid {
        return Err(RadialError::Infeasible(format!(
            "B = {} MHz exceeds the rigid-rotor bound {rigid:.3} MHz at the well minimum",
            targets.rotational_constant_mhz
        )));
    }

    let residual = |d: f64, c: f64| -> Result<([f64; 2], LevelObservables), RadialError> {
        let obs = designated_level(&with_params(initial, d, c), targets.level, settings)?;
        Ok((
            [obs.binding_mhz - targets.binding_mhz, obs.rotational_constant_mhz - targets.rotational_constant_mhz],
            obs,
        ))
    };

    let (mut d, mut c) = (depth_ghz, c6);
    let (mut f, mut obs) = residual(d, c)?;
    for it in 0..settings.max_iterations {
        if f[0].abs() < settings.binding_tolerance_mhz && f[1].abs() < settings.rotational_tolerance_mhz {
            return Ok(Calibration { curve: with_params(initial, d, c), observables: obs, iterations: it });
        }
        let hd = 1e-6 * d;
        let hc = 1e-5 * c;
        let (fd, _) = residual(d + hd, c)?;
        let (fc, _) = residual(d, c + hc)?;
        let jac = [
            [(fd[0] - f[0]) / hd, (fc[0] - f[0]) / hc],
            [(fd[1] - f[1]) / hd, (fc[1] - f[1]) / hc],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(RadialError::Calibration("singular Jacobian".into()));
        }
        let mut sd = -(jac[1][1] * f[0] - jac[0][1] * f[1]) / det;
        let mut sc = -(-jac[1][0] * f[0] + jac[0][0] * f[1]) / det;
        // Keep the level index meaningful: cap each step at a few percent.
        let lim = (sd.abs() / (0.02 * d)).max(sc.abs() / (0.05 * c)).max(1.0);
        sd /= lim;
        sc /= lim;
        let mut lambda = 1.0;
        loop {
            match residual(d + lambda * sd, c + lambda * sc) {
                Ok((fnew, onew)) if fnew[0].hypot(100.0 * fnew[1]) < f[0].hypot(100.0 * f[1]) || lambda < 1e-3 => {
                    d += lambda * sd;
                    c += lambda * sc;
                    f = fnew;
                    obs = onew;
                    break;
                }
                _ if lambda < 1e-3 => {
                    return Err(RadialError::Calibration("line search failed".into()));
                }
                _ => lambda *= 0.5,
            }
        }
    }
    Err(RadialError::Calibration(format!(
        "no root within {} iterations (residuals {:.3e} MHz, {:.3e} MHz)",
        settings.max_iterations, f[0], f[1]
    )))
}
