//! Physical constants and unit conversions.
//!
//! Radial problems are solved in atomic units (hartree, bohr, electron mass).
//! Everything crossing a public interface is in laboratory units: bohr, ns,
//! MHz or GHz (as E/h), W/cm², debye and amu. Every conversion used anywhere
//! in the crate goes through this table.

use std::f64::consts::PI;

/// 1 hartree expressed as a frequency E/h in GHz (CODATA 2018).
pub const HARTREE_GHZ: f64 = 6.579_683_920_502e6;
/// 1 hartree in MHz.
pub const HARTREE_MHZ: f64 = HARTREE_GHZ * 1e3;
/// Unified atomic mass unit in electron masses.
pub const AMU_ME: f64 = 1_822.888_486_209;
/// Mass of ⁸⁷Rb in amu.
pub const RB87_MASS_AMU: f64 = 86.909_180_531;
/// Reduced mass of a ⁸⁷Rb pair in amu.
pub const RB87_PAIR_REDUCED_MASS_AMU: f64 = RB87_MASS_AMU / 2.0;
/// Boltzmann constant as a frequency, MHz per μK.
pub const KB_MHZ_PER_UK: f64 = 2.083_661_912e-2;

/// Planck constant, J s.
pub const PLANCK_SI: f64 = 6.626_070_15e-34;
/// Vacuum permittivity, F/m.
pub const EPSILON0_SI: f64 = 8.854_187_812_8e-12;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT_SI: f64 = 299_792_458.0;
/// 1 debye in C m.
pub const DEBYE_SI: f64 = 3.335_640_952e-30;

/// Hartree to MHz.
pub fn hartree_to_mhz(e: f64) -> f64 {
    e * HARTREE_MHZ
}

/// MHz to hartree.
pub fn mhz_to_hartree(f: f64) -> f64 {
    f / HARTREE_MHZ
}

/// GHz to hartree.
pub fn ghz_to_hartree(f: f64) -> f64 {
    f / HARTREE_GHZ
}

/// Hartree to GHz.
pub fn hartree_to_ghz(e: f64) -> f64 {
    e * HARTREE_GHZ
}

/// amu to electron masses.
pub fn amu_to_me(m: f64) -> f64 {
    m * AMU_ME
}

/// Angular frequency in rad/ns of a frequency given in MHz.
pub fn mhz_to_rad_per_ns(f: f64) -> f64 {
    2.0 * PI * 1e-3 * f
}

/// Centrifugal-type energy ħ²/(2 m R²) in MHz, with `mass_amu` in amu and `r` in bohr.
pub fn rotor_energy_mhz(mass_amu: f64, r: f64) -> f64 {
    hartree_to_mhz(1.0 / (2.0 * amu_to_me(mass_amu) * r * r))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Audit against an independent SI pipeline: ħ²/(2 m R²)/h with SI constants.
    #[test]
    fn rotor_energy_matches_si_pipeline() {
        let hbar = PLANCK_SI / (2.0 * PI);
        let amu_kg = 1.660_539_066_60e-27;
        let bohr_m = 5.291_772_109_03e-11;
        let m = 43.5 * amu_kg;
        let r = 55.0 * bohr_m;
        let e_joule = hbar * hbar / (2.0 * m * r * r);
        let f_mhz = e_joule / PLANCK_SI / 1e6;
        let ours = rotor_energy_mhz(43.5, 55.0);
        assert!((ours - f_mhz).abs() / f_mhz < 1e-8, "{ours} vs {f_mhz}");
    }

    #[test]
    fn kelvin_scale() {
        // kB / h = 20.836619 GHz/K
        assert!((KB_MHZ_PER_UK * 1e6 - 20_836.619_12).abs() < 1e-3);
        let hartree_joule = 4.359_744_722_207_1e-18;
        let ghz = hartree_joule / PLANCK_SI / 1e9;
        assert!((ghz - HARTREE_GHZ).abs() / HARTREE_GHZ < 1e-11);
    }

    #[test]
    fn round_trips() {
        assert!((hartree_to_mhz(mhz_to_hartree(764.0)) - 764.0).abs() < 1e-12);
        assert!((hartree_to_ghz(ghz_to_hartree(1.5)) - 1.5).abs() < 1e-15);
        assert!((mhz_to_rad_per_ns(1000.0) - 2.0 * PI).abs() < 1e-15);
    }
}
