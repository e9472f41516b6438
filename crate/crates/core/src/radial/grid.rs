//! Sine-DVR grids, uniform or mapped onto the local de Broglie wavelength.
//!
//! The computational coordinate x takes the integer values 1..=N with hard
//! walls at x = 0 and x = N + 1. A mapped grid follows R(x) with
//! dR/dx = s·g(R), g(R) = (2π/β)/√(2m·u(R)) and u(R) an envelope of the
//! classical kinetic energy, so that every local wavelength carries β points.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::potential::EnvelopeTerm;
use super::RadialError;
use crate::units::amu_to_me;

// RK4 substeps per unit of x when integrating R(x).
const SUBSTEPS: usize = 16;

/// Description of a mapped grid: enough to rebuild or refine it.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingProfile {
    pub envelope: Vec<EnvelopeTerm>,
    /// Kinetic energy floor in hartree, sets the spacing far out.
    pub energy_cap: f64,
    /// Points per local wavelength.
    pub beta: f64,
}

impl MappingProfile {
    fn u(&self, r: f64) -> (f64, f64, f64) {
        let mut u = self.energy_cap;
        let mut u1 = 0.0;
        let mut u2 = 0.0;
        for t in &self.envelope {
            u += t.value(r);
            u1 += t.d1(r);
            u2 += t.d2(r);
        }
        (u, u1, u2)
    }

    // g and its first two R-derivatives.
    fn g(&self, mass: f64, r: f64) -> (f64, f64, f64) {
        let (u, u1, u2) = self.u(r);
        let g = (2.0 * PI / self.beta) / (2.0 * mass * u).sqrt();
        let a = u1 / u;
        let g1 = -0.5 * g * a;
        let g2 = g * (0.75 * a * a - 0.5 * u2 / u);
        (g, g1, g2)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Layout {
    Uniform,
    Mapped { profile: MappingProfile, scale: f64 },
}

/// Radial grid with the Jacobian data needed for the kinetic operator.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    mass_amu: f64,
    layout: Layout,
    r: Vec<f64>,
    jac: Vec<f64>,
    jac1: Vec<f64>,
    jac2: Vec<f64>,
}

impl RadialGrid {
    /// Evenly spaced grid with `n` interior points between walls at `r_min` and `r_max`.
    pub fn uniform(r_min: f64, r_max: f64, n: usize, mass_amu: f64) -> Result<Self, RadialError> {
        check_bounds(r_min, r_max, mass_amu)?;
        if n < 2 {
            return Err(RadialError::Grid("need at least two points".into()));
        }
        let h = (r_max - r_min) / (n as f64 + 1.0);
        let r = (1..=n).map(|i| r_min + h * i as f64).collect();
        Ok(Self {
            r_min,
            r_max,
            mass_amu,
            layout: Layout::Uniform,
            r,
            jac: vec![h; n],
            jac1: vec![0.0; n],
            jac2: vec![0.0; n],
        })
    }

    /// Grid mapped onto `profile`; the point count follows from the mapping.
    pub fn mapped(r_min: f64, r_max: f64, mass_amu: f64, profile: MappingProfile) -> Result<Self, RadialError> {
        check_bounds(r_min, r_max, mass_amu)?;
        if !(profile.beta >= 2.0) {
            return Err(RadialError::Grid(format!("beta = {} must be at least 2", profile.beta)));
        }
        if !(profile.energy_cap > 0.0) {
            return Err(RadialError::Grid("energy cap must be positive".into()));
        }
        let mass = amu_to_me(mass_amu);
        // Q = ∫ dR / g with composite Simpson on a geometric R mesh.
        let q = integrate_inverse_g(&profile, mass, r_min, r_max);
        let n = q.ceil() as usize;
        if n < 2 {
            return Err(RadialError::Grid("mapping yields fewer than two points".into()));
        }
        let scale = q / (n as f64 + 1.0);
        let dx = 1.0 / SUBSTEPS as f64;
        let f = |r: f64| scale * profile.g(mass, r).0;
        let mut r = Vec::with_capacity(n);
        let mut jac = Vec::with_capacity(n);
        let mut jac1 = Vec::with_capacity(n);
        let mut jac2 = Vec::with_capacity(n);
        let mut cur = r_min;
        for _ in 0..n {
            for _ in 0..SUBSTEPS {
                let k1 = f(cur);
                let k2 = f(cur + 0.5 * dx * k1);
                let k3 = f(cur + 0.5 * dx * k2);
                let k4 = f(cur + dx * k3);
                cur += dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            let (g, g1, g2) = profile.g(mass, cur);
            r.push(cur);
            jac.push(scale * g);
            jac1.push(scale * scale * g * g1);
            jac2.push(scale.powi(3) * g * (g2 * g + g1 * g1));
        }
        Ok(Self { r_min, r_max, mass_amu, layout: Layout::Mapped { profile, scale }, r, jac, jac1, jac2 })
    }

    /// The same layout with twice the sampling density.
    pub fn refined(&self) -> Result<Self, RadialError> {
        match &self.layout {
            Layout::Uniform => Self::uniform(self.r_min, self.r_max, 2 * self.len() + 1, self.mass_amu),
            Layout::Mapped { profile, .. } => {
                let mut p = profile.clone();
                p.beta *= 2.0;
                Self::mapped(self.r_min, self.r_max, self.mass_amu, p)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.r
    }

    /// dR/dx at each point, also the quadrature weight.
    pub fn jacobian(&self) -> &[f64] {
        &self.jac
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn mass_amu(&self) -> f64 {
        self.mass_amu
    }

    pub fn is_mapped(&self) -> bool {
        matches!(self.layout, Layout::Mapped { .. })
    }

    /// Smallest number of points per local wavelength if the envelope were the true
    /// kinetic energy. Uniform grids report `None`.
    pub fn beta(&self) -> Option<f64> {
        match &self.layout {
            Layout::Uniform => None,
            Layout::Mapped { profile, .. } => Some(profile.beta),
        }
    }

    /// Kinetic energy matrix in hartree for the Euclidean-normalized amplitudes
    /// φ_i = √J_i ψ(R_i).
    pub fn kinetic_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mass = amu_to_me(self.mass_amu);
        let k = sine_dvr_second_derivative(n);
        let inv = self.jac.iter().map(|j| 1.0 / j).collect::<Vec<_>>();
        let mut t = DMatrix::from_fn(n, n, |i, j| k[(i, j)] * inv[i] * inv[j] / (2.0 * mass));
        for i in 0..n {
            let jv = self.jac[i];
            let f = jv.powf(-0.5);
            let f2 = 0.75 * jv.powf(-2.5) * self.jac1[i].powi(2) - 0.5 * jv.powf(-1.5) * self.jac2[i];
            t[(i, i)] += f * f * f * f2 / (2.0 * mass);
        }
        t
    }

    /// Computational coordinate x of a radius inside the grid.
    pub fn coordinate_of(&self, r: f64) -> f64 {
        match &self.layout {
            Layout::Uniform => (r - self.r_min) / self.jac[0],
            Layout::Mapped { profile, scale } => {
                let mass = amu_to_me(self.mass_amu);
                // Start from the nearest grid point and integrate dx = dR/(s g).
                let idx = self.r.partition_point(|&p| p < r);
                let (x0, r0) = if idx == 0 { (0.0, self.r_min) } else { (idx as f64, self.r[idx - 1]) };
                let steps = 8;
                let h = (r - r0) / steps as f64;
                let w = |rr: f64| 1.0 / (scale * profile.g(mass, rr).0);
                let mut acc = w(r0) + w(r);
                for k in 1..steps {
                    acc += if k % 2 == 1 { 4.0 } else { 2.0 } * w(r0 + h * k as f64);
                }
                x0 + acc * h / 3.0
            }
        }
    }

    /// dR/dx at an arbitrary radius.
    pub fn jacobian_at(&self, r: f64) -> f64 {
        match &self.layout {
            Layout::Uniform => self.jac[0],
            Layout::Mapped { profile, scale } => scale * profile.g(amu_to_me(self.mass_amu), r).0,
        }
    }
}

fn check_bounds(r_min: f64, r_max: f64, mass_amu: f64) -> Result<(), RadialError> {
    if !(r_min >= 0.0 && r_max > r_min && r_max.is_finite()) {
        return Err(RadialError::Grid(format!("invalid range [{r_min}, {r_max}]")));
    }
    if !(mass_amu > 0.0) {
        return Err(RadialError::Grid("mass must be positive".into()));
    }
    Ok(())
}

fn integrate_inverse_g(profile: &MappingProfile, mass: f64, a: f64, b: f64) -> f64 {
    let pieces = 4000;
    let h = (b - a) / pieces as f64;
    let w = |r: f64| 1.0 / profile.g(mass, r).0;
    let mut acc = w(a) + w(b);
    for k in 1..pieces {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * w(a + h * k as f64);
    }
    acc * h / 3.0
}

/// Matrix of −d²/dx² on the sine basis with unit spacing and walls at 0 and N+1.
pub fn sine_dvr_second_derivative(n: usize) -> DMatrix<f64> {
    let m = (n + 1) as f64;
    let pre = PI * PI / (2.0 * m * m);
    DMatrix::from_fn(n, n, |a, b| {
        let (i, j) = ((a + 1) as f64, (b + 1) as f64);
        if a == b {
            pre * ((2.0 * m * m + 1.0) / 3.0 - 1.0 / (PI * i / m).sin().powi(2))
        } else {
            let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
            pre * sign
                * (1.0 / (PI * (i - j) / (2.0 * m)).sin().powi(2) - 1.0 / (PI * (i + j) / (2.0 * m)).sin().powi(2))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::ghz_to_hartree;

    #[test]
    fn sine_dvr_matches_explicit_transform() {
        let n = 23;
        let m = (n + 1) as f64;
        let k = sine_dvr_second_derivative(n);
        for a in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                for q in 1..=n {
                    let kq = q as f64 * PI / m;
                    let ua = (2.0 / m).sqrt() * (kq * (a + 1) as f64).sin();
                    let ub = (2.0 / m).sqrt() * (kq * (b + 1) as f64).sin();
                    s += ua * kq * kq * ub;
                }
                assert!((s - k[(a, b)]).abs() < 1e-10, "({a},{b}): {s} vs {}", k[(a, b)]);
            }
        }
    }

    fn profile() -> MappingProfile {
        MappingProfile {
            envelope: vec![EnvelopeTerm::from_tail(4700.0, 6.0, ghz_to_hartree(7000.0))],
            energy_cap: ghz_to_hartree(0.1),
            beta: 3.0,
        }
    }

    #[test]
    fn mapped_grid_is_increasing_and_ends_at_wall() {
        let g = RadialGrid::mapped(5.0, 400.0, 43.45, profile()).unwrap();
        assert!(g.points().windows(2).all(|w| w[1] > w[0]));
        let n = g.len() as f64;
        let last = g.coordinate_of(*g.points().last().unwrap());
        assert!((last - n).abs() < 1e-5, "{last} vs {n}");
        // the next step of the map lands on the wall
        let to_wall = g.coordinate_of(399.999_999);
        assert!((to_wall - (n + 1.0)).abs() < 1e-4, "{to_wall}");
        // spacing widens at long range
        assert!(g.jacobian()[g.len() - 1] > 10.0 * g.jacobian()[0]);
    }

    #[test]
    fn coordinate_inverts_points() {
        let g = RadialGrid::mapped(5.0, 400.0, 43.45, profile()).unwrap();
        for i in [0usize, 3, 40, g.len() / 2, g.len() - 2] {
            let x = g.coordinate_of(g.points()[i]);
            assert!((x - (i + 1) as f64).abs() < 1e-6, "i={i}: {x}");
        }
    }

    #[test]
    fn refinement_doubles_density() {
        let g = RadialGrid::mapped(5.0, 400.0, 43.45, profile()).unwrap();
        let f = g.refined().unwrap();
        let ratio = f.len() as f64 / g.len() as f64;
        assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
    }
}
