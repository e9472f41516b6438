//! Channel eigensolution, Franck-Condon overlaps and rotational constants.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use super::grid::RadialGrid;
use super::potential::PotentialCurve;
use super::RadialError;
use crate::channel::ChannelLabel;
use crate::units::{amu_to_me, hartree_to_ghz, hartree_to_mhz};

/// Controls for [`solve_channel`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Keep levels up to this energy (GHz above the channel asymptote).
    pub energy_cap_ghz: f64,
    /// Keep at most this many levels counted from the bottom.
    pub max_levels: Option<usize>,
    /// Re-solve on a doubled grid and require bound energies to agree to this many MHz.
    pub convergence_tolerance_mhz: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { energy_cap_ghz: 0.0, max_levels: None, convergence_tolerance_mhz: None }
    }
}

/// Eigenpairs of one radial channel on a shared grid.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    label: ChannelLabel,
    grid: Arc<RadialGrid>,
    potential: Vec<f64>,
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
    convergence_shift_mhz: Option<f64>,
}

/// V(R) + ħ²(J(J+1) − Ω²)/(2mR²) in hartree on the grid points.
pub fn effective_potential(
    curve: &PotentialCurve,
    j: i32,
    omega: i32,
    grid: &RadialGrid,
) -> Result<Vec<f64>, RadialError> {
    if j < 0 || omega.abs() > j {
        return Err(RadialError::Projection { j, omega });
    }
    let mass = amu_to_me(grid.mass_amu());
    let rot = (j * (j + 1) - omega * omega) as f64;
    Ok(grid.points().iter().map(|&r| curve.value(r) + rot / (2.0 * mass * r * r)).collect())
}

/// Diagonalize the channel Hamiltonian and keep the levels selected by `opts`.
pub fn solve_channel(
    curve: &PotentialCurve,
    label: ChannelLabel,
    grid: Arc<RadialGrid>,
    opts: &SolveOptions,
) -> Result<RadialSolution, RadialError> {
    let sol = diagonalize(curve, label, grid.clone(), opts)?;
    let Some(tol) = opts.convergence_tolerance_mhz else {
        return Ok(sol);
    };
    let fine = diagonalize(curve, label, Arc::new(grid.refined()?), opts)?;
    let (nb, nf) = (sol.bound_count(), fine.bound_count());
    if nb != nf {
        return Err(RadialError::NotConverged {
            label,
            detail: format!("bound level count changed from {nb} to {nf} on the refined grid"),
        });
    }
    let shift = (0..nb)
        .map(|i| (sol.energy_mhz(i) - fine.energy_mhz(i)).abs())
        .fold(0.0, f64::max);
    if shift > tol {
        return Err(RadialError::NotConverged {
            label,
            detail: format!("bound energies shift by {shift:.3e} MHz on the refined grid (tolerance {tol:.1e} MHz)"),
        });
    }
    Ok(RadialSolution { convergence_shift_mhz: Some(shift), ..sol })
}

fn diagonalize(
    curve: &PotentialCurve,
    label: ChannelLabel,
    grid: Arc<RadialGrid>,
    opts: &SolveOptions,
) -> Result<RadialSolution, RadialError> {
    let potential = effective_potential(curve, label.j, label.omega, &grid)?;
    let mut h = grid.kinetic_matrix();
    for (i, v) in potential.iter().enumerate() {
        h[(i, i)] += v;
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let cap = crate::units::ghz_to_hartree(opts.energy_cap_ghz);
    let mut keep: Vec<usize> = order.into_iter().take_while(|&k| eig.eigenvalues[k] < cap).collect();
    if let Some(m) = opts.max_levels {
        keep.truncate(m);
    }
    let n = grid.len();
    let mut vectors = DMatrix::zeros(n, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        let mut col = eig.eigenvectors.column(k).into_owned();
        let peak = col.amax();
        let outer = (0..n).rev().find(|&i| col[i].abs() > 0.1 * peak).unwrap_or(0);
        if col[outer] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(c, &col);
    }
    let energies = keep.iter().map(|&k| eig.eigenvalues[k]).collect();
    Ok(RadialSolution { label, grid, potential, energies, vectors, convergence_shift_mhz: None })
}

impl RadialSolution {
    pub fn label(&self) -> ChannelLabel {
        self.label
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Number of levels below the channel asymptote.
    pub fn bound_count(&self) -> usize {
        self.energies.iter().take_while(|&&e| e < 0.0).count()
    }

    pub fn energy_hartree(&self, level: usize) -> f64 {
        self.energies[level]
    }

    pub fn energy_ghz(&self, level: usize) -> f64 {
        hartree_to_ghz(self.energies[level])
    }

    pub fn energy_mhz(&self, level: usize) -> f64 {
        hartree_to_mhz(self.energies[level])
    }

    /// Largest refined-grid energy shift observed during the convergence check.
    pub fn convergence_shift_mhz(&self) -> Option<f64> {
        self.convergence_shift_mhz
    }

    /// Grid amplitudes φ_i with Σφ_i² = 1.
    pub fn amplitudes(&self, level: usize) -> &[f64] {
        let n = self.grid.len();
        &self.vectors.as_slice()[level * n..(level + 1) * n]
    }

    /// ψ(R_i) normalized so that ∫ψ² dR = 1.
    pub fn wavefunction(&self, level: usize) -> Vec<f64> {
        self.amplitudes(level).iter().zip(self.grid.jacobian()).map(|(p, j)| p / j.sqrt()).collect()
    }

    /// ⟨R²⟩ in bohr².
    pub fn mean_r2(&self, level: usize) -> f64 {
        self.amplitudes(level).iter().zip(self.grid.points()).map(|(p, r)| p * p * r * r).sum()
    }

    /// ⟨R⟩ in bohr.
    pub fn mean_r(&self, level: usize) -> f64 {
        self.amplitudes(level).iter().zip(self.grid.points()).map(|(p, r)| p * p * r).sum()
    }

    /// Effective potential (hartree) on the grid.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Outermost radius where the effective potential crosses the level energy.
    pub fn outer_turning_point(&self, level: usize) -> Option<f64> {
        let e = self.energies[level];
        let r = self.grid.points();
        let v = &self.potential;
        if *v.last()? <= e {
            return None;
        }
        let i = (1..r.len()).rev().find(|&i| v[i - 1] <= e)?;
        let t = (e - v[i - 1]) / (v[i] - v[i - 1]);
        Some(r[i - 1] + t * (r[i] - r[i - 1]))
    }

    /// Values of level `level` at arbitrary radii by sine-cardinal interpolation.
    pub fn interpolate(&self, level: usize, radii: &[f64]) -> Vec<f64> {
        let phi = self.amplitudes(level);
        let n = phi.len();
        let m = (n + 1) as f64;
        let norm = (2.0 / m).sqrt();
        let coeffs: Vec<f64> = (1..=n)
            .map(|k| {
                let kk = k as f64 * PI / m;
                norm * phi.iter().enumerate().map(|(i, p)| p * (kk * (i + 1) as f64).sin()).sum::<f64>()
            })
            .collect();
        radii
            .iter()
            .map(|&r| {
                if r <= self.grid.r_min() || r >= self.grid.r_max() {
                    return 0.0;
                }
                let x = self.grid.coordinate_of(r);
                let val: f64 =
                    coeffs.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * PI * x / m).sin()).sum();
                norm * val / self.grid.jacobian_at(r).sqrt()
            })
            .collect()
    }
}

/// Radial overlap ⟨ψ_a|ψ_b⟩ with a constant transition dipole of unit strength.
pub fn franck_condon(a: &RadialSolution, level_a: usize, b: &RadialSolution, level_b: usize) -> f64 {
    if Arc::ptr_eq(&a.grid, &b.grid) || *a.grid == *b.grid {
        return dot(a.amplitudes(level_a), b.amplitudes(level_b));
    }
    // Resample the coarser function onto the finer grid.
    let (fine, lf, coarse, lc) =
        if a.grid.len() >= b.grid.len() { (a, level_a, b, level_b) } else { (b, level_b, a, level_a) };
    let values = coarse.interpolate(lc, fine.grid.points());
    fine.amplitudes(lf)
        .iter()
        .zip(values.iter().zip(fine.grid.jacobian()))
        .map(|(p, (v, j))| p * v * j.sqrt())
        .sum()
}

/// Integrand ψ_a ψ_b sampled on a's grid (per unit R).
pub fn overlap_density(a: &RadialSolution, level_a: usize, b: &RadialSolution, level_b: usize) -> Vec<f64> {
    let pa = a.wavefunction(level_a);
    let pb = if Arc::ptr_eq(&a.grid, &b.grid) || *a.grid == *b.grid {
        b.wavefunction(level_b)
    } else {
        b.interpolate(level_b, a.grid.points())
    };
    pa.iter().zip(&pb).map(|(x, y)| x * y).collect()
}

/// B_v = ħ²/(2m⟨R²⟩) in MHz for a bound level.
pub fn rotational_constant(sol: &RadialSolution, level: usize) -> Result<f64, RadialError> {
    if level >= sol.len() {
        return Err(RadialError::MissingLevel { label: sol.label, level });
    }
    if sol.energies[level] >= 0.0 {
        return Err(RadialError::Unbound { label: sol.label, level });
    }
    let mass = amu_to_me(sol.grid.mass_amu());
    Ok(hartree_to_mhz(1.0 / (2.0 * mass * sol.mean_r2(level))))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Manifold;
    use crate::radial::grid::MappingProfile;
    use crate::radial::potential::EnvelopeTerm;
    use crate::units::{ghz_to_hartree, rotor_energy_mhz};

    const MASS: f64 = 43.454_590_265_5;

    fn label(j: i32) -> ChannelLabel {
        ChannelLabel { manifold: Manifold::Target, j, omega: 0 }
    }

    fn all_levels(cap_ghz: f64) -> SolveOptions {
        SolveOptions { energy_cap_ghz: cap_ghz, ..Default::default() }
    }

    #[test]
    fn harmonic_ladder() {
        let k = 2.0e4;
        let curve = PotentialCurve::Harmonic { k_ghz_per_bohr2: k, r0: 10.0 };
        let grid = Arc::new(RadialGrid::uniform(7.0, 13.0, 160, MASS).unwrap());
        let sol = solve_channel(&curve, label(0), grid, &all_levels(1e9)).unwrap();
        let omega = (ghz_to_hartree(k) / amu_to_me(MASS)).sqrt();
        for n in 0..10 {
            let exact = (n as f64 + 0.5) * omega;
            let rel = (sol.energy_hartree(n) - exact).abs() / exact;
            assert!(rel < 1e-6, "n={n}: rel {rel:e}");
        }
    }

    #[test]
    fn morse_spectrum() {
        let (d, a, re) = (1000.0, 0.9, 8.0);
        let curve = PotentialCurve::Morse { depth_ghz: d, alpha: a, r_e: re };
        let grid = Arc::new(RadialGrid::uniform(5.5, 30.0, 500, MASS).unwrap());
        let sol = solve_channel(&curve, label(0), grid, &all_levels(0.0)).unwrap();
        let dh = ghz_to_hartree(d);
        let w = a * (2.0 * dh / amu_to_me(MASS)).sqrt();
        let lam = (2.0 * amu_to_me(MASS) * dh).sqrt() / a;
        let vmax = (lam - 0.5).floor() as usize;
        for v in 0..vmax {
            let x = v as f64 + 0.5;
            let exact = -dh + w * x - (w * x).powi(2) / (4.0 * dh);
            let rel = (sol.energy_hartree(v) - exact).abs() / exact.abs();
            assert!(rel < 1e-8, "v={v}: rel {rel:e}");
        }
    }

    #[test]
    fn particle_in_a_box() {
        let l = 50.0;
        let grid = Arc::new(RadialGrid::uniform(1.0, 1.0 + l, 100, MASS).unwrap());
        let sol = solve_channel(&PotentialCurve::Flat, label(0), grid, &all_levels(1e9)).unwrap();
        let m = amu_to_me(MASS);
        for n in 1..=20 {
            let exact = (n as f64 * PI).powi(2) / (2.0 * m * l * l);
            assert!((sol.energy_hartree(n - 1) - exact).abs() / exact < 1e-12);
        }
    }

    fn mapped_setup() -> (PotentialCurve, Arc<RadialGrid>) {
        let curve = PotentialCurve::ModelGround { depth_ghz: 300.0, c6: 3.0e10, wall_exponent: 12.0 };
        let env = curve.envelope().unwrap();
        let profile = MappingProfile { envelope: vec![env], energy_cap: ghz_to_hartree(0.05), beta: 8.0 };
        let re = curve.equilibrium_radius().unwrap();
        let grid = Arc::new(RadialGrid::mapped(0.7 * re, 250.0, MASS, profile).unwrap());
        (curve, grid)
    }

    #[test]
    fn mapped_grid_orthonormal_and_closed() {
        let (curve, grid) = mapped_setup();
        let sol = solve_channel(&curve, label(0), grid.clone(), &all_levels(1e12)).unwrap();
        assert_eq!(sol.len(), grid.len());
        for a in [0, 3, sol.bound_count() - 1] {
            for b in [0, 3, sol.bound_count() - 1] {
                let s = franck_condon(&sol, a, &sol, b);
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-10);
            }
        }
        let other = solve_channel(&curve, label(3), grid, &all_levels(1e12)).unwrap();
        let total: f64 = (0..other.len()).map(|k| franck_condon(&sol, 2, &other, k).powi(2)).sum();
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn energies_increase_with_j() {
        let (curve, grid) = mapped_setup();
        let opts = all_levels(0.0);
        let mut prev: Option<RadialSolution> = None;
        for j in 0..5 {
            let s = solve_channel(&curve, label(j), grid.clone(), &opts).unwrap();
            if let Some(p) = &prev {
                for v in 0..s.bound_count() {
                    assert!(s.energy_hartree(v) >= p.energy_hartree(v));
                }
            }
            prev = Some(s);
        }
    }

    #[test]
    fn mapped_grid_converges_under_refinement() {
        let (curve, grid) = mapped_setup();
        let opts = SolveOptions { convergence_tolerance_mhz: Some(1e-3), ..all_levels(0.0) };
        let sol = solve_channel(&curve, label(0), grid, &opts).unwrap();
        assert!(sol.convergence_shift_mhz().unwrap() < 1e-3);
    }

    #[test]
    fn coarse_grid_fails_convergence() {
        let curve = PotentialCurve::ModelGround { depth_ghz: 300.0, c6: 3.0e10, wall_exponent: 12.0 };
        let re = curve.equilibrium_radius().unwrap();
        let grid = Arc::new(RadialGrid::uniform(0.7 * re, 250.0, 200, MASS).unwrap());
        let opts = SolveOptions { convergence_tolerance_mhz: Some(1e-3), ..all_levels(0.0) };
        let err = solve_channel(&curve, label(0), grid, &opts).unwrap_err();
        assert!(matches!(err, RadialError::NotConverged { .. }));
    }

    #[test]
    fn displaced_oscillator_overlap() {
        let k = 2.0e4;
        let d = 0.05;
        let grid = Arc::new(RadialGrid::uniform(8.0, 12.0, 200, MASS).unwrap());
        let a = solve_channel(&PotentialCurve::Harmonic { k_ghz_per_bohr2: k, r0: 10.0 }, label(0), grid.clone(), &all_levels(1e9))
            .unwrap();
        let b = solve_channel(&PotentialCurve::Harmonic { k_ghz_per_bohr2: k, r0: 10.0 + d }, label(0), grid, &all_levels(1e9))
            .unwrap();
        let m = amu_to_me(MASS);
        let omega = (ghz_to_hartree(k) / m).sqrt();
        let exact = (-m * omega * d * d / 4.0).exp();
        let fc = franck_condon(&a, 0, &b, 0);
        assert!((fc.abs() - exact).abs() < 1e-9, "{fc} vs {exact}");
    }

    #[test]
    fn cross_grid_overlap_matches_shared_grid() {
        let (curve, grid) = mapped_setup();
        let mut profile = MappingProfile { envelope: vec![curve.envelope().unwrap()], energy_cap: ghz_to_hartree(0.05), beta: 11.0 };
        profile.energy_cap *= 1.5;
        let other = Arc::new(RadialGrid::mapped(grid.r_min(), 250.0, MASS, profile).unwrap());
        let opts = all_levels(0.0);
        let a = solve_channel(&curve, label(0), grid.clone(), &opts).unwrap();
        let b = solve_channel(&curve, label(2), grid, &opts).unwrap();
        let c = solve_channel(&curve, label(2), other, &opts).unwrap();
        let v = a.bound_count() - 2;
        let same = franck_condon(&a, v, &b, v);
        let cross = franck_condon(&a, v, &c, v);
        assert!((same - cross).abs() < 1e-6, "{same} vs {cross}");
    }

    #[test]
    fn narrow_state_has_rigid_rotor_constant() {
        let r0 = 30.0;
        let curve = PotentialCurve::Harmonic { k_ghz_per_bohr2: 1.0e9, r0 };
        let grid = Arc::new(RadialGrid::uniform(29.0, 31.0, 400, MASS).unwrap());
        let mut sol = solve_channel(&curve, label(0), grid, &all_levels(1e12)).unwrap();
        // shift the zero so the ground level counts as bound
        sol.energies.iter_mut().for_each(|e| *e -= 1.0);
        let b = rotational_constant(&sol, 0).unwrap();
        let exact = rotor_energy_mhz(MASS, r0);
        assert!((b - exact).abs() / exact < 1e-4, "{b} vs {exact}");
    }

    #[test]
    fn centrifugal_term_units() {
        let grid = RadialGrid::uniform(50.0, 60.0, 9, MASS).unwrap();
        let v0 = effective_potential(&PotentialCurve::Flat, 0, 0, &grid).unwrap();
        assert!(v0.iter().all(|&v| v == 0.0));
        let v2 = effective_potential(&PotentialCurve::Flat, 2, 0, &grid).unwrap();
        // grid point 5 of 9 between walls at 50 and 60 sits at 55 bohr
        let r = grid.points()[4];
        assert!((r - 55.0).abs() < 1e-12);
        let mhz = hartree_to_mhz(v2[4]);
        assert!((mhz - 6.0 * rotor_energy_mhz(MASS, 55.0)).abs() < 1e-9);
        let v11 = effective_potential(&PotentialCurve::Flat, 1, 1, &grid).unwrap();
        assert!((hartree_to_mhz(v11[4]) - rotor_energy_mhz(MASS, 55.0)).abs() < 1e-9);
        assert!(effective_potential(&PotentialCurve::Flat, 1, 2, &grid).is_err());
    }

    #[test]
    fn envelope_profile_from_two_curves() {
        let g = PotentialCurve::ModelGround { depth_ghz: 300.0, c6: 3.0e10, wall_exponent: 12.0 };
        let e = PotentialCurve::ModelExcited { depth_ghz: 500.0, c3: 6.0e7, wall_exponent: 12.0 };
        let terms: Vec<EnvelopeTerm> = [g.envelope().unwrap(), e.envelope().unwrap()].to_vec();
        let p = MappingProfile { envelope: terms, energy_cap: ghz_to_hartree(0.05), beta: 3.0 };
        let grid = RadialGrid::mapped(5.0, 300.0, MASS, p).unwrap();
        assert!(grid.len() > 50);
    }
}
