//! Radial eigenvalues: a Morse well on a uniform grid against the analytic
//! ladder, then a long-range well on an adaptively mapped grid.

use std::sync::Arc;

use photoalign::channel::{ChannelLabel, Manifold};
use photoalign::radial::{solve_channel, MappingProfile, PotentialCurve, RadialGrid, SolveOptions};
use photoalign::units::{amu_to_me, ghz_to_hartree, hartree_to_mhz, RB87_PAIR_REDUCED_MASS_AMU};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mass = RB87_PAIR_REDUCED_MASS_AMU;
    let label = ChannelLabel { manifold: Manifold::Target, j: 0, omega: 0 };
    let bound = SolveOptions::default();

    let (depth, alpha, r_e) = (1000.0, 0.9, 8.0);
    let grid = Arc::new(RadialGrid::uniform(5.5, 30.0, 500, mass)?);
    let morse = solve_channel(&PotentialCurve::Morse { depth_ghz: depth, alpha, r_e }, label, grid, &bound)?;
    let d = ghz_to_hartree(depth);
    let w = alpha * (2.0 * d / amu_to_me(mass)).sqrt();
    println!("Morse well, {} bound levels", morse.bound_count());
    println!("{:>3} {:>18} {:>18} {:>10}", "v", "numeric (MHz)", "analytic (MHz)", "rel err");
    for v in 0..morse.bound_count() {
        let x = v as f64 + 0.5;
        let exact = -d + w * x - (w * x).powi(2) / (4.0 * d);
        let e = morse.energy_hartree(v);
        println!("{v:>3} {:>18.6} {:>18.6} {:>10.1e}", hartree_to_mhz(e), hartree_to_mhz(exact), ((e - exact) / exact).abs());
    }

    // Van der Waals well: the mapping puts points where the local wavelength is short.
    let curve = PotentialCurve::ModelGround { depth_ghz: 300.0, c6: 3.0e10, wall_exponent: 12.0 };
    let r0 = curve.equilibrium_radius().expect("the model well has a minimum");
    let profile = MappingProfile { envelope: vec![curve.envelope().expect("power-law tail")], energy_cap: ghz_to_hartree(0.05), beta: 8.0 };
    let grid = Arc::new(RadialGrid::mapped(0.7 * r0, 250.0, mass, profile)?);
    let sol = solve_channel(&curve, label, grid.clone(), &bound)?;
    println!("\nmapped grid: {} points on [{:.1}, {:.0}] bohr, {} bound levels", grid.len(), grid.r_min(), grid.r_max(), sol.bound_count());
    for v in sol.bound_count().saturating_sub(4)..sol.bound_count() {
        println!(
            "v = {v:>2}: E = {:>12.3} MHz, <R> = {:>6.1} bohr, outer turning point {:>6.1} bohr",
            sol.energy_mhz(v),
            sol.mean_r(v),
            sol.outer_turning_point(v).unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
