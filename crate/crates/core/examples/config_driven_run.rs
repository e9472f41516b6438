//! Reading a TOML run description with units, echoing its canonical form and
//! solving the eigenvalue problem it describes.

use std::sync::Arc;

use photoalign::channel::{ChannelLabel, Manifold};
use photoalign::config::RunConfig;
use photoalign::radial::SolveOptions;
use photoalign::system::level_tables;

const CONFIG: &str = r#"
[model.ground]
kind = "morse"
depth = "1000 GHz"
alpha = "0.9 1/bohr"
r_e = "8 bohr"

[model.excited]
kind = "harmonic"
k = "1e4 GHz/bohr^2"
r0 = "9 bohr"

[grid]
kind = "uniform"
r_min = "5.5 bohr"
r_max = "30 bohr"
points = 500

[pulse]
peak_intensity = "1 kW/cm^2"
sigma = "10000 ps"
chirp = "0.1 GHz/ns"

[eigen]
j = [0, 2]
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::parse(CONFIG)?;
    println!("canonical form (sha256 {}):\n{}", cfg.hash(), cfg.echo());

    let p = &cfg.run.pulse;
    println!("pulse in canonical units: {} W/cm², σ = {} ns, chirp {} MHz/ns", p.peak_intensity, p.sigma, p.chirp);

    let grid = Arc::new(cfg.grid.build(&[&cfg.ground.curve, &cfg.excited.curve], cfg.model.mass_amu)?);
    let channels: Vec<(ChannelLabel, _)> = cfg
        .eigen
        .j_values
        .iter()
        .map(|&j| (ChannelLabel { manifold: Manifold::Target, j, omega: 0 }, &cfg.ground.curve))
        .collect();
    let opts = SolveOptions { energy_cap_ghz: cfg.eigen.energy_cap_ghz, max_levels: cfg.eigen.max_levels, convergence_tolerance_mhz: None };
    for t in level_tables(&channels, grid, &opts)? {
        let l = t.solution.label();
        for v in 0..t.solution.len() {
            println!("J = {} v = {v}: E = {:>14.3} MHz, B_v = {:>9.3} MHz", l.j, t.solution.energy_mhz(v), t.rotational_constants_mhz[v]);
        }
    }
    Ok(())
}
