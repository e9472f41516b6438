//! Two-level dynamics under a Gaussian pulse: a resonant π pulse inverts the
//! population, and a strong chirped pulse transfers it adiabatically.

use photoalign::angmom::AngularState;
use photoalign::basis::{ChannelBasis, ChannelLevel, Coupling, HamiltonianModel, Parity};
use photoalign::channel::Manifold;
use photoalign::propagate::{propagate, sample_times, Controls, StateVector};
use photoalign::pulse::{intensity_to_rabi, PulseSpec, PulseTrain};

fn two_level(pulse: PulseSpec) -> Result<HamiltonianModel, Box<dyn std::error::Error>> {
    let level = |manifold| ChannelLevel { manifold, n: 0, state: AngularState::new(0, 0, 0).unwrap(), energy: 0.0, rotational_constant: 0.0 };
    let basis = ChannelBasis::from_levels(Parity::Even, vec![level(Manifold::Scattering), level(Manifold::Intermediate)]);
    Ok(HamiltonianModel::from_parts(basis, vec![Coupling { upper: 1, lower: 0, coefficient: 0.5 }], PulseTrain::single(pulse), 1.0)?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sigma = 10.0;
    // Pulse area ∫Ω dt = π for a Gaussian of rms width σ.
    let rabi = 1.0 / (2.0 * 1e-3 * sigma * std::f64::consts::PI.sqrt());
    let intensity = (rabi / intensity_to_rabi(1.0, 1.0)).powi(2);
    println!("π pulse: σ = {sigma} ns, peak Rabi {rabi:.3} MHz, {intensity:.3e} W/cm² at 1 D");

    let model = two_level(PulseSpec::transform_limited(intensity, sigma, 5.0 * sigma, 0.0)?)?;
    let times = sample_times(0.0, 10.0 * sigma, 10.0);
    let traj = propagate(&StateVector::basis_state(2, 0, 0.0), &model, &times, &Controls::default())?;
    for s in &traj.states {
        println!("t = {:>5.1} ns  P_upper = {:.8}", s.time, s.amplitudes[1].norm_sqr());
    }
    println!("steps accepted {} rejected {}", traj.stats.accepted, traj.stats.rejected);

    // Chirped and far stronger: the transfer no longer depends on the exact area.
    for scale in [100.0, 400.0, 1600.0, 2000.0] {
        let pulse = PulseSpec::new(scale * intensity, sigma, 100.0, 5.0 * sigma, 0.0)?;
        let traj = propagate(&StateVector::basis_state(2, 0, 0.0), &two_level(pulse)?, &[10.0 * sigma], &Controls::default())?;
        println!("chirped, {scale:>5.0} × π-pulse intensity: P_upper = {:.6}", traj.last().amplitudes[1].norm_sqr());
    }
    Ok(())
}
