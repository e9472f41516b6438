//! Phase-locked pulse trains scanned in delay.
//!
//! An isolated Λ system (scattering, intermediate, target bound by 764 MHz)
//! driven by short pulses shows fringes at the 1.31 ns binding period, compared
//! against the n-slit pattern. The thermal ensemble of the calibrated model is
//! then scanned with 10 ns transform-limited pulses, where the formed
//! population is tiny.

use photoalign::angmom::AngularState;
use photoalign::basis::{ChannelBasis, ChannelLevel, Coupling, HamiltonianModel, Parity};
use photoalign::channel::Manifold;
use photoalign::experiment::{PulseParams, RunSpec};
use photoalign::propagate::{propagate, Controls, StateVector};
use photoalign::pulse::{make_train, PulseSpec};
use photoalign::signal::{dominant_period, pearson};
use photoalign::sweep::{nslit_reference, run_sweep, Axis, SweepOutput, SweepParameter, SweepPlan};
use photoalign::system::{ModelSpec, PhotoassociationSystem};

const BINDING: f64 = 764.0;

fn lambda_system(n: usize, delay: f64) -> Result<f64, Box<dyn std::error::Error>> {
    let level = |manifold, energy| ChannelLevel { manifold, n: 0, state: AngularState::new(0, 0, 0).unwrap(), energy, rotational_constant: 0.0 };
    let basis = ChannelBasis::from_levels(
        Parity::Even,
        vec![level(Manifold::Scattering, 0.0), level(Manifold::Intermediate, 0.0), level(Manifold::Target, -BINDING)],
    );
    let couplings = vec![Coupling { upper: 1, lower: 0, coefficient: 1e-3 }, Coupling { upper: 1, lower: 2, coefficient: 1e-3 }];
    let base = PulseSpec::transform_limited(100.0, 0.3, 1.5, 0.0)?;
    let train = make_train(base, n, delay, false)?;
    let end = train.window().1;
    let model = HamiltonianModel::from_parts(basis, couplings, train, 10.7)?;
    let traj = propagate(&StateVector::basis_state(3, 0, 0.0), &model, &[end], &Controls::default())?;
    Ok(traj.last().amplitudes[2].norm_sqr())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let delays: Vec<f64> = (0..=40).map(|k| 20.0 + 0.05 * k as f64).collect();
    println!("Λ system, 0.3 ns pulses");
    for n in 2..=4 {
        let pops = delays.iter().map(|&d| lambda_system(n, d)).collect::<Result<Vec<_>, _>>()?;
        let reference: Vec<f64> = delays.iter().map(|&d| nslit_reference(n, d, BINDING)).collect();
        println!(
            "  n = {n}: fringe period {:.4} ns, correlation with the {n}-slit pattern {:.3}",
            dominant_period(&delays, &pops, 0.5, 3.0).unwrap_or(f64::NAN),
            pearson(&pops, &reference)
        );
    }

    let system = PhotoassociationSystem::build(ModelSpec::default())?;
    let base = RunSpec::new(PulseParams::transform_limited(500.0, 10.0)).with_train(2, 50.0);
    let mut plan = SweepPlan::new(base, vec![Axis::range(SweepParameter::Delay, 50.0, 51.4, 0.2)?])?;
    plan.outputs = vec![SweepOutput::FinalPopulation];
    let table = run_sweep(&system, &plan)?;
    println!("\nthermal ensemble, two 10 ns TL pulses at 500 W/cm²");
    let pops = table.column(SweepOutput::FinalPopulation);
    for (d, p) in table.coordinate(SweepParameter::Delay).expect("delay axis").iter().zip(&pops) {
        println!("  delay {d:>5.2} ns: population {:.4e}", p.unwrap_or(f64::NAN));
    }
    println!("  {} of {} points failed", table.failures(), table.rows.len());
    Ok(())
}
