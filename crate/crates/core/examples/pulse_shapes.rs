//! Gaussian pulses and trains: envelope, instantaneous detuning and the phase
//! locked carrier that makes successive pulses interfere.

use photoalign::pulse::{intensity_to_rabi, make_train, PulseSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mu = 10.7;
    let chirped = PulseSpec::new(1000.0, 10.0, 100.0, 50.0, 0.0)?;
    println!("1000 W/cm², μ = {mu} D: peak Rabi frequency {:.3} MHz", intensity_to_rabi(1000.0, mu));
    let (t0, t1) = chirped.window();
    println!("window [{t0}, {t1}] ns, pulse energy {:.3e}", chirped.energy(mu));
    println!("{:>6} {:>12} {:>14}", "t (ns)", "Ω(t) (MHz)", "δ(t) (MHz)");
    for t in (0..=10).map(|k| 10.0 * k as f64) {
        println!("{t:>6.1} {:>12.5} {:>14.1}", chirped.envelope(t, mu), chirped.instantaneous_detuning(t));
    }

    let base = PulseSpec::transform_limited(500.0, 10.0, 50.0, 0.0)?;
    let train = make_train(base, 3, 51.0, false)?;
    let (a, b) = train.window();
    println!("\nthree pulses 51 ns apart, window [{a}, {b}] ns");
    for p in train.pulses() {
        println!("  center {:>6.1} ns, window {:?}", p.center(), p.window());
    }
    for t in [50.0, 101.0, 152.0] {
        let (re, im) = train.field(t, mu);
        println!("  field at {t:>5.1} ns: |Ω| = {:.5} MHz, phase {:+.4} rad", re.hypot(im), im.atan2(re));
    }
    match make_train(base, 2, 20.0, false) {
        Ok(_) => println!("overlapping train accepted"),
        Err(e) => println!("20 ns spacing rejected: {e}"),
    }
    Ok(())
}
