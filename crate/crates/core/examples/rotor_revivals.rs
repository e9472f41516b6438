//! Rotational revivals of a J = 0 + J = 2 superposition and of a broad
//! rotational wavepacket, with the periods read back from the signals.

use photoalign::ensemble::two_state_alignment;
use photoalign::signal::{dominant_period, fundamental_period};

fn main() {
    let b = 16.3;
    let revival = 1e3 / (2.0 * b);
    println!("B = {b} MHz, full revival 1/(2B) = {revival:.3} ns");

    let dt = 0.1;
    let times: Vec<f64> = (0..1200).map(|k| k as f64 * dt).collect();
    let beat: Vec<f64> = times.iter().map(|&t| two_state_alignment(0.8, 0.6, b, t)).collect();
    let max = beat.iter().copied().fold(f64::MIN, f64::max);
    let min = beat.iter().copied().fold(f64::MAX, f64::min);
    println!("J=0+2 beat: <cos²θ> in [{min:.4}, {max:.4}], period {:.4} ns (1/(6B) = {:.4})", dominant_period(&times, &beat, 2.0, 20.0).unwrap_or(f64::NAN), 1e3 / (6.0 * b));

    // A wavepacket over J = 0..8 rephases only at the full revival time.
    let weights: Vec<f64> = (0..=8).map(|j| (-(j as f64 - 3.0).powi(2) / 4.0).exp()).collect();
    let packet: Vec<f64> = times
        .iter()
        .map(|&t| {
            (0..weights.len() - 2)
                .map(|j| {
                    let e = |j: usize| b * (j * (j + 1)) as f64;
                    weights[j] * weights[j + 2] * (2.0 * std::f64::consts::PI * 1e-3 * (e(j + 2) - e(j)) * t).cos()
                })
                .sum()
        })
        .collect();
    match fundamental_period(dt, &packet, 5.0, 50.0, 0.05) {
        Some(p) => println!("wavepacket fundamental period {p:.3} ns"),
        None => println!("no period found"),
    }
}
