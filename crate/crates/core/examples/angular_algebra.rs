//! Wigner 3-j symbols and the cos²θ operator in the |J M Ω⟩ basis.
//!
//! Prints a few 3-j values, checks one orthogonality sum, and diagonalizes
//! cos²θ on J ≤ 2 to show the range of alignment a three-level rotor can reach.

use nalgebra::{DMatrix, SymmetricEigen};
use photoalign::angmom::{cos2theta_element, dipole_rotational_factor, wigner3j, AngularState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (j1, j2, j3, m1, m2, m3) in [(1, 1, 0, 0, 0, 0), (1, 1, 2, 1, -1, 0), (2, 2, 2, 0, 0, 0), (3, 2, 1, -2, 1, 1)] {
        println!("( {j1} {j2} {j3} ; {m1} {m2} {m3} ) = {:+.12}", wigner3j(j1, j2, j3, m1, m2, m3)?);
    }

    // Σ_{m1 m2} (2j3+1) (j1 j2 j3; m1 m2 m3)² = 1
    let (j1, j2, j3, m3): (i32, i32, i32, i32) = (4, 3, 5, 2);
    let mut sum = 0.0;
    for m1 in -j1..=j1 {
        let m2 = -m1 - m3;
        if m2.abs() <= j2 {
            sum += (2 * j3 + 1) as f64 * wigner3j(j1, j2, j3, m1, m2, m3)?.powi(2);
        }
    }
    println!("orthogonality sum for (4 3 5; · · 2): {sum:.15}");

    let lower = AngularState::new(0, 0, 0)?;
    let upper = AngularState::new(1, 0, 0)?;
    println!("dipole factor J=1 <- J=0, q=0: {:.6}", dipole_rotational_factor(&upper, &lower, 0));

    for m in 0..=1 {
        let states: Vec<AngularState> = (m..=2).map(|j| AngularState::new(j, m, 0)).collect::<Result<_, _>>()?;
        let n = states.len();
        let op = DMatrix::from_fn(n, n, |a, b| cos2theta_element(&states[a], &states[b]));
        let eig = SymmetricEigen::new(op);
        println!("M = {m}: cos²θ eigenvalues on J ≤ 2 = {:.4?}", eig.eigenvalues.as_slice());
    }
    Ok(())
}
