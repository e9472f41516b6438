//! Angular-momentum algebra on the |J M Ω⟩ rotational basis.
//!
//! Wigner 3-j symbols are evaluated with the Racah sum formula. Every
//! factorial is carried as a prime-exponent vector, the alternating sum is
//! accumulated exactly in integers, and only the final product is rounded to
//! `f64`. This keeps full double precision up to j = [`MAX_J`].
//!
//! Phase conventions: the dipole and cos²θ matrix elements use the standard
//! spherical-tensor form
//!
//! ```text
//! ⟨J'M'Ω'|D^k_{0q}|JMΩ⟩ = √((2J+1)(2J'+1)) (−1)^(M'−Ω') (J' k J; −M' 0 M) (J' k J; −Ω' q Ω)
//! ```
//!
//! with the lab-frame component fixed to 0 (linear Z polarization).

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Largest angular momentum supported by the exact 3-j evaluation.
pub const MAX_J: i32 = 40;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AngMomError {
    #[error("negative angular momentum j = {0}")]
    NegativeJ(i32),
    #[error("projection {m} out of range for j = {j}")]
    ProjectionOutOfRange { j: i32, m: i32 },
    #[error("angular momentum {0} exceeds supported maximum {MAX_J}")]
    TooLarge(i32),
}

/// A Hund's case (c) rotational basis state |J M Ω⟩ with integer quantum numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AngularState {
    j: i32,
    m: i32,
    omega: i32,
}

impl AngularState {
    pub fn new(j: i32, m: i32, omega: i32) -> Result<Self, AngMomError> {
        if j < 0 {
            return Err(AngMomError::NegativeJ(j));
        }
        if j > MAX_J {
            return Err(AngMomError::TooLarge(j));
        }
        if m.abs() > j {
            return Err(AngMomError::ProjectionOutOfRange { j, m });
        }
        if omega.abs() > j {
            return Err(AngMomError::ProjectionOutOfRange { j, m: omega });
        }
        Ok(Self { j, m, omega })
    }

    pub fn j(&self) -> i32 {
        self.j
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn omega(&self) -> i32 {
        self.omega
    }
}

impl std::fmt::Display for AngularState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|J={} M={} Ω={}⟩", self.j, self.m, self.omega)
    }
}

const PRIMES: [u32; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131,
];
const MAX_FACTORIAL: usize = (3 * MAX_J + 1) as usize;

type Exponents = [i32; PRIMES.len()];

fn factorial_table() -> &'static Vec<Exponents> {
    static TABLE: OnceLock<Vec<Exponents>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = vec![[0; PRIMES.len()]; MAX_FACTORIAL + 1];
        for n in 2..=MAX_FACTORIAL {
            let mut e = table[n - 1];
            let mut rest = n as u32;
            for (slot, &p) in e.iter_mut().zip(PRIMES.iter()) {
                while rest.is_multiple_of(p) {
                    *slot += 1;
                    rest /= p;
                }
            }
            debug_assert_eq!(rest, 1);
            table[n] = e;
        }
        table
    })
}

fn add_factorial(acc: &mut Exponents, n: i32, sign: i32) {
    let f = &factorial_table()[n as usize];
    for (a, b) in acc.iter_mut().zip(f.iter()) {
        *a += sign * b;
    }
}

fn pow_product_u128(exps: &Exponents) -> Option<u128> {
    let mut acc: u128 = 1;
    for (&p, &e) in PRIMES.iter().zip(exps.iter()) {
        for _ in 0..e {
            acc = acc.checked_mul(p as u128)?;
        }
    }
    Some(acc)
}

fn pow_product_big(exps: &Exponents) -> BigInt {
    let mut acc = BigInt::from(1u32);
    for (&p, &e) in PRIMES.iter().zip(exps.iter()) {
        if e > 0 {
            acc *= BigInt::from(p).pow(e as u32);
        }
    }
    acc
}

fn validate(j: i32, m: i32) -> Result<(), AngMomError> {
    if j < 0 {
        return Err(AngMomError::NegativeJ(j));
    }
    if j > MAX_J {
        return Err(AngMomError::TooLarge(j));
    }
    if m.abs() > j {
        return Err(AngMomError::ProjectionOutOfRange { j, m });
    }
    Ok(())
}

/// Wigner 3-j symbol (j1 j2 j3; m1 m2 m3), memoized.
///
/// Returns exactly 0 when the projections do not sum to zero or the
/// triangle rule fails.
pub fn wigner3j(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> Result<f64, AngMomError> {
    validate(j1, m1)?;
    validate(j2, m2)?;
    validate(j3, m3)?;
    Ok(cached(j1, j2, j3, m1, m2, m3))
}

type Key = (i32, i32, i32, i32, i32, i32);

// Bounded so that exhaustive scans cannot grow it without limit; results are
// identical with or without a hit.
const CACHE_LIMIT: usize = 1 << 18;

fn cached(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<Key, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (j1, j2, j3, m1, m2, m3);
    if let Some(v) = cache.lock().expect("3j cache poisoned").get(&key) {
        return *v;
    }
    let v = racah(j1, j2, j3, m1, m2, m3);
    let mut guard = cache.lock().expect("3j cache poisoned");
    if guard.len() >= CACHE_LIMIT {
        guard.clear();
    }
    guard.insert(key, v);
    v
}

/// Uncached 3-j evaluation; inputs must already be validated.
pub fn wigner3j_uncached(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> Result<f64, AngMomError> {
    validate(j1, m1)?;
    validate(j2, m2)?;
    validate(j3, m3)?;
    Ok(racah(j1, j2, j3, m1, m2, m3))
}

fn racah(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0 {
        return 0.0;
    }
    if j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }

    // Prefactor squared: Δ(j1 j2 j3) Π (j ± m)!
    let mut pre: Exponents = [0; PRIMES.len()];
    add_factorial(&mut pre, j1 + j2 - j3, 1);
    add_factorial(&mut pre, j1 - j2 + j3, 1);
    add_factorial(&mut pre, -j1 + j2 + j3, 1);
    add_factorial(&mut pre, j1 + j2 + j3 + 1, -1);
    for (j, m) in [(j1, m1), (j2, m2), (j3, m3)] {
        add_factorial(&mut pre, j + m, 1);
        add_factorial(&mut pre, j - m, 1);
    }

    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    if k_min > k_max {
        return 0.0;
    }

    // Each term is 1 / Π(six factorials); bring them over the common
    // denominator Π p^max_e so the numerators are integers.
    let denoms: Vec<Exponents> = (k_min..=k_max)
        .map(|k| {
            let mut e: Exponents = [0; PRIMES.len()];
            add_factorial(&mut e, k, 1);
            add_factorial(&mut e, j3 - j2 + k + m1, 1);
            add_factorial(&mut e, j3 - j1 + k - m2, 1);
            add_factorial(&mut e, j1 + j2 - j3 - k, 1);
            add_factorial(&mut e, j1 - k - m1, 1);
            add_factorial(&mut e, j2 - k + m2, 1);
            e
        })
        .collect();
    let mut common: Exponents = [0; PRIMES.len()];
    for d in &denoms {
        for (c, e) in common.iter_mut().zip(d.iter()) {
            *c = (*c).max(*e);
        }
    }
    let numerators: Vec<Exponents> = denoms
        .iter()
        .map(|d| {
            let mut n = common;
            for (a, b) in n.iter_mut().zip(d.iter()) {
                *a -= b;
            }
            n
        })
        .collect();

    let sum = exact_alternating_sum(&numerators, k_min);
    if sum.is_zero() {
        return 0.0;
    }

    // value = sign · |sum| · √(pre) / common
    let mut scale: Exponents = pre;
    for (s, c) in scale.iter_mut().zip(common.iter()) {
        *s -= 2 * c;
    }
    let magnitude_sq = scale
        .iter()
        .zip(PRIMES.iter())
        .fold(1.0_f64, |acc, (&e, &p)| acc * (p as f64).powi(e));
    let abs_sum = sum.abs().to_f64().unwrap_or(f64::INFINITY);
    let mut value = abs_sum * magnitude_sq.sqrt();
    if sum.is_negative() {
        value = -value;
    }
    if (j1 - j2 - m3).rem_euclid(2) == 1 {
        value = -value;
    }
    value
}

fn exact_alternating_sum(numerators: &[Exponents], k_min: i32) -> BigInt {
    let small: Option<Vec<u128>> = numerators.iter().map(pow_product_u128).collect();
    if let Some(values) = small {
        let mut pos: u128 = 0;
        let mut neg: u128 = 0;
        let mut fits = true;
        for (i, v) in values.iter().enumerate() {
            let slot = if (k_min + i as i32) % 2 == 0 { &mut pos } else { &mut neg };
            match slot.checked_add(*v) {
                Some(s) => *slot = s,
                None => {
                    fits = false;
                    break;
                }
            }
        }
        if fits {
            return BigInt::from(pos) - BigInt::from(neg);
        }
    }
    numerators
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let v = pow_product_big(n);
            if (k_min + i as i32) % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .sum()
}

/// Matrix element of the rank-k rotation matrix D^k_{0q} between rotational states.
fn rotation_element(bra: &AngularState, rank: i32, q: i32, ket: &AngularState) -> f64 {
    if bra.m != ket.m || bra.omega != ket.omega + q {
        return 0.0;
    }
    if (bra.j - ket.j).abs() > rank || bra.j + ket.j < rank {
        return 0.0;
    }
    let lab = cached(bra.j, rank, ket.j, -bra.m, 0, ket.m);
    if lab == 0.0 {
        return 0.0;
    }
    let body = cached(bra.j, rank, ket.j, -bra.omega, q, ket.omega);
    let phase = if (bra.m - bra.omega).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    (((2 * bra.j + 1) * (2 * ket.j + 1)) as f64).sqrt() * phase * lab * body
}

/// Rotational factor of the transition dipole between `lower` and `upper`
/// for lab polarization along Z and body-frame component `q`.
///
/// Multiplies the radial Franck-Condon overlap to give the full coupling.
/// Nonzero only for M' = M, |J − J'| ≤ 1 and Ω' = Ω + q.
pub fn dipole_rotational_factor(upper: &AngularState, lower: &AngularState, q: i32) -> f64 {
    if q.abs() > 1 {
        return 0.0;
    }
    rotation_element(upper, 1, q, lower)
}

/// ⟨bra|cos²θ|ket⟩ using cos²θ = 1/3 + (2/3) D²₀₀.
pub fn cos2theta_element(bra: &AngularState, ket: &AngularState) -> f64 {
    if bra.m != ket.m || bra.omega != ket.omega {
        return 0.0;
    }
    let diag = if bra.j == ket.j { 1.0 / 3.0 } else { 0.0 };
    diag + 2.0 / 3.0 * rotation_element(bra, 2, 0, ket)
}
