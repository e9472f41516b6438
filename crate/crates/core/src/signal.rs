//! Small analysis tools for scanned curves: periods, envelopes, peaks and
//! correlations.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

/// Variance explained by the least-squares fit a + b·cos(2πft) + c·sin(2πft)
/// (floating-mean Lomb-Scargle power).
pub fn lomb_scargle(x: &[f64], y: &[f64], freq: f64) -> f64 {
    let w = 2.0 * PI * freq;
    let mut m = Matrix3::zeros();
    let mut r = Vector3::zeros();
    for (&t, &v) in x.iter().zip(y) {
        let (s, c) = (w * t).sin_cos();
        let basis = Vector3::new(1.0, c, s);
        m += basis * basis.transpose();
        r += basis * v;
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    match m.cholesky() {
        Some(ch) => {
            let coef = ch.solve(&r);
            (coef.dot(&r) - n * mean * mean).max(0.0)
        }
        None => 0.0,
    }
}

/// Period in [min_period, max_period] with the largest periodogram power,
/// refined by golden-section search around the best grid frequency.
pub fn dominant_period(x: &[f64], y: &[f64], min_period: f64, max_period: f64) -> Option<f64> {
    if x.len() < 4 || x.len() != y.len() || !(min_period > 0.0 && max_period > min_period) {
        return None;
    }
    let span = x[x.len() - 1] - x[0];
    if span <= 0.0 {
        return None;
    }
    let (f_lo, f_hi) = (1.0 / max_period, 1.0 / min_period);
    // Ten grid points per natural resolution 1/span.
    let df = 0.1 / span;
    let steps = (((f_hi - f_lo) / df).ceil() as usize).clamp(16, 200_000);
    let grid: Vec<f64> = (0..=steps).map(|k| f_lo + (f_hi - f_lo) * k as f64 / steps as f64).collect();
    let powers: Vec<f64> = grid.iter().map(|&f| lomb_scargle(x, y, f)).collect();
    let best = (0..grid.len()).max_by(|&a, &b| powers[a].total_cmp(&powers[b]))?;
    if powers[best] <= 0.0 {
        return None;
    }
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if lomb_scargle(x, y, c) > lomb_scargle(x, y, d) {
            b = d;
        } else {
            a = c;
        }
    }
    Some(2.0 / (a + b))
}

/// Fundamental period of a uniformly sampled series: the first local minimum
/// of d(T) = ⟨(y(t + T) − y(t))²⟩ / (2 var y) in [min_lag, max_lag] that drops
/// below `threshold`, refined by a parabola through its neighbours.
pub fn fundamental_period(dt: f64, y: &[f64], min_lag: f64, max_lag: f64, threshold: f64) -> Option<f64> {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    if !(var > 0.0 && dt > 0.0) {
        return None;
    }
    let d = |lag: usize| -> f64 {
        let m = n - lag;
        (0..m).map(|i| (y[i + lag] - y[i]).powi(2)).sum::<f64>() / (m as f64 * 2.0 * var)
    };
    let lo = ((min_lag / dt).floor() as usize).max(1);
    let hi = ((max_lag / dt).ceil() as usize).min(n / 2);
    if hi < lo + 2 {
        return None;
    }
    let values: Vec<f64> = (lo - 1..=hi + 1).map(d).collect();
    for k in 1..values.len() - 1 {
        let (a, b, c) = (values[k - 1], values[k], values[k + 1]);
        if b <= a && b <= c && b < threshold {
            let curvature = a - 2.0 * b + c;
            let shift = if curvature > 0.0 { 0.5 * (a - c) / curvature } else { 0.0 };
            return Some((lo - 1 + k) as f64 * dt + shift * dt);
        }
    }
    None
}

/// Upper envelope: the maximum of `y` in consecutive windows of width `width`,
/// placed at the window centers.
pub fn upper_envelope(x: &[f64], y: &[f64], width: f64) -> (Vec<f64>, Vec<f64>) {
    let mut ex = Vec::new();
    let mut ey = Vec::new();
    if x.is_empty() {
        return (ex, ey);
    }
    let mut start = x[0];
    let mut i = 0;
    while i < x.len() {
        let mut best = f64::NEG_INFINITY;
        let mut any = false;
        while i < x.len() && x[i] < start + width {
            best = best.max(y[i]);
            any = true;
            i += 1;
        }
        if any {
            ex.push(start + 0.5 * width);
            ey.push(best);
        }
        start += width;
    }
    (ex, ey)
}

/// Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Indices of interior local maxima rising at least `prominence` above the
/// lower of the two neighbouring minima.
pub fn peaks(y: &[f64], prominence: f64) -> Vec<usize> {
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        // Treat flat tops as one peak at their left edge.
        let mut j = i;
        while j + 1 < n && y[j + 1] == y[i] {
            j += 1;
        }
        if j + 1 < n && y[i] > y[i - 1] && y[i] > y[j + 1] {
            let left = y[..i].iter().rev().scan(y[i], |m, &v| {
                if v > y[i] {
                    None
                } else {
                    *m = m.min(v);
                    Some(*m)
                }
            });
            let right = y[j + 1..].iter().scan(y[i], |m, &v| {
                if v > y[i] {
                    None
                } else {
                    *m = m.min(v);
                    Some(*m)
                }
            });
            let lmin = left.last().unwrap_or(y[i]);
            let rmin = right.last().unwrap_or(y[i]);
            if y[i] - lmin.max(rmin) >= prominence {
                out.push(i);
            }
        }
        i = j + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_a_period() {
        let x: Vec<f64> = (0..600).map(|k| 50.0 + 0.01 * k as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| 1.0 + 0.3 * (2.0 * PI * t / 1.309 + 0.4).cos()).collect();
        let p = dominant_period(&x, &y, 0.5, 3.0).unwrap();
        assert!((p - 1.309).abs() < 1e-4, "{p}");
    }

    #[test]
    fn fundamental_not_harmonic() {
        let dt = 0.1;
        let y: Vec<f64> = (0..1000)
            .map(|k| {
                let t = k as f64 * dt;
                0.2 * (2.0 * PI * t / 30.7).cos() + 0.5 * (2.0 * PI * 3.0 * t / 30.7 + 1.0).cos()
            })
            .collect();
        let p = fundamental_period(dt, &y, 5.0, 50.0, 0.05).unwrap();
        assert!((p - 30.7).abs() < 0.02, "{p}");
        assert!(fundamental_period(dt, &y, 5.0, 25.0, 0.05).is_none());
    }

    #[test]
    fn envelope_of_beating_signal() {
        let x: Vec<f64> = (0..20000).map(|k| 0.01 * k as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| (1.0 + 0.5 * (2.0 * PI * t / 61.0).cos()) * (2.0 * PI * t / 1.3).cos().powi(2)).collect();
        let (ex, ey) = upper_envelope(&x, &y, 1.3);
        let p = dominant_period(&ex, &ey, 40.0, 80.0).unwrap();
        assert!((p - 61.0).abs() < 0.5, "{p}");
    }

    #[test]
    fn peak_counting_and_correlation() {
        let y = [0.0, 1.0, 0.0, 0.5, 0.45, 0.48, 0.0, 2.0, 2.0, 0.0];
        assert_eq!(peaks(&y, 0.2), vec![1, 3, 7]);
        assert_eq!(peaks(&y, 0.01), vec![1, 3, 5, 7]);
        let a = [1.0, 2.0, 3.0];
        assert!((pearson(&a, &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-15);
        assert!((pearson(&a, &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
    }
}
