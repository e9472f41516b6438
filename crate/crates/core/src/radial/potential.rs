//! Born-Oppenheimer potential curves.

use std::path::Path;

use crate::units::{ghz_to_hartree, hartree_to_ghz};

use super::RadialError;

/// A potential energy curve. Values are relative to the curve's own dissociation
/// asymptote. Parameters are stored in lab units (GHz, bohr); [`PotentialCurve::value`]
/// returns hartree.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialCurve {
    /// Mie (n, 6) well: `D/(n−6) [6 (Re/R)^n − n (Re/R)^6]` with Re fixed by C6.
    ModelGround { depth_ghz: f64, c6: f64, wall_exponent: f64 },
    /// Mie (n, 3) well with a resonant-dipole −C3/R³ tail.
    ModelExcited { depth_ghz: f64, c3: f64, wall_exponent: f64 },
    /// Externally sampled curve, natural cubic spline between samples.
    Tabulated(TabulatedCurve),
    /// ½ k (R − R0)², k in GHz/bohr².
    Harmonic { k_ghz_per_bohr2: f64, r0: f64 },
    /// D [(1 − e^{−a(R−Re)})² − 1].
    Morse { depth_ghz: f64, alpha: f64, r_e: f64 },
    /// V = 0.
    Flat,
}

/// Long-range envelope term C/(Rⁿ + Rsⁿ) (hartree units) used to shape mapped grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeTerm {
    pub coefficient: f64,
    pub power: f64,
    pub saturation_radius: f64,
}

impl EnvelopeTerm {
    /// Term saturating at `depth` hartree for short range, with tail coefficient `coefficient`.
    pub fn from_tail(coefficient: f64, power: f64, depth: f64) -> Self {
        Self { coefficient, power, saturation_radius: (coefficient / depth).powf(1.0 / power) }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.coefficient / (r.powf(self.power) + self.saturation_radius.powf(self.power))
    }

    pub fn d1(&self, r: f64) -> f64 {
        let n = self.power;
        let w = r.powf(n) + self.saturation_radius.powf(n);
        -self.coefficient * n * r.powf(n - 1.0) / (w * w)
    }

    pub fn d2(&self, r: f64) -> f64 {
        let n = self.power;
        let w = r.powf(n) + self.saturation_radius.powf(n);
        -self.coefficient * n * ((n - 1.0) * r.powf(n - 2.0) * w - 2.0 * n * r.powf(2.0 * n - 2.0)) / (w * w * w)
    }
}

fn mie(r: f64, depth: f64, coefficient: f64, n: f64, p: f64) -> f64 {
    let re = mie_equilibrium(depth, coefficient, n, p);
    let x = re / r;
    depth / (n - p) * (p * x.powf(n) - n * x.powf(p))
}

fn mie_equilibrium(depth: f64, coefficient: f64, n: f64, p: f64) -> f64 {
    (coefficient * (n - p) / (n * depth)).powf(1.0 / p)
}

impl PotentialCurve {
    /// Potential in hartree at `r` bohr.
    pub fn value(&self, r: f64) -> f64 {
        match self {
            PotentialCurve::ModelGround { depth_ghz, c6, wall_exponent } => {
                ghz_to_hartree(mie(r, *depth_ghz, *c6, *wall_exponent, 6.0))
            }
            PotentialCurve::ModelExcited { depth_ghz, c3, wall_exponent } => {
                ghz_to_hartree(mie(r, *depth_ghz, *c3, *wall_exponent, 3.0))
            }
            PotentialCurve::Tabulated(t) => t.value(r),
            PotentialCurve::Harmonic { k_ghz_per_bohr2, r0 } => {
                0.5 * ghz_to_hartree(*k_ghz_per_bohr2) * (r - r0) * (r - r0)
            }
            PotentialCurve::Morse { depth_ghz, alpha, r_e } => {
                let e = 1.0 - (-alpha * (r - r_e)).exp();
                ghz_to_hartree(*depth_ghz) * (e * e - 1.0)
            }
            PotentialCurve::Flat => 0.0,
        }
    }

    /// Equilibrium radius for the model wells.
    pub fn equilibrium_radius(&self) -> Option<f64> {
        match self {
            PotentialCurve::ModelGround { depth_ghz, c6, wall_exponent } => {
                Some(mie_equilibrium(*depth_ghz, *c6, *wall_exponent, 6.0))
            }
            PotentialCurve::ModelExcited { depth_ghz, c3, wall_exponent } => {
                Some(mie_equilibrium(*depth_ghz, *c3, *wall_exponent, 3.0))
            }
            PotentialCurve::Morse { r_e, .. } => Some(*r_e),
            PotentialCurve::Harmonic { r0, .. } => Some(*r0),
            PotentialCurve::Tabulated(t) => Some(t.minimum_position()),
            PotentialCurve::Flat => None,
        }
    }

    /// Depth of the well in hartree (positive).
    pub fn depth(&self) -> f64 {
        match self {
            PotentialCurve::ModelGround { depth_ghz, .. }
            | PotentialCurve::ModelExcited { depth_ghz, .. }
            | PotentialCurve::Morse { depth_ghz, .. } => ghz_to_hartree(*depth_ghz),
            PotentialCurve::Tabulated(t) => -t.minimum_value(),
            PotentialCurve::Harmonic { .. } | PotentialCurve::Flat => 0.0,
        }
    }

    /// Envelope term for building mapped grids, if the curve has an attractive tail.
    pub fn envelope(&self) -> Option<EnvelopeTerm> {
        match self {
            PotentialCurve::ModelGround { c6, .. } => {
                Some(EnvelopeTerm::from_tail(ghz_to_hartree(*c6), 6.0, self.depth()))
            }
            PotentialCurve::ModelExcited { c3, .. } => {
                Some(EnvelopeTerm::from_tail(ghz_to_hartree(*c3), 3.0, self.depth()))
            }
            PotentialCurve::Tabulated(t) => {
                let (c, n) = t.tail;
                if c > 0.0 && self.depth() > 0.0 {
                    Some(EnvelopeTerm::from_tail(c, n, self.depth()))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PotentialCurve::ModelGround { .. } => "model-ground",
            PotentialCurve::ModelExcited { .. } => "model-excited",
            PotentialCurve::Tabulated(_) => "tabulated",
            PotentialCurve::Harmonic { .. } => "harmonic",
            PotentialCurve::Morse { .. } => "morse",
            PotentialCurve::Flat => "flat",
        }
    }
}

/// Sampled potential loaded from a two-column text file.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCurve {
    r: Vec<f64>,
    v: Vec<f64>,
    second: Vec<f64>,
    // Power-law tail -C/R^n (hartree) fitted to the last two samples.
    tail: (f64, f64),
}

impl TabulatedCurve {
    /// Build from (R bohr, V GHz) samples.
    pub fn from_samples(samples: &[(f64, f64)]) -> Result<Self, RadialError> {
        if samples.len() < 4 {
            return Err(RadialError::Table("need at least 4 samples".into()));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(RadialError::Table(format!(
                    "R must be strictly increasing (R = {} followed by {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if samples.iter().any(|(r, v)| !r.is_finite() || !v.is_finite() || *r <= 0.0) {
            return Err(RadialError::Table("non-finite or non-positive sample".into()));
        }
        let r: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let v: Vec<f64> = samples.iter().map(|s| ghz_to_hartree(s.1)).collect();

        // Asymptote: beyond the deepest point the curve must rise monotonically
        // towards zero from below.
        let imin = v
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if v[imin] >= 0.0 {
            return Err(RadialError::Table("curve has no attractive well".into()));
        }
        let last = *v.last().unwrap_or(&0.0);
        if last > 0.0 || last.abs() > 1e-2 * v[imin].abs() {
            return Err(RadialError::Table(format!(
                "last sample V = {} GHz does not approach the asymptote from below",
                hartree_to_ghz(last)
            )));
        }
        let tail_start = v[imin..]
            .windows(2)
            .rposition(|w| w[1] < w[0])
            .map(|p| imin + p + 1)
            .unwrap_or(imin);
        if tail_start + 2 < v.len() && v[tail_start..].windows(2).any(|w| w[1] < w[0]) {
            return Err(RadialError::Table("tail is not monotonic".into()));
        }

        let n = r.len();
        let (r1, r2) = (r[n - 2], r[n - 1]);
        let (v1, v2) = (v[n - 2], v[n - 1]);
        let tail = if v1 < 0.0 && v2 < 0.0 && v2 > v1 {
            let power = (v1 / v2).ln() / (r2 / r1).ln();
            (-v2 * r2.powf(power), power)
        } else {
            (0.0, 6.0)
        };
        let second = natural_spline_second_derivatives(&r, &v);
        Ok(Self { r, v, second, tail })
    }

    /// Parse the text format: two columns `R_bohr V_GHz`, `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, RadialError> {
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<f64, RadialError> {
                s.ok_or_else(|| RadialError::Table(format!("line {}: expected two columns", lineno + 1)))?
                    .parse::<f64>()
                    .map_err(|e| RadialError::Table(format!("line {}: {e}", lineno + 1)))
            };
            let r = parse(cols.next())?;
            let v = parse(cols.next())?;
            if cols.next().is_some() {
                return Err(RadialError::Table(format!("line {}: expected two columns", lineno + 1)));
            }
            samples.push((r, v));
        }
        Self::from_samples(&samples)
    }

    pub fn load(path: &Path) -> Result<Self, RadialError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RadialError::Table(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn value(&self, x: f64) -> f64 {
        let n = self.r.len();
        if x <= self.r[0] {
            let slope = (self.v[1] - self.v[0]) / (self.r[1] - self.r[0]);
            return self.v[0] + slope * (x - self.r[0]);
        }
        if x >= self.r[n - 1] {
            let (c, p) = self.tail;
            return -c / x.powf(p);
        }
        let hi = self.r.partition_point(|&ri| ri < x).max(1);
        let lo = hi - 1;
        let h = self.r[hi] - self.r[lo];
        let a = (self.r[hi] - x) / h;
        let b = (x - self.r[lo]) / h;
        a * self.v[lo]
            + b * self.v[hi]
            + ((a * a * a - a) * self.second[lo] + (b * b * b - b) * self.second[hi]) * h * h / 6.0
    }

    fn minimum_value(&self) -> f64 {
        self.v.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn minimum_position(&self) -> f64 {
        let i = self
            .v
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.r[i]
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.r.iter().zip(self.v.iter()).map(|(r, v)| (*r, hartree_to_ghz(*v)))
    }
}

fn natural_spline_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut y2 = vec![0.0; n];
    let mut u = vec![0.0; n];
    for i in 1..n - 1 {
        let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
        let p = sig * y2[i - 1] + 2.0;
        y2[i] = (sig - 1.0) / p;
        let d = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
        u[i] = (6.0 * d / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
    }
    y2[n - 1] = 0.0;
    for k in (0..n - 1).rev() {
        y2[k] = y2[k] * y2[k + 1] + u[k];
    }
    y2
}
