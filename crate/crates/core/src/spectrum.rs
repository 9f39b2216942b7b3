//! Sparse complex Fourier spectra `Σ_ν c_ν e^{iνωt}` with integer modes.
//!
//! Every spectrum handled by the recursion has finite support, so products
//! are computed by direct mode-pair accumulation.

use std::collections::BTreeMap;
use std::ops::{AddAssign, Mul};

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Spectrum {
    modes: BTreeMap<i64, Complex64>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl Spectrum {
    pub fn new() -> Self {
        Self::default()
    }

    /// The constant function `c`.
    pub fn constant(c: Complex64) -> Self {
        let mut s = Spectrum::new();
        s.add(0, c);
        s
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn get(&self, nu: i64) -> Complex64 {
        self.modes.get(&nu).copied().unwrap_or(ZERO)
    }

    pub fn set(&mut self, nu: i64, c: Complex64) {
        if c == ZERO {
            self.modes.remove(&nu);
        } else {
            self.modes.insert(nu, c);
        }
    }

    pub fn add(&mut self, nu: i64, c: Complex64) {
        if c == ZERO {
            return;
        }
        *self.modes.entry(nu).or_insert(ZERO) += c;
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.modes.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    /// Largest `|ν|` carrying a nonzero coefficient.
    pub fn max_abs_mode(&self) -> i64 {
        self.modes
            .iter()
            .filter(|(_, v)| **v != ZERO)
            .map(|(k, _)| k.abs())
            .max()
            .unwrap_or(0)
    }

    pub fn max_norm(&self) -> f64 {
        self.modes.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: Complex64) -> Spectrum {
        if c == ZERO {
            return Spectrum::new();
        }
        Spectrum {
            modes: self.modes.iter().map(|(&k, &v)| (k, v * c)).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Spectrum, c: Complex64) {
        if c == ZERO {
            return;
        }
        for (&k, &v) in &other.modes {
            self.add(k, v * c);
        }
    }

    /// Pointwise product of the represented functions (a convolution of spectra).
    pub fn convolve(&self, other: &Spectrum) -> Spectrum {
        let mut out = Spectrum::new();
        for (&k1, &v1) in &self.modes {
            for (&k2, &v2) in &other.modes {
                out.add(k1 + k2, v1 * v2);
            }
        }
        out
    }

    /// Evaluate `Σ c_ν e^{iν ω t}`.
    pub fn eval(&self, omega: f64, t: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|(&k, &v)| v * Complex64::from_polar(1.0, k as f64 * omega * t))
            .sum()
    }

    /// Time derivative of the represented function.
    pub fn derivative(&self, omega: f64) -> Spectrum {
        Spectrum {
            modes: self
                .modes
                .iter()
                .filter(|(&k, _)| k != 0)
                .map(|(&k, &v)| (k, v * Complex64::new(0.0, k as f64 * omega)))
                .collect(),
        }
    }

    /// `max_ν |c_{-ν} - conj(c_ν)|`: zero exactly when the function is real.
    pub fn reality_defect(&self) -> f64 {
        self.modes
            .iter()
            .map(|(&k, &v)| (self.get(-k) - v.conj()).norm())
            .fold(0.0, f64::max)
    }
}

impl AddAssign<&Spectrum> for Spectrum {
    fn add_assign(&mut self, rhs: &Spectrum) {
        for (&k, &v) in &rhs.modes {
            self.add(k, v);
        }
    }
}

impl Mul<&Spectrum> for &Spectrum {
    type Output = Spectrum;

    fn mul(self, rhs: &Spectrum) -> Spectrum {
        self.convolve(rhs)
    }
}
