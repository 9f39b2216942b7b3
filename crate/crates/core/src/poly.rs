//! Polynomials used by the spectral model: a real univariate polynomial for
//! the frequency map `A ↦ ω(A)` and sparse complex bivariate polynomials in
//! `(A, C)` for the Fourier coefficients of the perturbation.

use std::collections::BTreeMap;

use num_complex::Complex64;

/// Real polynomial with ascending coefficients `c0 + c1 x + c2 x² + ...`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree of the polynomial; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![0.0]);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &c)| j as f64 * c)
                .collect(),
        )
    }

    /// Antiderivative vanishing at zero.
    pub fn integral(&self) -> Poly {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(0.0);
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| c / (j as f64 + 1.0)),
        );
        Poly::new(out)
    }

    /// Taylor coefficients `p^{(j)}(x0) / j!` for `j = 0..=degree`.
    pub fn taylor_at(&self, x0: f64) -> Vec<f64> {
        let n = self.coeffs.len();
        (0..n)
            .map(|j| {
                (j..n)
                    .map(|a| self.coeffs[a] * binomial(a, j) * x0.powi((a - j) as i32))
                    .sum()
            })
            .collect()
    }

    pub fn shifted(&self, c: f64) -> Poly {
        let mut coeffs = self.coeffs.clone();
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        coeffs[0] += c;
        Poly::new(coeffs)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}

/// Sparse complex polynomial `Σ c_{a,b} A^a C^b`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl BiPoly {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, Complex64)>,
    {
        let mut p = BiPoly::new();
        for (a, c, v) in terms {
            p.add_term(a, c, v);
        }
        p
    }

    pub fn constant(v: Complex64) -> Self {
        Self::from_terms([(0, 0, v)])
    }

    pub fn add_term(&mut self, deg_a: u32, deg_c: u32, v: Complex64) {
        let e = self.terms.entry((deg_a, deg_c)).or_default();
        *e += v;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&(deg_a, deg_c));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, Complex64)> + '_ {
        self.terms.iter().map(|(&(a, c), &v)| (a, c, v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn deg_a(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn deg_c(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn conj(&self) -> BiPoly {
        BiPoly {
            terms: self.terms.iter().map(|(&k, v)| (k, v.conj())).collect(),
        }
    }

    pub fn eval(&self, a: f64, c: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(da, dc), &v)| v * a.powi(da as i32) * c.powi(dc as i32))
            .sum()
    }

    /// `∂_A^{r_a} ∂_C^{r_c} P / (r_a! r_c!)` evaluated at `(a, c)`.
    pub fn taylor_coeff(&self, a: f64, c: f64, r_a: u32, r_c: u32) -> Complex64 {
        self.terms
            .iter()
            .filter(|(&(da, dc), _)| da >= r_a && dc >= r_c)
            .map(|(&(da, dc), &v)| {
                v * binomial(da as usize, r_a as usize)
                    * binomial(dc as usize, r_c as usize)
                    * a.powi((da - r_a) as i32)
                    * c.powi((dc - r_c) as i32)
            })
            .sum()
    }

    /// Coefficients in `C` after substituting `A = a`: entry `j` multiplies `C^j`.
    pub fn collapse_a(&self, a: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.deg_c() as usize + 1];
        for (&(da, dc), &v) in &self.terms {
            out[dc as usize] += v * a.powi(da as i32);
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
