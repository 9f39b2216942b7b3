//! The exact spectral model of a perturbed action–angle system
//!
//! ```text
//! α' = ω(A) + ε F(α, A, C, t)
//! A' = ε G(α, A, C, t)
//! ```
//!
//! with `F` and `G` finite Fourier sums `Σ e^{i(ν₀α + σ₀t)} P_{ν₀σ₀}(A, C)`
//! whose coefficients are polynomials in the action `A` and the dissipation
//! parameter `C`. Because every ingredient is a polynomial or a finite
//! trigonometric sum, all derivatives needed by the perturbation series are
//! exact.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::poly::{BiPoly, Poly};

/// One Fourier mode `e^{i(ν₀α + σ₀t)} P(A, C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub nu: i64,
    pub sigma: i64,
    pub coeff: BiPoly,
}

impl Mode {
    pub fn new(nu: i64, sigma: i64, coeff: BiPoly) -> Self {
        Mode { nu, sigma, coeff }
    }

    /// Momentum `ν₀p + σ₀q` of the mode along the resonant orbit.
    pub fn momentum(&self, p: i64, q: i64) -> i64 {
        self.nu * p + self.sigma * q
    }

    pub fn is_resonant(&self, p: i64, q: i64) -> bool {
        self.momentum(p, q) == 0
    }
}

/// Which perturbation component a mode table belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    F,
    G,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigSystem {
    omega: Poly,
    f_modes: Vec<Mode>,
    g_modes: Vec<Mode>,
}

impl TrigSystem {
    /// Build a system, completing conjugate modes when `realify` is set.
    pub fn new(omega: Poly, f_modes: Vec<Mode>, g_modes: Vec<Mode>, realify: bool) -> Result<Self> {
        Ok(TrigSystem {
            omega,
            f_modes: normalize_modes(f_modes, realify)?,
            g_modes: normalize_modes(g_modes, realify)?,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::MalformedConfig(e.message().to_string()))?;
        raw.into_trig_system()?
            .ok_or_else(|| Error::MalformedConfig("missing [system] table".into()))
    }

    pub fn omega(&self) -> &Poly {
        &self.omega
    }

    pub fn modes(&self, which: Component) -> &[Mode] {
        match which {
            Component::F => &self.f_modes,
            Component::G => &self.g_modes,
        }
    }

    pub fn f_modes(&self) -> &[Mode] {
        &self.f_modes
    }

    pub fn g_modes(&self) -> &[Mode] {
        &self.g_modes
    }

    /// Largest `|σ₀|` over both mode tables.
    pub fn max_abs_sigma(&self) -> i64 {
        self.f_modes
            .iter()
            .chain(&self.g_modes)
            .map(|m| m.sigma.abs())
            .max()
            .unwrap_or(0)
    }

    /// Largest `|ν₀p + σ₀q|` over both mode tables.
    pub fn max_abs_momentum(&self, p: i64, q: i64) -> i64 {
        self.f_modes
            .iter()
            .chain(&self.g_modes)
            .map(|m| m.momentum(p, q).abs())
            .max()
            .unwrap_or(0)
    }

    fn eval_modes(modes: &[Mode], alpha: f64, a: f64, c: f64, t: f64) -> Complex64 {
        modes
            .iter()
            .map(|m| {
                Complex64::from_polar(1.0, m.nu as f64 * alpha + m.sigma as f64 * t)
                    * m.coeff.eval(a, c)
            })
            .sum()
    }

    /// `F(α, A, C, t)` as a complex number; its imaginary part is rounding noise.
    pub fn eval_f(&self, alpha: f64, a: f64, c: f64, t: f64) -> Complex64 {
        Self::eval_modes(&self.f_modes, alpha, a, c, t)
    }

    pub fn eval_g(&self, alpha: f64, a: f64, c: f64, t: f64) -> Complex64 {
        Self::eval_modes(&self.g_modes, alpha, a, c, t)
    }

    /// `∂F/∂α` and `∂G/∂α`, used by quadrature checks.
    pub fn eval_dalpha(&self, which: Component, alpha: f64, a: f64, c: f64, t: f64) -> Complex64 {
        self.modes(which)
            .iter()
            .map(|m| {
                Complex64::new(0.0, m.nu as f64)
                    * Complex64::from_polar(1.0, m.nu as f64 * alpha + m.sigma as f64 * t)
                    * m.coeff.eval(a, c)
            })
            .sum()
    }

    /// Right-hand side of the full equations of motion at `(α, A)`.
    pub fn vector_field(&self, eps: f64, c: f64, t: f64, alpha: f64, a: f64) -> [f64; 2] {
        [
            self.omega.eval(a) + eps * self.eval_f(alpha, a, c, t).re,
            eps * self.eval_g(alpha, a, c, t).re,
        ]
    }

    /// Largest coefficient magnitude over all modes; the natural unit for
    /// relative tolerances.
    pub fn coefficient_scale(&self) -> f64 {
        self.f_modes
            .iter()
            .chain(&self.g_modes)
            .map(|m| m.coeff.max_abs_coeff())
            .fold(0.0, f64::max)
    }
}

fn normalize_modes(modes: Vec<Mode>, realify: bool) -> Result<Vec<Mode>> {
    let mut table: BTreeMap<(i64, i64), BiPoly> = BTreeMap::new();
    for m in modes {
        if table.insert((m.nu, m.sigma), m.coeff).is_some() {
            return Err(Error::MalformedConfig(format!(
                "duplicate mode ({}, {})",
                m.nu, m.sigma
            )));
        }
    }
    let keys: Vec<(i64, i64)> = table.keys().copied().collect();
    for (nu, sigma) in keys {
        let conj = table[&(nu, sigma)].conj();
        match table.get(&(-nu, -sigma)) {
            Some(partner) => {
                let scale = conj.max_abs_coeff().max(partner.max_abs_coeff()).max(1.0);
                let mut diff = partner.clone();
                for (a, c, v) in conj.terms() {
                    diff.add_term(a, c, -v);
                }
                if diff.max_abs_coeff() > 1e-14 * scale {
                    return Err(Error::RealityViolation { nu, sigma });
                }
            }
            None if realify => {
                table.insert((-nu, -sigma), conj);
            }
            None => return Err(Error::RealityViolation { nu, sigma }),
        }
    }
    Ok(table
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|((nu, sigma), coeff)| Mode { nu, sigma, coeff })
        .collect())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawConfig {
    #[serde(default)]
    realify: Option<bool>,
    #[serde(default)]
    system: Option<RawSystem>,
    #[serde(default, rename = "F")]
    f: Option<RawModeTable>,
    #[serde(default, rename = "G")]
    g: Option<RawModeTable>,
    #[serde(default)]
    pub(crate) mechanical: Option<crate::mechanical::RawMechanical>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    omega: Vec<f64>,
    #[serde(default)]
    realify: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModeTable {
    #[serde(default)]
    modes: Vec<RawMode>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMode {
    nu: i64,
    sigma: i64,
    coeff: Vec<Vec<f64>>,
}

impl RawConfig {
    pub(crate) fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::MalformedConfig(e.message().to_string()))
    }

    pub(crate) fn realify(&self) -> bool {
        self.system
            .as_ref()
            .and_then(|s| s.realify)
            .or(self.realify)
            .unwrap_or(true)
    }

    pub(crate) fn into_trig_system(self) -> Result<Option<TrigSystem>> {
        let realify = self.realify();
        let Some(system) = self.system else {
            if self.f.is_some() || self.g.is_some() {
                return Err(Error::MalformedConfig(
                    "mode tables given without a [system] table".into(),
                ));
            }
            return Ok(None);
        };
        if system.omega.is_empty() {
            return Err(Error::MalformedConfig("omega must have at least one coefficient".into()));
        }
        let convert = |table: Option<RawModeTable>| -> Result<Vec<Mode>> {
            table
                .map(|t| t.modes)
                .unwrap_or_default()
                .into_iter()
                .map(RawMode::into_mode)
                .collect()
        };
        let f = convert(self.f)?;
        let g = convert(self.g)?;
        TrigSystem::new(Poly::new(system.omega), f, g, realify).map(Some)
    }
}

impl RawMode {
    fn into_mode(self) -> Result<Mode> {
        let mut coeff = BiPoly::new();
        for entry in &self.coeff {
            let [da, dc, re, im] = entry.as_slice() else {
                return Err(Error::MalformedConfig(format!(
                    "mode ({}, {}): coefficient entries must be [degA, degC, re, im]",
                    self.nu, self.sigma
                )));
            };
            let degree = |x: f64| -> Result<u32> {
                if x >= 0.0 && x.fract() == 0.0 && x <= 64.0 {
                    Ok(x as u32)
                } else {
                    Err(Error::MalformedConfig(format!("invalid polynomial degree {x}")))
                }
            };
            coeff.add_term(degree(*da)?, degree(*dc)?, Complex64::new(*re, *im));
        }
        Ok(Mode::new(self.nu, self.sigma, coeff))
    }
}

/// A resolved resonance `ω(A₀) = p/q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceContext {
    pub p: i64,
    pub q: i64,
    pub a0: f64,
    /// Period `T = 2πq` of the subharmonic orbit.
    pub period: f64,
    /// Base frequency `2π/T = 1/q` of the Fourier expansion.
    pub omega_small: f64,
    /// `ω(A₀)`, equal to `p/q` up to rounding.
    pub omega_a0: f64,
    pub omega_prime: f64,
}

/// How to locate the resonant action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResonanceSearch {
    Bracket(f64, f64),
    Root(f64),
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

const HYP1_TOL: f64 = 1e-10;

pub fn resonance_context(
    sys: &TrigSystem,
    p: i64,
    q: i64,
    search: ResonanceSearch,
) -> Result<ResonanceContext> {
    if q < 1 {
        return Err(Error::InvalidArgument(format!("q must be positive, got {q}")));
    }
    if gcd(p, q) != 1 {
        return Err(Error::InvalidArgument(format!("p = {p} and q = {q} are not coprime")));
    }
    let target = p as f64 / q as f64;
    let residual = sys.omega().shifted(-target);
    let slope = sys.omega().derivative();
    if residual.is_zero() || slope.is_zero() {
        return Err(Error::Hyp1Violated { omega_prime: 0.0 });
    }
    let a0 = match search {
        ResonanceSearch::Root(a0) => polish_root(&residual, &slope, a0, None),
        ResonanceSearch::Bracket(lo, hi) => {
            let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
            let (flo, fhi) = (residual.eval(lo), residual.eval(hi));
            if flo == 0.0 {
                lo
            } else if fhi == 0.0 {
                hi
            } else if flo.signum() == fhi.signum() {
                return Err(Error::NoResonance { lo, hi });
            } else {
                let root = bisect(|x| residual.eval(x), lo, hi, 200);
                polish_root(&residual, &slope, root, Some((lo, hi)))
            }
        }
    };
    let omega_prime = slope.eval(a0);
    if omega_prime.abs() < HYP1_TOL {
        return Err(Error::Hyp1Violated { omega_prime });
    }
    let omega_a0 = sys.omega().eval(a0);
    let tol = 1e-12 * target.abs().max(1.0);
    if (omega_a0 - target).abs() > tol {
        return Err(Error::NoResonance { lo: a0, hi: a0 });
    }
    Ok(ResonanceContext {
        p,
        q,
        a0,
        period: 2.0 * std::f64::consts::PI * q as f64,
        omega_small: 1.0 / q as f64,
        omega_a0,
        omega_prime,
    })
}

/// Scan `[0, span]` and then `[-span, 0]` for the first sign change of
/// `ω(A) - p/q`, returning a bracket around it.
pub fn find_resonance_bracket(sys: &TrigSystem, p: i64, q: i64, span: f64) -> Option<(f64, f64)> {
    let target = p as f64 / q as f64;
    let n = 4000;
    let f = |x: f64| sys.omega().eval(x) - target;
    for (from, to) in [(0.0, span), (0.0, -span)] {
        let mut prev_x: f64 = from;
        let mut prev = f(prev_x);
        for i in 1..=n {
            let x = from + (to - from) * i as f64 / n as f64;
            let fx = f(x);
            if prev == 0.0 || prev.signum() != fx.signum() {
                return Some((prev_x.min(x), prev_x.max(x)));
            }
            prev_x = x;
            prev = fx;
        }
    }
    None
}

pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let mut flo = f(lo);
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn polish_root(f: &Poly, df: &Poly, mut x: f64, bracket: Option<(f64, f64)>) -> f64 {
    for _ in 0..50 {
        let d = df.eval(x);
        if d == 0.0 {
            break;
        }
        let step = f.eval(x) / d;
        let next = x - step;
        if let Some((lo, hi)) = bracket {
            if !(lo..=hi).contains(&next) {
                break;
            }
        }
        if next == x {
            break;
        }
        x = next;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Taylor data of one mode at the expansion point.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeJets {
    pub nu: i64,
    pub sigma: i64,
    /// `jets[r2][r3] = ∂_A^{r2} ∂_C^{r3} P(A₀, C₀) / (r2! r3!)`, zero-padded.
    jets: Vec<Vec<Complex64>>,
}

impl ModeJets {
    pub fn get(&self, r2: usize, r3: usize) -> Complex64 {
        self.jets
            .get(r2)
            .and_then(|row| row.get(r3))
            .copied()
            .unwrap_or_default()
    }
}

/// Normalised Taylor coefficients of every mode polynomial at `(A₀, C₀)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetTable {
    pub a0: f64,
    pub c0: f64,
    pub kmax: usize,
    f: Vec<ModeJets>,
    g: Vec<ModeJets>,
}

impl JetTable {
    pub fn modes(&self, which: Component) -> &[ModeJets] {
        match which {
            Component::F => &self.f,
            Component::G => &self.g,
        }
    }

    pub fn get(&self, which: Component, nu: i64, sigma: i64, r2: usize, r3: usize) -> Complex64 {
        self.modes(which)
            .iter()
            .find(|m| m.nu == nu && m.sigma == sigma)
            .map(|m| m.get(r2, r3))
            .unwrap_or_default()
    }

    /// Largest jet magnitude, used to scale "identically zero" tests.
    pub fn scale(&self) -> f64 {
        self.f
            .iter()
            .chain(&self.g)
            .flat_map(|m| m.jets.iter().flatten())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

pub fn jets_at(sys: &TrigSystem, ctx: &ResonanceContext, c0: f64, kmax: usize) -> JetTable {
    let build = |modes: &[Mode]| -> Vec<ModeJets> {
        modes
            .iter()
            .map(|m| {
                let jets = (0..=kmax)
                    .map(|r2| {
                        (0..=kmax - r2)
                            .map(|r3| m.coeff.taylor_coeff(ctx.a0, c0, r2 as u32, r3 as u32))
                            .collect()
                    })
                    .collect();
                ModeJets {
                    nu: m.nu,
                    sigma: m.sigma,
                    jets,
                }
            })
            .collect()
    };
    JetTable {
        a0: ctx.a0,
        c0,
        kmax: kmax.max(1),
        f: build(sys.f_modes()),
        g: build(sys.g_modes()),
    }
}
