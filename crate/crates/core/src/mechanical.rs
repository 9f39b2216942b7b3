//! Forced oscillators `ẍ + g(x) + εCẋ = εf(x, t)`.
//!
//! The series machinery works in action–angle variables only, so for these
//! systems we stop at first order: locate the unperturbed orbit with the
//! required period, then average along it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::melnikov::{melnikov_planar, uniform_grid, SampledOrbit};
use crate::ode::{henon_to_section, integrate, integrate_until, Options};
use crate::poly::Poly;
use crate::trigsys::RawConfig;

/// Integrator tolerance used for every orbit computation.
pub const ORBIT_TOL: f64 = 1e-12;
/// Samples per unperturbed period.
pub const ORBIT_SAMPLES: usize = 1024;
pub const DEFAULT_ENERGY_BRACKET: (f64, f64) = (1e-3, 1e3);

/// A forcing harmonic `e^{iσt} P(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    pub sigma: i64,
    /// Coefficients of `P` in increasing powers of `x`.
    pub coeff_x: Vec<Complex64>,
}

impl Forcing {
    pub fn eval(&self, x: f64) -> Complex64 {
        self.coeff_x.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MechanicalSystem {
    g: Poly,
    potential: Poly,
    forcing: Vec<Forcing>,
}

impl MechanicalSystem {
    /// Build from the restoring force and the forcing harmonics
    /// `(σ, coefficients in x)`. The forcing must be real: every harmonic
    /// needs its conjugate partner.
    pub fn new(g: Poly, forcing: Vec<(i64, Vec<Complex64>)>) -> Result<Self> {
        Self::with_realify(g, forcing, false)
    }

    /// Like [`MechanicalSystem::new`], optionally inserting missing conjugate harmonics.
    pub fn with_realify(g: Poly, forcing: Vec<(i64, Vec<Complex64>)>, realify: bool) -> Result<Self> {
        let mut modes: Vec<Forcing> = Vec::new();
        for (sigma, coeff_x) in forcing {
            if modes.iter().any(|m| m.sigma == sigma) {
                return Err(Error::MalformedConfig(format!("duplicate forcing harmonic sigma = {sigma}")));
            }
            modes.push(Forcing { sigma, coeff_x });
        }
        let scale = modes
            .iter()
            .flat_map(|m| m.coeff_x.iter())
            .fold(0.0f64, |s, c| s.max(c.norm()));
        let mut extra = Vec::new();
        for m in &modes {
            let partner = modes.iter().find(|o| o.sigma == -m.sigma);
            let conj: Vec<Complex64> = m.coeff_x.iter().map(|c| c.conj()).collect();
            match partner {
                Some(o) => {
                    let len = o.coeff_x.len().max(conj.len());
                    let get = |v: &[Complex64], i: usize| v.get(i).copied().unwrap_or_default();
                    if (0..len).any(|i| (get(&o.coeff_x, i) - get(&conj, i)).norm() > 1e-14 * scale.max(1.0)) {
                        return Err(Error::RealityViolation { nu: 0, sigma: m.sigma });
                    }
                }
                None if realify => extra.push(Forcing {
                    sigma: -m.sigma,
                    coeff_x: conj,
                }),
                None => return Err(Error::RealityViolation { nu: 0, sigma: m.sigma }),
            }
        }
        modes.extend(extra);
        modes.sort_by_key(|m| m.sigma);
        if g.is_zero() {
            return Err(Error::MalformedConfig("restoring force g must be nonzero".into()));
        }
        Ok(MechanicalSystem {
            potential: g.integral(),
            g,
            forcing: modes,
        })
    }

    /// Read the `[mechanical]` table of a config file.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw = RawConfig::parse(text)?;
        let realify = raw.realify();
        let table = raw
            .mechanical
            .ok_or_else(|| Error::MalformedConfig("missing [mechanical] table".into()))?;
        table.into_system(realify)
    }

    pub fn g(&self) -> &Poly {
        &self.g
    }

    pub fn forcing(&self) -> &[Forcing] {
        &self.forcing
    }

    pub fn potential(&self, x: f64) -> f64 {
        self.potential.eval(x)
    }

    pub fn energy(&self, z: &[f64; 2]) -> f64 {
        0.5 * z[1] * z[1] + self.potential(z[0])
    }

    pub fn force(&self, x: f64, t: f64) -> f64 {
        self.forcing
            .iter()
            .map(|m| (m.eval(x) * Complex64::from_polar(1.0, m.sigma as f64 * t)).re)
            .sum()
    }

    /// Unperturbed field `(y, -g(x))`.
    pub fn free_field(&self, z: &[f64; 2]) -> [f64; 2] {
        [z[1], -self.g.eval(z[0])]
    }

    /// Full field with dissipation `εC`.
    pub fn vector_field(&self, eps: f64, c: f64, t: f64, z: &[f64; 2]) -> [f64; 2] {
        [z[1], -self.g.eval(z[0]) + eps * (-c * z[1] + self.force(z[0], t))]
    }

    /// Positive turning point `a` with `V(a) = E`.
    pub fn turning_point(&self, energy: f64) -> Result<f64> {
        if energy.is_nan() || energy <= self.potential(0.0) {
            return Err(Error::NoSuchPeriod { target: f64::NAN });
        }
        let mut hi = 1.0;
        while self.potential(hi) < energy {
            hi *= 2.0;
            if hi > 1e8 {
                return Err(Error::NoSuchPeriod { target: f64::NAN });
            }
        }
        Ok(crate::trigsys::bisect(|x| self.potential(x) - energy, 0.0, hi, 200))
    }

    /// Period of the unperturbed orbit through the turning point `(a, 0)`,
    /// measured at the next downward crossing of `y = 0`.
    pub fn period_at(&self, energy: f64) -> Result<f64> {
        let a = self.turning_point(energy)?;
        let field = |_: f64, z: &[f64; 2]| self.free_field(z);
        let t_max = 1e4;
        let tr = integrate_until(field, 0.0, [a, 0.0], t_max, Options::endpoint_only(ORBIT_TOL), |_, y0, _, y1| {
            y0[1] > 0.0 && y1[1] <= 0.0
        })?;
        let n = tr.states.len();
        if n < 2 || tr.t_end() >= t_max {
            return Err(Error::NoSuchPeriod { target: f64::NAN });
        }
        let (t_old, z_old) = (tr.times[n - 2], tr.states[n - 2]);
        let (t, _) = henon_to_section(field, t_old, z_old, 0.0, ORBIT_TOL)?;
        Ok(t)
    }

    /// Unperturbed orbit whose period is `target`, with the energy searched in `bracket`.
    pub fn orbit_with_period(&self, target: f64, bracket: (f64, f64)) -> Result<MechanicalOrbit> {
        let (lo, hi) = bracket;
        if lo.is_nan() || hi.is_nan() || lo <= 0.0 || hi <= lo {
            return Err(Error::InvalidArgument(format!("energy bracket [{lo}, {hi}] must be positive and increasing")));
        }
        let energies: Vec<f64> = (0..9).map(|i| lo * (hi / lo).powf(i as f64 / 8.0)).collect();
        let periods: Vec<f64> = energies.iter().map(|&e| self.period_at(e)).collect::<Result<_>>()?;
        let (pmin, pmax) = periods
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &p| (a.min(p), b.max(p)));
        if pmax - pmin <= 1e-9 * pmax {
            if (target - pmin).abs() <= 1e-8 * target {
                return Err(Error::Hyp1Violated { omega_prime: 0.0 });
            }
            return Err(Error::NoSuchPeriod { target });
        }
        let increasing = periods.windows(2).all(|w| w[1] > w[0]);
        let decreasing = periods.windows(2).all(|w| w[1] < w[0]);
        if !increasing && !decreasing {
            return Err(Error::Hyp1Violated { omega_prime: 0.0 });
        }
        if target < pmin || target > pmax {
            return Err(Error::NoSuchPeriod { target });
        }
        let i = (0..8)
            .find(|&i| (periods[i] - target) * (periods[i + 1] - target) <= 0.0)
            .expect("target lies inside the sampled range");
        let energy = self.solve_energy(target, (energies[i], periods[i]), (energies[i + 1], periods[i + 1]))?;
        self.orbit_at(energy)
    }

    /// Illinois iteration on `T(E) - target`.
    fn solve_energy(&self, target: f64, a: (f64, f64), b: (f64, f64)) -> Result<f64> {
        let (mut ea, mut fa) = (a.0, a.1 - target);
        let (mut eb, mut fb) = (b.0, b.1 - target);
        if fa == 0.0 {
            return Ok(ea);
        }
        let mut side = 0;
        for _ in 0..200 {
            if fb.abs() <= 1e-11 * target || (eb - ea).abs() <= 1e-15 * eb.abs() {
                return Ok(eb);
            }
            let e = (ea * fb - eb * fa) / (fb - fa);
            let f = self.period_at(e)? - target;
            if f * fb < 0.0 {
                (ea, fa) = (eb, fb);
                side = 0;
            } else {
                fa *= if side == 1 { 0.5 } else { 1.0 };
                side = 1;
            }
            (eb, fb) = (e, f);
        }
        Err(Error::NoSuchPeriod { target })
    }

    /// Sample the unperturbed orbit of energy `E`, starting at its turning point.
    pub fn orbit_at(&self, energy: f64) -> Result<MechanicalOrbit> {
        let period = self.period_at(energy)?;
        let a = self.turning_point(energy)?;
        let field = |_: f64, z: &[f64; 2]| self.free_field(z);
        let tr = integrate(field, 0.0, [a, 0.0], period, Options::new(ORBIT_TOL))?;
        let h = period / ORBIT_SAMPLES as f64;
        let mut samples: Vec<[f64; 2]> = (0..ORBIT_SAMPLES)
            .map(|j| tr.at(j as f64 * h).expect("inside span"))
            .collect();
        samples.push(tr.final_state());
        let orbit = SampledOrbit { period, samples };
        orbit.check_closure()?;
        let de = 1e-4 * energy;
        let slope = (self.period_at(energy + de)? - self.period_at(energy - de)?) / (2.0 * de);
        Ok(MechanicalOrbit {
            energy,
            amplitude: a,
            period,
            period_slope: slope,
            orbit,
        })
    }
}

/// An unperturbed periodic orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanicalOrbit {
    pub energy: f64,
    /// Positive turning point, where the samples start.
    pub amplitude: f64,
    pub period: f64,
    /// `dT₀/dE`, nonzero for anisochronous systems.
    pub period_slope: f64,
    pub orbit: SampledOrbit,
}

impl MechanicalOrbit {
    /// State at time `t`, by trigonometric interpolation of the samples.
    pub fn state_at(&self, t: f64) -> [f64; 2] {
        let n = self.orbit.len();
        let w = 2.0 * PI / self.period;
        let mut out = [0.0; 2];
        for (c, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for m in 0..=n / 2 {
                let coeff: Complex64 = self.orbit.samples[..n]
                    .iter()
                    .enumerate()
                    .map(|(j, s)| s[c] * Complex64::from_polar(1.0, -2.0 * PI * (m * j) as f64 / n as f64))
                    .sum::<Complex64>()
                    / n as f64;
                let weight = if m == 0 || 2 * m == n { 1.0 } else { 2.0 };
                acc += weight * (coeff * Complex64::from_polar(1.0, m as f64 * w * t)).re;
            }
            *o = acc;
        }
        out
    }
}

/// First-order averages for the resonance `p/q`, taken over `T = 2πq`.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanicalMelnikov {
    pub p: i64,
    pub q: i64,
    pub orbit: MechanicalOrbit,
    /// `⟨y₀²⟩`.
    pub y2_mean: f64,
    /// `(σ, ⟨y₀ P_σ(x₀) e^{iσt}⟩)`.
    pub projections: Vec<(i64, Complex64)>,
    /// Bound on `|C₀|` used for degeneracy decisions.
    pub scale: f64,
}

impl MechanicalMelnikov {
    pub fn c0(&self, t0: f64) -> f64 {
        self.yf_mean(t0) / self.y2_mean
    }

    pub fn c0_derivative(&self, t0: f64, d: u32) -> f64 {
        self.projections
            .iter()
            .map(|&(s, v)| {
                let factor = Complex64::new(0.0, s as f64).powu(d);
                (v * factor * Complex64::from_polar(1.0, s as f64 * t0)).re
            })
            .sum::<f64>()
            / self.y2_mean
    }

    /// `⟨y₀ f(x₀(·), · + t₀)⟩`.
    pub fn yf_mean(&self, t0: f64) -> f64 {
        self.projections
            .iter()
            .map(|&(s, v)| (v * Complex64::from_polar(1.0, s as f64 * t0)).re)
            .sum()
    }

    /// `∂M/∂C = -⟨y₀²⟩`.
    pub fn d(&self) -> f64 {
        -self.y2_mean
    }

    /// `M(t₀, C) = -C⟨y₀²⟩ + ⟨y₀ f⟩`.
    pub fn melnikov(&self, t0: f64, c: f64) -> f64 {
        -c * self.y2_mean + self.yf_mean(t0)
    }
}

/// Resolve the orbit of period `2πq/p` and the averages along it.
pub fn mechanical_melnikov(mech: &MechanicalSystem, p: i64, q: i64, bracket: (f64, f64)) -> Result<MechanicalMelnikov> {
    if p < 1 || q < 1 || crate::trigsys::gcd(p, q) != 1 {
        return Err(Error::InvalidArgument(format!("p = {p}, q = {q} must be coprime positive integers")));
    }
    let orbit = mech.orbit_with_period(2.0 * PI * q as f64 / p as f64, bracket)?;
    if orbit.period_slope.is_nan() || orbit.period_slope.abs() <= 1e-10 * orbit.period / orbit.energy {
        return Err(Error::Hyp1Violated {
            omega_prime: orbit.period_slope,
        });
    }
    let full = orbit.orbit.repeated(p as usize);
    let n = full.len();
    let h = full.period / n as f64;
    let samples = &full.samples[..n];
    let y2_mean = samples.iter().map(|s| s[1] * s[1]).sum::<f64>() / n as f64;
    let projections: Vec<(i64, Complex64)> = mech
        .forcing()
        .iter()
        .map(|m| {
            let sum: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(j, s)| s[1] * m.eval(s[0]) * Complex64::from_polar(1.0, m.sigma as f64 * j as f64 * h))
                .sum();
            (m.sigma, sum / n as f64)
        })
        .collect();
    let bound = samples
        .iter()
        .map(|s| s[1].abs() * mech.forcing().iter().map(|m| m.eval(s[0]).norm()).sum::<f64>())
        .sum::<f64>()
        / n as f64;
    Ok(MechanicalMelnikov {
        p,
        q,
        orbit,
        y2_mean,
        projections,
        scale: bound / y2_mean,
    })
}

/// `C₀(t₀) = ⟨y₀ f⟩ / ⟨y₀²⟩` at a single phase.
pub fn mechanical_c0(mech: &MechanicalSystem, p: i64, q: i64, t0: f64) -> Result<f64> {
    mechanical_melnikov(mech, p, q, DEFAULT_ENERGY_BRACKET).map(|m| m.c0(t0))
}

/// First-order bifurcation data for a mechanical system.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanicalCurves {
    pub t0_grid: Vec<f64>,
    pub c0_values: Vec<f64>,
    pub d: f64,
    pub eps: Vec<f64>,
    pub gamma1: Vec<f64>,
    pub gamma2: Vec<f64>,
    /// Grid mean of `C₀`, which vanishes for every admissible system.
    pub c0_mean: f64,
    pub c0_max: f64,
    pub c0_min: f64,
    /// `C₀` vanishes identically at this resonance.
    pub degenerate: bool,
}

impl MechanicalCurves {
    /// Whether the zero-mean property holds to `1e-10` relative.
    pub fn zero_mean_holds(&self) -> bool {
        let scale = self.c0_values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.c0_mean.abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE) || self.degenerate
    }
}

fn refine_extremum(mm: &MechanicalMelnikov, t: f64, h: f64) -> f64 {
    let mut x = t;
    for _ in 0..60 {
        let d2 = mm.c0_derivative(x, 2);
        if d2 == 0.0 {
            break;
        }
        let next = (x - mm.c0_derivative(x, 1) / d2).clamp(t - h, t + h);
        let step = (next - x).abs();
        x = next;
        if step < 1e-15 {
            break;
        }
    }
    x
}

pub fn mechanical_curves(
    mech: &MechanicalSystem,
    p: i64,
    q: i64,
    eps_grid: &[f64],
    n_t: usize,
    bracket: (f64, f64),
) -> Result<MechanicalCurves> {
    let mm = mechanical_melnikov(mech, p, q, bracket)?;
    let t0_grid = uniform_grid(n_t);
    let c0_values: Vec<f64> = t0_grid.par_iter().map(|&t| mm.c0(t)).collect();
    let c0_mean = c0_values.iter().sum::<f64>() / n_t as f64;
    let h = 2.0 * PI / n_t as f64;
    let best = |max: bool| -> f64 {
        let sign = if max { 1.0 } else { -1.0 };
        let i = (0..n_t)
            .max_by(|&a, &b| (sign * c0_values[a]).total_cmp(&(sign * c0_values[b])))
            .expect("grid is not empty");
        let v = mm.c0(refine_extremum(&mm, t0_grid[i], h));
        if sign * v >= sign * c0_values[i] {
            v
        } else {
            c0_values[i]
        }
    };
    let (c0_max, c0_min) = (best(true), best(false));
    let degenerate = c0_max.abs().max(c0_min.abs()) <= 1e-10 * mm.scale.max(f64::MIN_POSITIVE);
    Ok(MechanicalCurves {
        eps: eps_grid.to_vec(),
        gamma1: eps_grid.iter().map(|e| e * c0_max).collect(),
        gamma2: eps_grid.iter().map(|e| e * c0_min).collect(),
        d: mm.d(),
        t0_grid,
        c0_values,
        c0_mean,
        c0_max,
        c0_min,
        degenerate,
    })
}

/// Planar Melnikov value of the damped forced system along its orbit.
pub fn planar_value(mech: &MechanicalSystem, mm: &MechanicalMelnikov, c: f64, t0: f64) -> Result<f64> {
    let orbit = mm.orbit.orbit.repeated(mm.p as usize);
    melnikov_planar(
        |z| mech.free_field(&z),
        |z, t| [0.0, -c * z[1] + mech.force(z[0], t)],
        &orbit,
        t0,
    )
}

/// A planar change of coordinates `x = h(ξ)`.
pub trait Diffeomorphism: Sync {
    fn forward(&self, xi: [f64; 2]) -> [f64; 2];
    fn inverse(&self, x: [f64; 2]) -> [f64; 2];
    /// `Dh⁻¹` at `x`, row-major.
    fn inverse_jacobian(&self, x: [f64; 2]) -> [[f64; 2]; 2];
}

/// `h(ξ) = (ξ₁, ξ₂ + ξ₁²)`, with unit Jacobian.
#[derive(Debug, Clone, Copy, Default)]
pub struct Shear;

impl Diffeomorphism for Shear {
    fn forward(&self, xi: [f64; 2]) -> [f64; 2] {
        [xi[0], xi[1] + xi[0] * xi[0]]
    }

    fn inverse(&self, x: [f64; 2]) -> [f64; 2] {
        [x[0], x[1] - x[0] * x[0]]
    }

    fn inverse_jacobian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        [[1.0, 0.0], [-2.0 * x[0], 1.0]]
    }
}

/// `h(ξ) = (s ξ₁, ξ₂)`, with constant Jacobian `s`.
#[derive(Debug, Clone, Copy)]
pub struct Stretch(pub f64);

impl Diffeomorphism for Stretch {
    fn forward(&self, xi: [f64; 2]) -> [f64; 2] {
        [self.0 * xi[0], xi[1]]
    }

    fn inverse(&self, x: [f64; 2]) -> [f64; 2] {
        [x[0] / self.0, x[1]]
    }

    fn inverse_jacobian(&self, _: [f64; 2]) -> [[f64; 2]; 2] {
        [[1.0 / self.0, 0.0], [0.0, 1.0]]
    }
}

fn apply(m: [[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Planar Melnikov value computed in the coordinates `ξ = h⁻¹(x)`.
///
/// The transformed orbit is obtained by integrating the transformed
/// unperturbed field, not by mapping the original samples.
pub fn transformed_planar_value<H: Diffeomorphism>(
    mech: &MechanicalSystem,
    mm: &MechanicalMelnikov,
    map: &H,
    c: f64,
    t0: f64,
) -> Result<f64> {
    let field = |xi: [f64; 2]| {
        let x = map.forward(xi);
        apply(map.inverse_jacobian(x), mech.free_field(&x))
    };
    let perturbation = |xi: [f64; 2], t: f64| {
        let x = map.forward(xi);
        apply(map.inverse_jacobian(x), [0.0, -c * x[1] + mech.force(x[0], t)])
    };
    let start = map.inverse(mm.orbit.orbit.samples[0]);
    let period = mm.orbit.period * mm.p as f64;
    let tr = integrate(|_, xi: &[f64; 2]| field(*xi), 0.0, start, period, Options::new(ORBIT_TOL))?;
    let n = mm.orbit.orbit.len() * mm.p as usize;
    let h = period / n as f64;
    let mut samples: Vec<[f64; 2]> = (0..n).map(|j| tr.at(j as f64 * h).expect("inside span")).collect();
    samples.push(tr.final_state());
    melnikov_planar(field, perturbation, &SampledOrbit { period, samples }, t0)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawMechanical {
    g: Vec<f64>,
    #[serde(default)]
    f_modes: Vec<RawForcing>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForcing {
    sigma: i64,
    coeff_x: Vec<f64>,
    #[serde(default)]
    coeff_x_im: Option<Vec<f64>>,
}

impl RawMechanical {
    fn into_system(self, realify: bool) -> Result<MechanicalSystem> {
        let forcing = self
            .f_modes
            .into_iter()
            .map(|m| {
                let im = m.coeff_x_im.unwrap_or_default();
                if im.len() > m.coeff_x.len() {
                    return Err(Error::MalformedConfig(format!(
                        "forcing sigma = {}: coeff_x_im longer than coeff_x",
                        m.sigma
                    )));
                }
                let coeff = m
                    .coeff_x
                    .iter()
                    .enumerate()
                    .map(|(i, &re)| Complex64::new(re, im.get(i).copied().unwrap_or(0.0)))
                    .collect();
                Ok((m.sigma, coeff))
            })
            .collect::<Result<_>>()?;
        MechanicalSystem::with_realify(Poly::new(self.g), forcing, realify)
    }
}
