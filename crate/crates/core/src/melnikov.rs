//! The subharmonic Melnikov function and its root curve `C₀(t₀)`.
//!
//! Along the resonant orbit `α₀(t) = (p/q) t` only the modes with
//! `ν₀p + σ₀q = 0` survive the average over one period, so
//!
//! ```text
//! M(t₀, C) = Σ_{ν₀p + σ₀q = 0} e^{iσ₀t₀} G_{ν₀σ₀}(A₀, C)
//! ```
//!
//! is a trigonometric polynomial in `t₀` and an ordinary polynomial in `C`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::series::{SeriesMode, SeriesState};
use crate::trigsys::{jets_at, Component, ResonanceContext, TrigSystem};

/// Relative threshold below which `∂M/∂C` counts as zero.
pub const HYP2_TOL: f64 = 1e-10;

fn resonant_sum(sys: &TrigSystem, ctx: &ResonanceContext, t0: f64, f: impl Fn(&crate::trigsys::Mode) -> Complex64) -> Complex64 {
    sys.g_modes()
        .iter()
        .filter(|m| m.is_resonant(ctx.p, ctx.q))
        .map(|m| Complex64::from_polar(1.0, m.sigma as f64 * t0) * f(m))
        .sum()
}

pub fn melnikov_value(sys: &TrigSystem, ctx: &ResonanceContext, t0: f64, c: f64) -> f64 {
    resonant_sum(sys, ctx, t0, |m| m.coeff.eval(ctx.a0, c)).re
}

/// `∂M/∂t₀`.
pub fn melnikov_dt0(sys: &TrigSystem, ctx: &ResonanceContext, t0: f64, c: f64) -> f64 {
    resonant_sum(sys, ctx, t0, |m| Complex64::new(0.0, m.sigma as f64) * m.coeff.eval(ctx.a0, c)).re
}

/// `∂M/∂C`.
pub fn melnikov_dc(sys: &TrigSystem, ctx: &ResonanceContext, t0: f64, c: f64) -> f64 {
    resonant_sum(sys, ctx, t0, |m| m.coeff.taylor_coeff(ctx.a0, c, 0, 1)).re
}

/// `C ↦ M(t₀, C)` as a real polynomial.
pub fn melnikov_in_c(sys: &TrigSystem, ctx: &ResonanceContext, t0: f64) -> Poly {
    let mut coeffs: Vec<Complex64> = Vec::new();
    for m in sys.g_modes().iter().filter(|m| m.is_resonant(ctx.p, ctx.q)) {
        let phase = Complex64::from_polar(1.0, m.sigma as f64 * t0);
        let col = m.coeff.collapse_a(ctx.a0);
        if coeffs.len() < col.len() {
            coeffs.resize(col.len(), Complex64::default());
        }
        for (acc, v) in coeffs.iter_mut().zip(col) {
            *acc += phase * v;
        }
    }
    Poly::new(coeffs.into_iter().map(|v| v.re).collect())
}

/// The defining time average of `G` along the unperturbed resonant orbit,
/// computed by the trapezoid rule with `n` nodes per period.
pub fn melnikov_quadrature(sys: &TrigSystem, ctx: &ResonanceContext, t0: f64, c: f64, n: usize) -> f64 {
    let h = ctx.period / n as f64;
    (0..n)
        .map(|j| {
            let t = j as f64 * h;
            sys.eval_g(ctx.omega_a0 * t, ctx.a0, c, t + t0).re
        })
        .sum::<f64>()
        / n as f64
}

/// `⟨∂₁G(α₀(·), A₀, C, · + t₀)⟩` by quadrature.
pub fn mean_dalpha_g(sys: &TrigSystem, ctx: &ResonanceContext, t0: f64, c: f64, n: usize) -> f64 {
    let h = ctx.period / n as f64;
    (0..n)
        .map(|j| {
            let t = j as f64 * h;
            sys.eval_dalpha(Component::G, ctx.omega_a0 * t, ctx.a0, c, t + t0).re
        })
        .sum::<f64>()
        / n as f64
}

/// Solve `M(t₀, C₀) = 0`, returning `(C₀, D)` with `D = ∂M/∂C(t₀, C₀)`.
pub fn solve_c0(sys: &TrigSystem, ctx: &ResonanceContext, t0: f64) -> Result<(f64, f64)> {
    let m = melnikov_in_c(sys, ctx, t0);
    let dm = m.derivative();
    let scale = sys.coefficient_scale().max(f64::MIN_POSITIVE);
    if dm.coeffs().iter().all(|c| c.abs() <= HYP2_TOL * scale) {
        return Err(Error::Hyp2ViolatedDegenerate { t0, d: dm.eval(0.0) });
    }
    let root = newton_from_zero(&m, &dm, scale)
        .or_else(|| bracket_root(&m, &dm))
        .ok_or(Error::Hyp2ViolatedNoRoot { t0 })?;
    let d = dm.eval(root);
    if d.abs() < HYP2_TOL * scale {
        return Err(Error::Hyp2ViolatedDegenerate { t0, d });
    }
    Ok((root, d))
}

fn newton_from_zero(m: &Poly, dm: &Poly, scale: f64) -> Option<f64> {
    let mut c = 0.0;
    for _ in 0..60 {
        let d = dm.eval(c);
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let step = m.eval(c) / d;
        c -= step;
        if !c.is_finite() || c.abs() > 1e6 {
            return None;
        }
        if step.abs() <= 1e-15 * c.abs().max(1.0) {
            break;
        }
    }
    let tol = 1e-12 * scale.max(m.coeffs()[0].abs());
    (m.eval(c).abs() <= tol).then_some(c)
}

fn bracket_root(m: &Poly, dm: &Poly) -> Option<f64> {
    let samples = 256;
    for j in 0..=10 {
        let half = 10.0 * f64::powi(2.0, j);
        let xs: Vec<f64> = (0..=samples)
            .map(|i| -half + 2.0 * half * i as f64 / samples as f64)
            .collect();
        // Prefer the sign change closest to C = 0.
        let best = xs
            .windows(2)
            .filter(|w| m.eval(w[0]).signum() != m.eval(w[1]).signum() || m.eval(w[0]) == 0.0)
            .min_by(|a, b| {
                let da = a[0].abs().min(a[1].abs());
                let db = b[0].abs().min(b[1].abs());
                da.total_cmp(&db)
            });
        if let Some(w) = best {
            let mut c = crate::trigsys::bisect(|x| m.eval(x), w[0], w[1], 200);
            for _ in 0..5 {
                let d = dm.eval(c);
                if d == 0.0 {
                    break;
                }
                let next = c - m.eval(c) / d;
                if !(w[0]..=w[1]).contains(&next) {
                    break;
                }
                c = next;
            }
            return Some(c);
        }
    }
    None
}

/// `C₀` and `D` sampled on a uniform `t₀` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MelnikovCurve {
    pub t0_grid: Vec<f64>,
    pub c0_values: Vec<f64>,
    pub d_values: Vec<f64>,
    /// Largest `|σ₀|` among the resonant modes: the Fourier degree of
    /// `C₀(t₀)` whenever `D` does not depend on `t₀`.
    pub trig_degree: i64,
}

pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect()
}

pub fn melnikov_curve(sys: &TrigSystem, ctx: &ResonanceContext, n: usize) -> Result<MelnikovCurve> {
    let t0_grid = uniform_grid(n);
    let pairs: Vec<(f64, f64)> = t0_grid
        .par_iter()
        .map(|&t0| solve_c0(sys, ctx, t0))
        .collect::<Result<_>>()?;
    let trig_degree = sys
        .g_modes()
        .iter()
        .filter(|m| m.is_resonant(ctx.p, ctx.q))
        .map(|m| m.sigma.abs())
        .max()
        .unwrap_or(0);
    Ok(MelnikovCurve {
        t0_grid,
        c0_values: pairs.iter().map(|p| p.0).collect(),
        d_values: pairs.iter().map(|p| p.1).collect(),
        trig_degree,
    })
}

/// One non-vanishing level of the fixed-`C` obstruction hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyLevel {
    pub k: usize,
    pub t0_grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// Walk the obstructions `M₀, M₁, …` of the fixed-`C` problem and return the
/// first one that does not vanish identically on the grid.
pub fn melnikov_hierarchy(
    sys: &TrigSystem,
    ctx: &ResonanceContext,
    c_fixed: f64,
    k_max: usize,
    t0_grid: &[f64],
) -> Result<HierarchyLevel> {
    let jet_scale = jets_at(sys, ctx, c_fixed, k_max.max(1)).scale();
    let tol = 1e-10 * jet_scale.max(f64::MIN_POSITIVE);
    let rows: Vec<Vec<f64>> = t0_grid
        .par_iter()
        .map(|&t0| {
            let mut state = SeriesState::for_hierarchy(sys, ctx, t0, c_fixed);
            let mut out = vec![state.obstruction()];
            for _ in 0..k_max {
                state.compute_order()?;
                out.push(state.obstruction());
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    for k in 0..=k_max {
        let values: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        if values.iter().any(|v| v.abs() > tol) {
            return Ok(HierarchyLevel {
                k,
                t0_grid: t0_grid.to_vec(),
                values,
            });
        }
    }
    Err(Error::HierarchyExhausted { k: k_max })
}

/// The average `(1/T) ∫₀ᵀ (f₁g₂ - f₂g₁) dt` along a sampled periodic orbit.
///
/// `field` is the unperturbed vector field and `perturbation(x, t)` the
/// perturbing one, evaluated at `t + t₀`.
pub fn melnikov_planar<Fu, Pe>(field: Fu, perturbation: Pe, orbit: &SampledOrbit, t0: f64) -> Result<f64>
where
    Fu: Fn([f64; 2]) -> [f64; 2],
    Pe: Fn([f64; 2], f64) -> [f64; 2],
{
    orbit.check_closure()?;
    let n = orbit.len();
    let h = orbit.period / n as f64;
    let sum: f64 = (0..n)
        .map(|j| {
            let x = orbit.samples[j];
            let f = field(x);
            let g = perturbation(x, j as f64 * h + t0);
            f[0] * g[1] - f[1] * g[0]
        })
        .sum();
    Ok(sum / n as f64)
}

/// A periodic orbit sampled at `N + 1` equally spaced times covering one
/// full period, so that the last sample repeats the first.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledOrbit {
    pub period: f64,
    pub samples: Vec<[f64; 2]>,
}

impl SampledOrbit {
    /// Number of distinct samples per period.
    pub fn len(&self) -> usize {
        self.samples.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn closure_defect(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt(),
            _ => f64::INFINITY,
        }
    }

    pub fn check_closure(&self) -> Result<()> {
        let scale = self
            .samples
            .iter()
            .map(|s| s[0].abs().max(s[1].abs()))
            .fold(1.0, f64::max);
        let defect = self.closure_defect();
        if self.len() < 2 || defect.is_nan() || defect > 1e-8 * scale {
            return Err(Error::BadOrbit { defect });
        }
        Ok(())
    }

    /// The same orbit run `times` times in a row.
    pub fn repeated(&self, times: usize) -> SampledOrbit {
        let n = self.len();
        let mut samples = Vec::with_capacity(n * times + 1);
        for _ in 0..times {
            samples.extend_from_slice(&self.samples[..n]);
        }
        samples.push(self.samples[0]);
        SampledOrbit {
            period: self.period * times as f64,
            samples,
        }
    }
}

/// Start a C-mode series state, solving for `C₀(t₀)` first.
pub fn c_mode_state(sys: &TrigSystem, ctx: &ResonanceContext, t0: f64) -> Result<SeriesState> {
    SeriesState::new(sys, ctx, t0, SeriesMode::CMode)
}
