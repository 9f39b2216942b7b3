//! Bifurcation curves in the `(ε, γ)` plane, `γ = εC`.
//!
//! Each coefficient `Cₖ(t₀)` is a trigonometric polynomial in the phase,
//! so sampling it on a fine enough uniform grid determines it exactly; the
//! sup and inf over `t₀` of the truncated `C(ε, t₀)` then give the two
//! curves bounding the region where subharmonic solutions exist.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::melnikov::uniform_grid;
use crate::series::c_mode_series;
use crate::trigsys::{jets_at, ResonanceContext, TrigSystem};

const TWO_PI: f64 = 2.0 * PI;

/// Smallest power of two `≥ 8 (1 + 3K max|σ₀|)`.
pub fn grid_size(order: usize, max_sigma: i64) -> usize {
    (8 * (1 + 3 * order * max_sigma.unsigned_abs() as usize)).next_power_of_two()
}

/// A trigonometric polynomial `Σ c_m e^{imt}` stored by its nonnegative
/// modes (the function is real, so `c_{-m} = conj(c_m)`).
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    modes: Vec<(i64, Complex64)>,
}

impl TrigPoly {
    fn from_samples(samples: &[f64], planner: &mut FftPlanner<f64>) -> Self {
        let n = samples.len();
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        planner.plan_fft_forward(n).process(&mut buf);
        let scale = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let floor = 1e-15 * scale;
        let modes = buf
            .iter()
            .take(n / 2)
            .enumerate()
            .map(|(m, v)| (m as i64, v / n as f64))
            .filter(|(m, v)| *m == 0 || v.norm() > floor)
            .collect();
        TrigPoly { modes }
    }

    fn combine(parts: &[(f64, &TrigPoly)]) -> TrigPoly {
        let mut acc: std::collections::BTreeMap<i64, Complex64> = std::collections::BTreeMap::new();
        for (w, p) in parts {
            for &(m, v) in &p.modes {
                *acc.entry(m).or_default() += v * *w;
            }
        }
        TrigPoly {
            modes: acc.into_iter().collect(),
        }
    }

    /// `d`-th derivative at `t`.
    pub fn eval_derivative(&self, t: f64, d: u32) -> f64 {
        self.modes
            .iter()
            .map(|&(m, v)| {
                let factor = Complex64::new(0.0, m as f64).powu(d);
                let term = (v * factor * Complex64::from_polar(1.0, m as f64 * t)).re;
                if m == 0 {
                    term
                } else {
                    2.0 * term
                }
            })
            .sum()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_derivative(t, 0)
    }

    pub fn mean(&self) -> f64 {
        self.modes.iter().find(|(m, _)| *m == 0).map_or(0.0, |(_, v)| v.re)
    }

    /// Largest magnitude among the nonconstant modes.
    pub fn oscillation(&self) -> f64 {
        self.modes
            .iter()
            .filter(|(m, _)| *m != 0)
            .map(|(_, v)| 2.0 * v.norm())
            .fold(0.0, f64::max)
    }

    pub fn degree(&self) -> i64 {
        self.modes.iter().map(|(m, _)| *m).max().unwrap_or(0)
    }
}

/// `Cₖ(t₀)` for `k ≤ K` on a uniform phase grid.
#[derive(Debug, Clone)]
pub struct CSurface {
    pub ctx: ResonanceContext,
    pub t0_grid: Vec<f64>,
    /// `rows[k][i] = Cₖ(t0_grid[i])`.
    pub rows: Vec<Vec<f64>>,
    interpolants: Vec<TrigPoly>,
    /// Largest jet magnitude, the natural scale of the coefficients.
    pub jet_scale: f64,
    /// Largest mismatch between the interpolants and direct series
    /// evaluations at off-grid phases.
    pub interpolation_residual: f64,
}

pub fn c_surface(sys: &TrigSystem, ctx: &ResonanceContext, order: usize, n_t: Option<usize>) -> Result<CSurface> {
    let n = n_t.unwrap_or_else(|| grid_size(order, sys.max_abs_sigma()));
    let t0_grid = uniform_grid(n);
    let columns: Vec<Vec<f64>> = t0_grid
        .par_iter()
        .map(|&t0| c_mode_series(sys, ctx, t0, order).map(|s| s.c_coeffs().to_vec()))
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = (0..=order).map(|k| columns.iter().map(|c| c[k]).collect()).collect();
    let mut surface = CSurface::from_rows(*ctx, rows);
    let c0 = surface.rows[0][0];
    surface.jet_scale = jets_at(sys, ctx, c0, order.max(1)).scale();

    let h = TWO_PI / n as f64;
    let control: Vec<f64> = [0.5, 0.25 * n as f64 + 0.37, 0.5 * n as f64 + 0.5, 0.75 * n as f64 + 0.81]
        .iter()
        .map(|&x| x * h)
        .collect();
    let mut residual = 0.0f64;
    for t0 in control {
        let direct = c_mode_series(sys, ctx, t0, order)?;
        for (k, interp) in surface.interpolants.iter().enumerate() {
            residual = residual.max((interp.eval(t0) - direct.c(k)).abs());
        }
    }
    surface.interpolation_residual = residual;
    Ok(surface)
}

impl CSurface {
    /// Build a surface directly from sampled rows on a uniform grid.
    pub fn from_rows(ctx: ResonanceContext, rows: Vec<Vec<f64>>) -> Self {
        let n = rows.first().map_or(0, Vec::len);
        let mut planner = FftPlanner::new();
        let interpolants = rows.iter().map(|r| TrigPoly::from_samples(r, &mut planner)).collect();
        CSurface {
            ctx,
            t0_grid: uniform_grid(n),
            rows,
            interpolants,
            jet_scale: 1.0,
            interpolation_residual: 0.0,
        }
    }

    /// Highest order stored.
    pub fn order(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn interpolant(&self, k: usize) -> &TrigPoly {
        &self.interpolants[k]
    }

    /// `C(ε, ·) = Σ εᵏ Cₖ` as a single trigonometric polynomial.
    pub fn truncated(&self, eps: f64) -> TrigPoly {
        let parts: Vec<(f64, &TrigPoly)> = self
            .interpolants
            .iter()
            .enumerate()
            .map(|(k, p)| (eps.powi(k as i32), p))
            .collect();
        TrigPoly::combine(&parts)
    }

    fn grid_values(&self, eps: f64) -> Vec<f64> {
        (0..self.t0_grid.len())
            .map(|i| self.rows.iter().rev().fold(0.0, |acc, r| acc * eps + r[i]))
            .collect()
    }

    fn scale(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .fold(self.jet_scale, |m, x| m.max(x.abs()))
    }
}

/// Newton on `f'` started at grid point `i`, kept inside the neighbouring cells.
fn refine_extremum(f: &TrigPoly, grid: &[f64], i: usize) -> f64 {
    let h = TWO_PI / grid.len() as f64;
    let (lo, hi) = (grid[i] - h, grid[i] + h);
    let mut x = grid[i];
    for _ in 0..60 {
        let d1 = f.eval_derivative(x, 1);
        let d2 = f.eval_derivative(x, 2);
        if d2 == 0.0 || !d2.is_finite() {
            break;
        }
        let next = (x - d1 / d2).clamp(lo, hi);
        let step = (next - x).abs();
        x = next;
        if step < 1e-15 {
            break;
        }
    }
    x
}

fn extremum(f: &TrigPoly, grid: &[f64], values: &[f64], max: bool) -> (f64, f64) {
    let sign = if max { 1.0 } else { -1.0 };
    let i = (0..values.len())
        .max_by(|&a, &b| (sign * values[a]).total_cmp(&(sign * values[b])))
        .expect("grid is not empty");
    let x = refine_extremum(f, grid, i);
    let v = f.eval(x);
    if sign * v >= sign * values[i] {
        (v, x.rem_euclid(TWO_PI))
    } else {
        (values[i], grid[i])
    }
}

/// Sampled bifurcation curves.
#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationCurves {
    pub eps: Vec<f64>,
    /// `ε sup_{t₀} C(ε, t₀)`.
    pub gamma1: Vec<f64>,
    /// `ε inf_{t₀} C(ε, t₀)`.
    pub gamma2: Vec<f64>,
    /// Phase attaining the sup.
    pub tau1: Vec<f64>,
    /// Phase attaining the inf.
    pub tau2: Vec<f64>,
    pub kstar: Degeneracy,
}

/// `(sup, argsup, inf, arginf)` of `C(ε, ·)`.
pub fn extremes(surf: &CSurface, eps: f64) -> (f64, f64, f64, f64) {
    let f = surf.truncated(eps);
    let values = surf.grid_values(eps);
    let (sup, tau_sup) = extremum(&f, &surf.t0_grid, &values, true);
    let (inf, tau_inf) = extremum(&f, &surf.t0_grid, &values, false);
    (sup, tau_sup, inf, tau_inf)
}

pub fn bifurcation_curves(surf: &CSurface, eps_grid: &[f64]) -> BifurcationCurves {
    let rows: Vec<(f64, f64, f64, f64)> = eps_grid.par_iter().map(|&eps| extremes(surf, eps)).collect();
    BifurcationCurves {
        eps: eps_grid.to_vec(),
        gamma1: rows.iter().zip(eps_grid).map(|(r, e)| e * r.0).collect(),
        gamma2: rows.iter().zip(eps_grid).map(|(r, e)| e * r.2).collect(),
        tau1: rows.iter().map(|r| r.1).collect(),
        tau2: rows.iter().map(|r| r.3).collect(),
        kstar: degeneracy_order(surf, DEFAULT_CONSTANT_TOL),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stationary {
    Min,
    Max,
    SaddleFlat,
}

impl Stationary {
    pub fn name(&self) -> &'static str {
        match self {
            Stationary::Min => "min",
            Stationary::Max => "max",
            Stationary::SaddleFlat => "saddle-flat",
        }
    }
}

/// Roots of `f` on `[0, 2π)`: sign changes on a fine grid polished by
/// bisection and Newton, plus touching zeros where `|f|` has a local minimum
/// below `touch_tol`.
fn periodic_roots(f: &TrigPoly, d: u32, n: usize, touch_tol: f64) -> Vec<f64> {
    let h = TWO_PI / n as f64;
    let g = |t: f64| f.eval_derivative(t, d);
    let values: Vec<f64> = (0..=n).map(|i| g(i as f64 * h)).collect();
    let mut roots = Vec::new();
    for i in 0..n {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == 0.0 {
            roots.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            let mut x = crate::trigsys::bisect(g, a, b, 200);
            for _ in 0..3 {
                let slope = f.eval_derivative(x, d + 1);
                if slope == 0.0 {
                    break;
                }
                let next = x - g(x) / slope;
                if !(a..=b).contains(&next) {
                    break;
                }
                x = next;
            }
            roots.push(x);
        }
    }
    for i in 0..n {
        let prev = values[(i + n - 1) % n].abs();
        let (cur, next) = (values[i].abs(), values[i + 1].abs());
        if cur <= prev && cur <= next && values[(i + n - 1) % n].signum() == values[i + 1].signum() {
            // Local minimum of |g| without a sign change: polish on g'.
            let mut x = i as f64 * h;
            for _ in 0..60 {
                let s1 = f.eval_derivative(x, d + 1);
                let s2 = f.eval_derivative(x, d + 2);
                if s2 == 0.0 {
                    break;
                }
                let nx = (x - s1 / s2).clamp(x - h, x + h);
                if (nx - x).abs() < 1e-15 {
                    x = nx;
                    break;
                }
                x = nx;
            }
            if g(x).abs() <= touch_tol {
                roots.push(x.rem_euclid(TWO_PI));
            }
        }
    }
    dedupe_periodic(roots, 1e-6)
}

fn dedupe_periodic(mut roots: Vec<f64>, tol: f64) -> Vec<f64> {
    for r in roots.iter_mut() {
        *r = r.rem_euclid(TWO_PI);
        if TWO_PI - *r < tol {
            *r = 0.0;
        }
    }
    roots.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        if out.last().is_none_or(|&l| r - l > tol) {
            out.push(r);
        }
    }
    if out.len() > 1 && out[0] + TWO_PI - out[out.len() - 1] <= tol {
        out.pop();
    }
    out
}

/// Zeros of `∂C(ε, t₀)/∂t₀`, classified by the sign of the second derivative.
pub fn stationary_phases(surf: &CSurface, eps: f64) -> Result<Vec<(f64, Stationary)>> {
    let f = surf.truncated(eps);
    let scale = surf.scale();
    if f.oscillation() <= 1e-12 * scale {
        return Err(Error::AllStationary);
    }
    let n = 8 * surf.t0_grid.len().max(64);
    let tol = 1e-8 * f.oscillation().max(1e-300) * (f.degree().max(1) as f64);
    Ok(periodic_roots(&f, 1, n, tol)
        .into_iter()
        .map(|t| {
            let c2 = f.eval_derivative(t, 2);
            let class = if c2 > tol {
                Stationary::Min
            } else if c2 < -tol {
                Stationary::Max
            } else {
                Stationary::SaddleFlat
            };
            (t, class)
        })
        .collect())
}

pub const DEFAULT_CONSTANT_TOL: f64 = 1e-9;

/// First order whose coefficient depends on the phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Degeneracy {
    Order {
        k: usize,
        /// Whether `Cₖ''` is nonzero at both the max and the min of `Cₖ`.
        nondegenerate: bool,
        curvature_at_min: f64,
        curvature_at_max: f64,
    },
    AllConstant(usize),
}

impl Degeneracy {
    pub fn order(&self) -> Option<usize> {
        match self {
            Degeneracy::Order { k, .. } => Some(*k),
            Degeneracy::AllConstant(_) => None,
        }
    }
}

pub fn degeneracy_order(surf: &CSurface, tol_rel: f64) -> Degeneracy {
    for (k, row) in surf.rows.iter().enumerate() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        let scale_k = row
            .iter()
            .fold(surf.jet_scale * (k + 1) as f64, |m, x| m.max(x.abs()));
        if max - min > tol_rel * scale_k {
            let f = &surf.interpolants[k];
            let (_, tau_max) = extremum(f, &surf.t0_grid, row, true);
            let (_, tau_min) = extremum(f, &surf.t0_grid, row, false);
            let curvature_at_max = f.eval_derivative(tau_max, 2);
            let curvature_at_min = f.eval_derivative(tau_min, 2);
            let tol = 1e-8 * scale_k;
            return Degeneracy::Order {
                k,
                nondegenerate: curvature_at_max.abs() > tol && curvature_at_min.abs() > tol,
                curvature_at_min,
                curvature_at_max,
            };
        }
    }
    Degeneracy::AllConstant(surf.order())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubharmonicCount {
    pub count: usize,
    /// Phases `t₀ ∈ [0, 2πq)` with `εC(ε, t₀) = γ`.
    pub roots: Vec<f64>,
}

/// Count the solutions of `εC(ε, t₀) = γ` over `q` forcing periods.
pub fn count_subharmonics(surf: &CSurface, eps: f64, gamma: f64) -> Result<SubharmonicCount> {
    if surf.ctx.p != 1 {
        return Err(Error::CountingNeedsUnitP { p: surf.ctx.p });
    }
    let (sup, _, inf, _) = extremes(surf, eps);
    let (lo, hi) = {
        let (a, b) = (eps * sup, eps * inf);
        (a.min(b), a.max(b))
    };
    let scale = surf.scale() * eps.abs();
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    if gamma < lo - tol || gamma > hi + tol {
        return Err(Error::OutsideRange { gamma, lo, hi });
    }
    let mut h = surf.truncated(eps);
    for p in h.modes.iter_mut() {
        p.1 *= eps;
    }
    if let Some(m0) = h.modes.iter_mut().find(|(m, _)| *m == 0) {
        m0.1 -= gamma;
    }
    if h.oscillation() <= 1e-12 * scale {
        return Err(Error::AllStationary);
    }
    let n = 8 * surf.t0_grid.len().max(64);
    let base = periodic_roots(&h, 0, n, 1e-10 * scale);
    let q = surf.ctx.q as usize;
    let roots: Vec<f64> = (0..q)
        .flat_map(|j| base.iter().map(move |r| r + TWO_PI * j as f64))
        .collect();
    Ok(SubharmonicCount {
        count: roots.len(),
        roots,
    })
}
