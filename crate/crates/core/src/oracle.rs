//! Direct numerical check of the series predictions: Newton shooting on
//! the period map of the full system.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mechanical::{MechanicalOrbit, MechanicalSystem};
use crate::melnikov::uniform_grid;
use crate::ode::flow;
use crate::series::c_mode_series;
use crate::trigsys::{ResonanceContext, TrigSystem};

pub const SHOOT_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 25;
pub const INTEGRATOR_TOL: f64 = 1e-12;
pub const DEFAULT_SEEDS: usize = 16;
pub const BISECTION_STEPS: usize = 50;

type Field<'a> = Box<dyn Fn(f64, &[f64; 2]) -> [f64; 2] + Send + Sync + 'a>;

/// A planar non-autonomous system together with the return condition
/// `Φ_T(z) = z + shift`.
pub struct PlanarProblem<'a> {
    field: Field<'a>,
    pub period: f64,
    pub shift: [f64; 2],
}

impl<'a> PlanarProblem<'a> {
    pub fn new<F>(field: F, period: f64, shift: [f64; 2]) -> Self
    where
        F: Fn(f64, &[f64; 2]) -> [f64; 2] + Send + Sync + 'a,
    {
        PlanarProblem {
            field: Box::new(field),
            period,
            shift,
        }
    }

    /// `(α, A)` form with dissipation `C`; the angle advances by `2πp`.
    pub fn action_angle(sys: &'a TrigSystem, ctx: &ResonanceContext, eps: f64, c: f64) -> Self {
        Self::new(
            move |t, z| sys.vector_field(eps, c, t, z[0], z[1]),
            ctx.period,
            [2.0 * PI * ctx.p as f64, 0.0],
        )
    }

    /// `(x, ẋ)` form with dissipation `C` and period `2πq`.
    pub fn mechanical(mech: &'a MechanicalSystem, eps: f64, c: f64, q: i64) -> Self {
        Self::new(move |t, z| mech.vector_field(eps, c, t, z), 2.0 * PI * q as f64, [0.0, 0.0])
    }

    pub fn field(&self, t: f64, z: &[f64; 2]) -> [f64; 2] {
        (self.field)(t, z)
    }

    /// `Φ_T(z) - z - shift`.
    pub fn defect_vector(&self, z: [f64; 2]) -> Result<[f64; 2]> {
        let end = flow(|t, y: &[f64; 2]| (self.field)(t, y), 0.0, z, self.period, INTEGRATOR_TOL)?;
        Ok([end[0] - z[0] - self.shift[0], end[1] - z[1] - self.shift[1]])
    }
}

/// A converged periodic orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicOrbit {
    pub initial: [f64; 2],
    pub period: f64,
    pub defect: f64,
    pub iterations: usize,
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Newton iteration on `z ↦ Φ_T(z) - z - shift` from `guess`.
///
/// The Jacobian uses central differences and is inverted through its
/// pseudo-inverse, so a neutral direction (a whole torus of solutions) does
/// not stall the iteration.
pub fn shoot_periodic(problem: &PlanarProblem<'_>, guess: [f64; 2]) -> Result<PeriodicOrbit> {
    let mut z = guess;
    let mut r = problem
        .defect_vector(z)
        .map_err(|_| Error::NoConvergence {
            iterations: 0,
            defect: f64::INFINITY,
        })?;
    let mut history = vec![norm(r)];
    for it in 0..=MAX_ITERATIONS {
        let defect = norm(r);
        if defect <= SHOOT_TOL {
            return Ok(PeriodicOrbit {
                initial: z,
                period: problem.period,
                defect,
                iterations: it,
            });
        }
        let stalled = it >= 4 && defect > 0.9 * history[it - 2];
        if it == MAX_ITERATIONS || stalled || defect > 1e3 * history[0].max(1.0) {
            return Err(Error::NoConvergence { iterations: it, defect });
        }
        let fail = |_| Error::NoConvergence { iterations: it, defect };
        let mut jac = Matrix2::zeros();
        for j in 0..2 {
            let h = 1e-6 * z[j].abs().max(1.0);
            let (mut zp, mut zm) = (z, z);
            zp[j] += h;
            zm[j] -= h;
            let (rp, rm) = (problem.defect_vector(zp).map_err(fail)?, problem.defect_vector(zm).map_err(fail)?);
            for i in 0..2 {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let svd = jac.svd(true, true);
        let cutoff = 1e-10 * svd.singular_values.max();
        let step = svd
            .solve(&Vector2::new(-r[0], -r[1]), cutoff)
            .map_err(|_| Error::NoConvergence { iterations: it, defect })?;
        z = [z[0] + step[0], z[1] + step[1]];
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::NoConvergence { iterations: it, defect });
        }
        r = problem.defect_vector(z).map_err(fail)?;
        history.push(norm(r));
    }
    unreachable!("loop returns on its last iteration")
}

/// First seed from which shooting converges, tried in parallel.
pub fn shoot_from_seeds(problem: &PlanarProblem<'_>, seeds: &[[f64; 2]]) -> Result<PeriodicOrbit> {
    seeds
        .par_iter()
        .find_map_first(|&s| shoot_periodic(problem, s).ok())
        .ok_or(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            defect: f64::INFINITY,
        })
}

/// Initial conditions of the `C`-mode series at `n` equally spaced phases,
/// truncated at `order`. Phases where the series cannot be built are skipped.
pub fn series_seeds(sys: &TrigSystem, ctx: &ResonanceContext, eps: f64, order: usize, n: usize) -> Vec<[f64; 2]> {
    uniform_grid(n)
        .par_iter()
        .filter_map(|&t0| c_mode_series(sys, ctx, t0, order).ok())
        .map(|s| s.initial_condition(eps))
        .collect()
}

/// Points of an unperturbed orbit at time `-t₀` for `n` equally spaced phases.
pub fn orbit_seeds(orbit: &MechanicalOrbit, n: usize) -> Vec<[f64; 2]> {
    uniform_grid(n)
        .iter()
        .map(|t0| orbit.state_at((-t0).rem_euclid(orbit.period)))
        .collect()
}

/// Empirical existence interval `(C_max, C_min)` in `bracket`.
///
/// `exists(C)` is the shooting predicate. The thresholds are located by
/// bisection; since non-convergence only suggests non-existence, the result
/// is a one-sided certificate.
pub fn empirical_curve<P>(exists: P, bracket: (f64, f64)) -> Result<(f64, f64)>
where
    P: Fn(f64) -> bool + Sync,
{
    let (lo, hi) = bracket;
    let probes: Vec<f64> = (0..=8).map(|i| lo + (hi - lo) * i as f64 / 8.0).collect();
    let mut inside = probes
        .par_iter()
        .filter(|&&c| exists(c))
        .copied()
        .collect::<Vec<_>>();
    inside.sort_by(|a, b| (a - 0.5 * (lo + hi)).abs().total_cmp(&(b - 0.5 * (lo + hi)).abs()));
    let Some(&start) = inside.first() else {
        return Err(Error::NoExistenceAnywhere);
    };
    let edge = |outer: f64| -> f64 {
        if exists(outer) {
            return outer;
        }
        let (mut good, mut bad) = (start, outer);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (good + bad);
            if exists(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let (upper, lower) = rayon::join(|| edge(hi), || edge(lo));
    Ok((upper, lower))
}

/// Shooting predicate for an action–angle system, seeded from the series.
pub fn action_angle_exists(sys: &TrigSystem, ctx: &ResonanceContext, eps: f64, c: f64, seeds: &[[f64; 2]]) -> bool {
    shoot_from_seeds(&PlanarProblem::action_angle(sys, ctx, eps, c), seeds).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;
    use crate::trigsys::{resonance_context, ResonanceSearch};

    #[test]
    fn sys_a_inside_and_outside() {
        let sys = systems::sys_a();
        let ctx = resonance_context(&sys, 1, 1, ResonanceSearch::Root(1.0)).unwrap();
        let t0 = (-0.3f64).asin();
        let guess = c_mode_series(&sys, &ctx, t0, 2).unwrap().initial_condition(0.05);
        let orbit = shoot_periodic(&PlanarProblem::action_angle(&sys, &ctx, 0.05, 0.3), guess).unwrap();
        assert!(orbit.defect <= SHOOT_TOL);
        assert!((orbit.initial[1] - 1.0).abs() < 1e-9);

        let seeds = series_seeds(&sys, &ctx, 0.05, 2, DEFAULT_SEEDS);
        assert_eq!(seeds.len(), DEFAULT_SEEDS);
        let far = shoot_from_seeds(&PlanarProblem::action_angle(&sys, &ctx, 0.05, 1.5), &seeds);
        assert!(matches!(far, Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn harmonic_free_orbit() {
        let p = PlanarProblem::new(|_, z| [z[1], -z[0]], 2.0 * PI, [0.0, 0.0]);
        let o = shoot_periodic(&p, [0.7, 0.1]).unwrap();
        assert_eq!(o.iterations, 0);
    }

    #[test]
    fn empirical_interval_of_step_predicate() {
        let (hi, lo) = empirical_curve(|c| c.abs() <= 1.0, (-3.0, 3.0)).unwrap();
        assert!((hi - 1.0).abs() < 1e-12 && (lo + 1.0).abs() < 1e-12);
        assert_eq!(empirical_curve(|_| false, (-1.0, 1.0)), Err(Error::NoExistenceAnywhere));
    }
}
