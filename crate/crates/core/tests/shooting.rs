mod common;

use std::f64::consts::PI;

use common::ctx_at;
use subharmonic::bifurcation::extremes;
use subharmonic::mechanical::{mechanical_melnikov, DEFAULT_ENERGY_BRACKET};
use subharmonic::oracle::{
    action_angle_exists, orbit_seeds, series_seeds, shoot_from_seeds, DEFAULT_SEEDS, SHOOT_TOL,
};
use subharmonic::{c_surface, empirical_curve, shoot_periodic, systems, PlanarProblem};

#[test]
fn empirical_thresholds_track_the_series() {
    let eps = 0.05;
    for (sys, p, q, a0) in [(systems::sys_a_prime(), 1, 1, 1.0), (systems::sys_a3(), 1, 3, 1.0 / 3.0)] {
        let ctx = ctx_at(&sys, p, q, a0);
        let seeds = series_seeds(&sys, &ctx, eps, 2, DEFAULT_SEEDS);
        let (upper, lower) =
            empirical_curve(|c| action_angle_exists(&sys, &ctx, eps, c, &seeds), (-2.0, 2.0)).unwrap();
        let surf = c_surface(&sys, &ctx, 2, None).unwrap();
        let (sup, _, inf, _) = extremes(&surf, eps);
        assert!((upper - sup).abs() <= 3.0 * eps * eps, "q = {q}: {upper} vs {sup}");
        assert!((lower - inf).abs() <= 3.0 * eps * eps, "q = {q}: {lower} vs {inf}");
    }
}

#[test]
fn series_seeds_converge_inside_and_fail_outside() {
    let sys = systems::sys_a_prime();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    let eps = 0.02;
    let surf = c_surface(&sys, &ctx, 2, None).unwrap();
    let (sup, _, inf, _) = extremes(&surf, eps);
    let seeds = series_seeds(&sys, &ctx, eps, 2, DEFAULT_SEEDS);
    for c in [0.9 * sup, 0.0, 0.9 * inf] {
        let orbit = shoot_from_seeds(&PlanarProblem::action_angle(&sys, &ctx, eps, c), &seeds).unwrap();
        assert!(orbit.defect <= SHOOT_TOL);
        assert!((orbit.initial[1] - 1.0).abs() < 10.0 * eps);
    }
    for c in [1.1 * sup, 1.1 * inf] {
        assert!(!action_angle_exists(&sys, &ctx, eps, c, &seeds));
    }
}

#[test]
fn shooting_from_the_series_is_accurate_to_the_truncation() {
    let sys = systems::sys_a_prime();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    let eps = 0.01;
    let t0 = 2.0;
    let state = subharmonic::c_mode_series(&sys, &ctx, t0, 3).unwrap();
    let guess = state.initial_condition(eps);
    let orbit = shoot_periodic(&PlanarProblem::action_angle(&sys, &ctx, eps, state.c_total(eps)), guess).unwrap();
    let gap = (orbit.initial[0] - guess[0]).abs() + (orbit.initial[1] - guess[1]).abs();
    // one-parameter family: the shot may slide along it, but only by O(ε)
    assert!(gap < 10.0 * eps, "gap {gap}");
}

#[test]
fn persistent_orbit_is_found_from_every_phase() {
    let sys = systems::sys_d().unwrap();
    assert!((sys.orbit.period - 2.0 * PI).abs() < 1e-10);
    let problem = sys.problem(0.1);
    for seed in orbit_seeds(&sys.orbit, 8) {
        let orbit = shoot_periodic(&problem, seed).unwrap();
        assert!(orbit.defect <= SHOOT_TOL);
    }
}

#[test]
fn forced_cubic_oscillator_has_subharmonics_inside_the_curve() {
    let mech = systems::cubic_oscillator();
    let mm = mechanical_melnikov(&mech, 1, 1, DEFAULT_ENERGY_BRACKET).unwrap();
    let grid = subharmonic::melnikov::uniform_grid(64);
    let c_max = grid.iter().map(|&t| mm.c0(t)).fold(f64::NEG_INFINITY, f64::max);
    let eps = 0.01;
    let seeds = orbit_seeds(&mm.orbit, DEFAULT_SEEDS);
    let orbit = shoot_from_seeds(&PlanarProblem::mechanical(&mech, eps, 0.5 * c_max, 1), &seeds).unwrap();
    assert!(orbit.defect <= SHOOT_TOL);
    assert!(shoot_from_seeds(&PlanarProblem::mechanical(&mech, eps, 2.0 * c_max, 1), &seeds).is_err());
}
