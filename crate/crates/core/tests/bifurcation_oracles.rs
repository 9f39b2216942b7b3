mod common;

use std::f64::consts::PI;

use common::ctx_at;
use subharmonic::bifurcation::{extremes, DEFAULT_CONSTANT_TOL};
use subharmonic::{
    bifurcation_curves, c_surface, count_subharmonics, degeneracy_order, stationary_phases, systems, Degeneracy,
    Error, Stationary,
};

#[test]
fn sys_a_prime_upper_curve() {
    let sys = systems::sys_a_prime();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    let surf = c_surface(&sys, &ctx, 4, None).unwrap();
    let eps = [0.01, 0.05, 0.1];
    let curves = bifurcation_curves(&surf, &eps);
    for (i, &e) in eps.iter().enumerate() {
        let expected = e * (1.0 - e * e / 4.0);
        assert!((curves.gamma1[i] - expected).abs() <= 10.0 * e.powi(5), "eps {e}: {}", curves.gamma1[i]);
        assert!((curves.gamma2[i] + expected).abs() <= 10.0 * e.powi(5));
        assert!((curves.tau1[i] - 1.5 * PI).abs() < 0.1);
        assert!(curves.gamma2[i] < curves.gamma1[i]);
    }
    assert!(matches!(curves.kstar, Degeneracy::Order { k: 0, nondegenerate: true, .. }));
}

#[test]
fn sys_a_prime_stationary_phases_are_symmetric() {
    let sys = systems::sys_a_prime();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    let surf = c_surface(&sys, &ctx, 2, None).unwrap();
    for (t0, c2) in surf.t0_grid.iter().zip(&surf.rows[2]) {
        assert!((c2 - t0.sin() / 4.0).abs() < 1e-14);
    }
    assert!(surf.rows[1].iter().all(|c| c.abs() < 1e-15));
    let phases = stationary_phases(&surf, 0.1).unwrap();
    assert_eq!(phases.len(), 2);
    let (t_max, kind_max) = phases[0];
    let (t_min, kind_min) = phases[1];
    assert!((t_max - PI / 2.0).abs() < 1e-10 && kind_max == Stationary::Min, "{phases:?}");
    assert!((t_min - 1.5 * PI).abs() < 1e-10 && kind_min == Stationary::Max, "{phases:?}");
}

#[test]
fn sys_b_is_constant_through_first_order() {
    let sys = systems::sys_b();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    let surf = c_surface(&sys, &ctx, 1, None).unwrap();
    assert_eq!(degeneracy_order(&surf, DEFAULT_CONSTANT_TOL), Degeneracy::AllConstant(1));
    assert_eq!(stationary_phases(&surf, 0.1), Err(Error::AllStationary));
}

#[test]
fn sys_a_curvatures() {
    let sys = systems::sys_a();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    let surf = c_surface(&sys, &ctx, 2, None).unwrap();
    let Degeneracy::Order { k, nondegenerate, curvature_at_min, curvature_at_max } =
        degeneracy_order(&surf, DEFAULT_CONSTANT_TOL)
    else {
        panic!("sys_a depends on the phase at order zero");
    };
    assert_eq!(k, 0);
    assert!(nondegenerate);
    assert!((curvature_at_min - 1.0).abs() < 1e-12 && (curvature_at_max + 1.0).abs() < 1e-12);
    let (sup, tau, inf, _) = extremes(&surf, 0.2);
    assert!((sup - 1.0).abs() < 1e-14 && (inf + 1.0).abs() < 1e-14);
    assert!((tau - 1.5 * PI).abs() < 1e-7);
}

#[test]
fn ordering_of_the_curves_and_solution_counts() {
    let sys = systems::sys_a_prime();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    let surf = c_surface(&sys, &ctx, 4, None).unwrap();
    for eps in [0.05, -0.05] {
        let curves = bifurcation_curves(&surf, &[eps]);
        let (g1, g2) = (curves.gamma1[0], curves.gamma2[0]);
        let (lo, hi) = (g1.min(g2), g1.max(g2));
        if eps > 0.0 {
            assert!(g2 < g1);
        } else {
            assert!(g1 < g2);
        }
        let inside = count_subharmonics(&surf, eps, 0.5 * (lo + hi) + 0.3 * (hi - lo)).unwrap();
        assert_eq!(inside.count, 2);
        assert!(matches!(count_subharmonics(&surf, eps, hi + 1e-3), Err(Error::OutsideRange { .. })));
        assert!(matches!(count_subharmonics(&surf, eps, lo - 1e-3), Err(Error::OutsideRange { .. })));
    }
}

#[test]
fn sys_a_counts() {
    let sys = systems::sys_a();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    let surf = c_surface(&sys, &ctx, 2, None).unwrap();
    let zero = count_subharmonics(&surf, 0.05, 0.0).unwrap();
    assert_eq!(zero.count, 2);
    assert!(zero.roots.iter().any(|r| r.abs() < 1e-10 || (r - 2.0 * PI).abs() < 1e-10));
    assert!(zero.roots.iter().any(|r| (r - PI).abs() < 1e-10));
    let tangent = count_subharmonics(&surf, 0.05, 0.05).unwrap();
    assert_eq!(tangent.count, 1);
    assert!((tangent.roots[0] - 1.5 * PI).abs() < 1e-6);
}

#[test]
fn counts_multiply_by_q() {
    let sys = systems::sys_a3();
    let ctx = ctx_at(&sys, 1, 3, 1.0 / 3.0);
    let surf = c_surface(&sys, &ctx, 2, None).unwrap();
    let count = count_subharmonics(&surf, 0.05, 0.0).unwrap();
    assert_eq!(count.count, 6);
    assert!(count.roots.iter().all(|r| (0.0..6.0 * PI).contains(r)));
}

#[test]
fn higher_order_phases_move_continuously() {
    let sys = systems::sys_e();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    let surf = c_surface(&sys, &ctx, 4, None).unwrap();
    let kstar = degeneracy_order(&surf, DEFAULT_CONSTANT_TOL);
    let Degeneracy::Order { k, nondegenerate: true, .. } = kstar else {
        panic!("expected a nondegenerate phase dependence, got {kstar:?}");
    };
    assert!(k >= 1);
    let eps: Vec<f64> = (1..=40).map(|i| 0.005 * i as f64).collect();
    let curves = bifurcation_curves(&surf, &eps);
    let resolution = 2.0 * PI / surf.t0_grid.len() as f64;
    for w in curves.tau1.windows(2).chain(curves.tau2.windows(2)) {
        let jump = (w[1] - w[0]).abs();
        let jump = jump.min(2.0 * PI - jump);
        assert!(jump <= 10.0 * resolution, "jump {jump}");
    }
}
