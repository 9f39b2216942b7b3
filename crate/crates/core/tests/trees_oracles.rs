mod common;

use common::{ctx_at, random_system};
use num_complex::Complex64;
use proptest::prelude::*;
use subharmonic::series::c_mode_series;
use subharmonic::trees::{enumerate_trees, shape_count, tree_sum, Label};
use subharmonic::{systems, BiPoly, Mode, Poly, TrigSystem};

#[test]
fn first_order_trees_by_hand() {
    let sys = systems::sys_a_prime();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    let t0 = 0.7;
    assert_eq!(tree_sum(&sys, &ctx, t0, 1, Label::Alpha, 0).unwrap(), Complex64::new(0.0, 0.0));
    let a1 = tree_sum(&sys, &ctx, t0, 1, Label::Action, 1).unwrap();
    assert!((a1 + 0.5 * Complex64::i() * Complex64::from_polar(1.0, t0)).norm() < 1e-15);

    let sys_b = systems::sys_b();
    let ctx_b = ctx_at(&sys_b, 1, 1, 1.0);
    assert!(tree_sum(&sys_b, &ctx_b, t0, 1, Label::Dissipation, 0).unwrap().norm() < 1e-15);
}

#[test]
fn undriven_system_sums_to_zero() {
    let g = vec![Mode::new(0, 0, BiPoly::from_terms([(0, 1, Complex64::new(-1.0, 0.0))]))];
    let sys = TrigSystem::new(Poly::new(vec![0.0, 1.0]), vec![], g, true).unwrap();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    for k in 1..=3 {
        for label in [Label::Alpha, Label::Action, Label::Dissipation] {
            assert_eq!(tree_sum(&sys, &ctx, 0.3, k, label, 0).unwrap(), Complex64::new(0.0, 0.0));
        }
    }
}

#[test]
fn nonlinear_frequency_is_unsupported() {
    let g = vec![Mode::new(0, 0, BiPoly::from_terms([(0, 1, Complex64::new(-1.0, 0.0))]))];
    let sys = TrigSystem::new(Poly::new(vec![0.0, 0.0, 1.0]), vec![], g, true).unwrap();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    assert!(enumerate_trees(&sys, &ctx, 1, Label::Alpha, 1).is_err());
}

#[test]
fn shape_counts_stay_below_exponential_bound() {
    let sys = systems::sys_a_prime();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    for k in 1..=3 {
        let n = shape_count(&sys, &ctx, k).unwrap();
        println!("order {k}: {n} shapes");
        assert!(n <= 4usize.pow(k as u32), "order {k}: {n} shapes");
    }
    for seed in 0..20 {
        let (sys, ctx) = random_system(seed);
        for k in 1..=3 {
            let n = shape_count(&sys, &ctx, k).unwrap();
            assert!(n <= 4usize.pow(k as u32), "seed {seed} order {k}: {n} shapes");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trees_reproduce_the_recursion(seed in 0u64..10_000, t0 in 0.0..std::f64::consts::TAU) {
        let (sys, ctx) = random_system(seed);
        let state = c_mode_series(&sys, &ctx, t0, 2).unwrap();
        let n = sys.max_abs_momentum(ctx.p, ctx.q);
        for k in 1..=2 {
            for nu in -(k as i64) * n..=(k as i64) * n {
                let alpha = tree_sum(&sys, &ctx, t0, k, Label::Alpha, nu).unwrap();
                let action = tree_sum(&sys, &ctx, t0, k, Label::Action, nu).unwrap();
                prop_assert!((alpha - state.alpha(k).get(nu)).norm() <= 1e-12 * (1.0 + alpha.norm()));
                prop_assert!((action - state.action(k).get(nu)).norm() <= 1e-12 * (1.0 + action.norm()));
            }
            let c = tree_sum(&sys, &ctx, t0, k, Label::Dissipation, 0).unwrap();
            prop_assert!((c.re - state.c(k)).abs() <= 1e-12 * (1.0 + c.norm()));
            for tree in enumerate_trees(&sys, &ctx, k, Label::Action, 0).unwrap() {
                prop_assert!(tree.node_count() <= tree.node_bound());
                prop_assert!(tree.is_valid(ctx.p, ctx.q));
            }
        }
    }
}
