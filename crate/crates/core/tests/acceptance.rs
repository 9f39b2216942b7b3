//! Acceptance suite: one line per criterion, nonzero exit status if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::{ctx_at, log_grid, log_log_slope, random_system};
use subharmonic::bifurcation::{bifurcation_curves, c_surface, count_subharmonics};
use subharmonic::mechanical::{
    mechanical_curves, mechanical_melnikov, planar_value, transformed_planar_value, Shear, DEFAULT_ENERGY_BRACKET,
};
use subharmonic::melnikov::{mean_dalpha_g, melnikov_dt0, melnikov_hierarchy, uniform_grid};
use subharmonic::oracle::{
    action_angle_exists, empirical_curve, orbit_seeds, series_seeds, shoot_periodic, PlanarProblem, DEFAULT_SEEDS,
};
use subharmonic::trees::{enumerate_trees, momentum_range, tree_sum};
use subharmonic::{c_mode_series, systems, Error, Label, ResonanceContext, TrigSystem};

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let sys = systems::sys_a();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    let surf = c_surface(&sys, &ctx, 6, None).map_err(|e| e.to_string())?;
    let higher = surf.rows[1..].iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let c0_err = surf
        .rows[0]
        .iter()
        .zip(&surf.t0_grid)
        .fold(0.0f64, |m, (c, t)| m.max((c + t.sin()).abs()));
    let eps = log_grid(1e-3, 1e-1, 25);
    let curves = bifurcation_curves(&surf, &eps);
    let gamma_err = eps.iter().enumerate().fold(0.0f64, |m, (i, e)| {
        m.max((curves.gamma1[i] - e).abs()).max((curves.gamma2[i] + e).abs())
    });
    let elapsed = start.elapsed().as_secs_f64();
    check(
        higher <= 1e-12 && c0_err <= 1e-12 && gamma_err <= 1e-12 && elapsed < 5.0,
        format!("max|C_k>0| = {higher:.2e}, C0 error {c0_err:.2e}, gamma error {gamma_err:.2e}, {elapsed:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let sys = systems::sys_a_prime();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    let surf = c_surface(&sys, &ctx, 2, None).map_err(|e| e.to_string())?;
    let row_err = surf
        .rows[2]
        .iter()
        .zip(&surf.t0_grid)
        .fold(0.0f64, |m, (c, t)| m.max((c - t.sin() / 4.0).abs()));
    let mut tree_err = 0.0f64;
    for &t0 in &surf.t0_grid {
        let s = tree_sum(&sys, &ctx, t0, 2, Label::Dissipation, 0).map_err(|e| e.to_string())?;
        tree_err = tree_err.max((s.re - t0.sin() / 4.0).abs()).max(s.im.abs());
    }
    check(
        row_err <= 1e-12 && tree_err <= 1e-10,
        format!("{} phases, C2 row error {row_err:.2e}, tree sum error {tree_err:.2e}", surf.t0_grid.len()),
    )
}

/// Largest scaled mismatch between recursion and tree sums for `k ≤ 2`.
fn tree_mismatch(sys: &TrigSystem, ctx: &ResonanceContext, t0: f64) -> Result<(f64, usize), Error> {
    let state = c_mode_series(sys, ctx, t0, 2)?;
    let mut worst = 0.0f64;
    let mut compared = 0;
    for k in 1..=2 {
        for nu in momentum_range(sys, ctx, k) {
            for label in [Label::Alpha, Label::Action, Label::Dissipation] {
                let series = match label {
                    Label::Alpha => state.alpha(k).get(nu),
                    Label::Action => state.action(k).get(nu),
                    Label::Dissipation if nu == 0 => state.c(k).into(),
                    Label::Dissipation => 0.0.into(),
                };
                let trees = tree_sum(sys, ctx, t0, k, label, nu)?;
                let scale = series.norm().max(1.0);
                worst = worst.max((series - trees).norm() / scale);
                compared += 1;
            }
        }
    }
    Ok((worst, compared))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut systems_under_test = vec![
        ("SYS-A'".to_string(), {
            let s = systems::sys_a_prime();
            let c = ctx_at(&s, 1, 1, 1.0);
            (s, c)
        }),
        ("SYS-B".to_string(), {
            let s = systems::sys_b();
            let c = ctx_at(&s, 1, 1, 1.0);
            (s, c)
        }),
    ];
    for seed in 1..=5u64 {
        systems_under_test.push((format!("random #{seed}"), random_system(seed)));
    }
    let mut worst = 0.0f64;
    let mut compared = 0;
    for (_, (sys, ctx)) in &systems_under_test {
        for t0 in [0.3, 2.1, 4.4] {
            let (w, n) = tree_mismatch(sys, ctx, t0).map_err(|e| e.to_string())?;
            worst = worst.max(w);
            compared += n;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-10 && elapsed < 60.0,
        format!("{} systems, {compared} coefficients, max mismatch {worst:.2e}, {elapsed:.1} s", systems_under_test.len()),
    )
}

fn criterion_4() -> Outcome {
    let sys = systems::sys_a_prime();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    let state = c_mode_series(&sys, &ctx, 0.7, 4).map_err(|e| e.to_string())?;
    let eps = log_grid(1e-3, 1e-2, 8);
    let res: Vec<f64> = eps.iter().map(|&e| state.residual(e, 64)).collect();
    let slope = log_log_slope(&eps, &res);
    check((slope - 5.0).abs() <= 0.2, format!("slope {slope:.4} over 8 points"))
}

fn criterion_5() -> Outcome {
    let sys = systems::sys_a();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    let eps = 0.05;
    let guess = c_mode_series(&sys, &ctx, (-0.3f64).asin(), 2)
        .map_err(|e| e.to_string())?
        .initial_condition(eps);
    let inside = shoot_periodic(&PlanarProblem::action_angle(&sys, &ctx, eps, 0.3), guess);
    let seeds = series_seeds(&sys, &ctx, eps, 2, DEFAULT_SEEDS);
    let outside = seeds
        .iter()
        .all(|&s| matches!(shoot_periodic(&PlanarProblem::action_angle(&sys, &ctx, eps, 1.5), s), Err(Error::NoConvergence { .. })));
    let (hi, lo) = empirical_curve(|c| action_angle_exists(&sys, &ctx, eps, c, &seeds), (-3.0, 3.0))
        .map_err(|e| e.to_string())?;
    let defect = inside.as_ref().map(|o| o.defect).unwrap_or(f64::INFINITY);
    check(
        defect <= 1e-10 && outside && (hi - 1.0).abs() <= 1e-6 && (lo + 1.0).abs() <= 1e-6,
        format!("C=0.3 defect {defect:.2e}, C=1.5 rejected from all seeds: {outside}, thresholds ({hi:.9}, {lo:.9})"),
    )
}

fn criterion_6() -> Outcome {
    let eps = 0.05;
    let mut counts = Vec::new();
    for (sys, q, a0) in [(systems::sys_a(), 1, 1.0), (systems::sys_a3(), 3, 1.0 / 3.0)] {
        let ctx = ctx_at(&sys, 1, q, a0);
        let surf = c_surface(&sys, &ctx, 2, None).map_err(|e| e.to_string())?;
        let g1 = bifurcation_curves(&surf, &[eps]).gamma1[0];
        let zero = count_subharmonics(&surf, eps, 0.0).map_err(|e| e.to_string())?.count;
        let boundary = count_subharmonics(&surf, eps, g1).map_err(|e| e.to_string())?.count;
        counts.push((q, zero, boundary));
    }
    let ok = counts.iter().all(|&(q, z, b)| z as i64 == 2 * q && b as i64 == q);
    check(ok, format!("(q, count at 0, count at gamma1) = {counts:?}"))
}

fn criterion_7() -> Outcome {
    let mech = systems::cubic_oscillator();
    let eps = [0.01, 0.05, 0.1];
    let curves = mechanical_curves(&mech, 1, 1, &eps, 64, DEFAULT_ENERGY_BRACKET).map_err(|e| e.to_string())?;
    let scale = curves.c0_values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rel_mean = curves.c0_mean.abs() / scale;
    let signs = curves.gamma1.iter().all(|&g| g >= 0.0) && curves.gamma2.iter().all(|&g| g <= 0.0);
    check(
        rel_mean <= 1e-10 && signs && !curves.degenerate,
        format!("relative mean {rel_mean:.2e}, max C0 {:.6}, min C0 {:.6}", curves.c0_max, curves.c0_min),
    )
}

fn criterion_8() -> Outcome {
    let sys = systems::sys_a_prime();
    let ctx = ctx_at(&sys, 1, 1, 1.0);
    let worst = uniform_grid(64).iter().fold(0.0f64, |m, &t0| {
        let lhs = ctx.omega_a0 * mean_dalpha_g(&sys, &ctx, t0, 0.3, 256);
        let rhs = -melnikov_dt0(&sys, &ctx, t0, 0.3);
        m.max((lhs - rhs).abs())
    });
    check(worst <= 1e-10, format!("max mismatch {worst:.2e} over 64 phases"))
}

fn criterion_9() -> Outcome {
    let mech = systems::cubic_oscillator();
    let mm = mechanical_melnikov(&mech, 1, 1, DEFAULT_ENERGY_BRACKET).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (c, t0) in [(0.0, 0.0), (0.2, 0.7), (-0.4, 2.9), (0.1, 5.0)] {
        let base = planar_value(&mech, &mm, c, t0).map_err(|e| e.to_string())?;
        let sheared = transformed_planar_value(&mech, &mm, &Shear, c, t0).map_err(|e| e.to_string())?;
        worst = worst.max((base - sheared).abs());
    }
    check(worst <= 1e-8, format!("max mismatch {worst:.2e} over 4 (C, t0) pairs"))
}

fn criterion_10() -> Outcome {
    let mut cases = vec![
        {
            let s = systems::sys_a_prime();
            let c = ctx_at(&s, 1, 1, 1.0);
            (s, c)
        },
        {
            let s = systems::sys_b();
            let c = ctx_at(&s, 1, 1, 1.0);
            (s, c)
        },
    ];
    cases.push(random_system(1));
    let (mut total, mut violations, mut beyond_2k) = (0usize, 0usize, 0usize);
    let mut example = String::new();
    for (sys, ctx) in &cases {
        for k in 1..=3 {
            for label in [Label::Alpha, Label::Action, Label::Dissipation] {
                for nu in momentum_range(sys, ctx, k) {
                    for tree in enumerate_trees(sys, ctx, k, label, nu).map_err(|e| e.to_string())? {
                        total += 1;
                        if tree.node_count() > tree.node_bound() {
                            violations += 1;
                        }
                        if tree.node_count() > 2 * k {
                            beyond_2k += 1;
                            if example.is_empty() {
                                example = format!("k={k}, root {}, {} nodes", label.name(), tree.node_count());
                            }
                        }
                    }
                }
            }
        }
    }
    check(
        violations == 0 && total > 0,
        format!(
            "{total} trees, {violations} exceed 3k-2/3k-1; {beyond_2k} exceed the stated 2k bound{}",
            if example.is_empty() { String::new() } else { format!(" (e.g. {example})") }
        ),
    )
}

fn criterion_11() -> Outcome {
    let d = systems::sys_d().map_err(|e| e.to_string())?;
    let seeds = orbit_seeds(&d.orbit, 8);
    let mut worst = 0.0f64;
    let mut converged = 0;
    for eps in [0.01, 0.1] {
        let problem = d.problem(eps);
        for &s in &seeds {
            if let Ok(o) = shoot_periodic(&problem, s) {
                converged += 1;
                worst = worst.max(o.defect);
            }
        }
    }
    let torus = systems::persistent_torus();
    let ctx = ctx_at(&torus, 1, 1, 1.0);
    let hierarchy = melnikov_hierarchy(&torus, &ctx, 0.0, 4, &uniform_grid(32));
    let exhausted = matches!(hierarchy, Err(Error::HierarchyExhausted { k: 4 }));
    check(
        converged == 16 && worst <= 1e-9 && exhausted,
        format!("{converged}/16 shots converged, max defect {worst:.2e}, hierarchy exhausted through K=4: {exhausted}"),
    )
}

type Criterion = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Criterion); 11] = [
        ("SYS-A exactness", criterion_1),
        ("SYS-A' second order", criterion_2),
        ("tree-oracle equivalence", criterion_3),
        ("residual scaling", criterion_4),
        ("oracle agreement", criterion_5),
        ("subharmonic counting", criterion_6),
        ("mechanical zero mean and signs", criterion_7),
        ("phase-derivative identity", criterion_8),
        ("coordinate invariance", criterion_9),
        ("tree node bounds", criterion_10),
        ("torus persistence", criterion_11),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("{} {}", i + 1, name);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  criterion {label}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {label}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
