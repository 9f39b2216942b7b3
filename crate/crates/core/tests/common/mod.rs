#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subharmonic::{resonance_context, BiPoly, Mode, Poly, ResonanceContext, ResonanceSearch, TrigSystem};

pub fn ctx_at(sys: &TrigSystem, p: i64, q: i64, a0: f64) -> ResonanceContext {
    resonance_context(sys, p, q, ResonanceSearch::Root(a0)).expect("resonance")
}

fn random_poly(rng: &mut ChaCha8Rng, max_deg_c: u32, real: bool) -> BiPoly {
    let mut out = BiPoly::new();
    for da in 0..=2u32 {
        for dc in 0..=max_deg_c.min(2 - da) {
            if rng.random_bool(0.6) {
                let re = rng.random_range(-1.0..1.0);
                let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
                out.add_term(da, dc, Complex64::new(re, im));
            }
        }
    }
    if out.is_zero() {
        out.add_term(0, 0, Complex64::new(0.5, 0.0));
    }
    out
}

/// A random real system resonant at `ω(A₀) = 1` with `ω` linear, at most
/// four independent modes of degree at most two, and `∂M/∂C = -1`.
pub fn random_system(seed: u64) -> (TrigSystem, ResonanceContext) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c1 = rng.random_range(0.5..2.0);
    let c0 = rng.random_range(-0.5..0.5);
    let mut used: Vec<(i64, i64)> = vec![(0, 0)];
    let mut damping = random_poly(&mut rng, 0, true);
    damping.add_term(0, 1, Complex64::new(-1.0, 0.0));
    let mut g = vec![Mode::new(0, 0, damping)];
    let nu = rng.random_range(1..=2i64);
    used.push((nu, -nu));
    g.push(Mode::new(nu, -nu, random_poly(&mut rng, 0, false)));
    let mut f = Vec::new();
    let extra = rng.random_range(1..=2);
    while used.len() < 2 + extra {
        let pair = (rng.random_range(-2..=2i64), rng.random_range(-2..=2i64));
        if used.iter().any(|&u| u == pair || u == (-pair.0, -pair.1)) || pair.0 + pair.1 == 0 {
            continue;
        }
        used.push(pair);
        let mode = Mode::new(pair.0, pair.1, random_poly(&mut rng, 1, false));
        if rng.random_bool(0.5) {
            g.push(mode);
        } else {
            f.push(mode);
        }
    }
    let sys = TrigSystem::new(Poly::new(vec![c0, c1]), f, g, true).expect("random system is valid");
    let ctx = ctx_at(&sys, 1, 1, (1.0 - c0) / c1);
    (sys, ctx)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
