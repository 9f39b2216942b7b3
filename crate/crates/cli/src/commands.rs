use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use subharmonic::bifurcation::DEFAULT_CONSTANT_TOL;
use subharmonic::mechanical::mechanical_melnikov;
use subharmonic::melnikov::uniform_grid;
use subharmonic::oracle::{action_angle_exists, orbit_seeds, series_seeds, shoot_from_seeds, DEFAULT_SEEDS};
use subharmonic::series::{refine_phase_zero, SeriesMode, SeriesState};
use subharmonic::trees::{enumerate_trees, momentum_range};
use subharmonic::trigsys::find_resonance_bracket;
use subharmonic::{
    bifurcation_curves, c_mode_series, c_surface, count_subharmonics, degeneracy_order, empirical_curve,
    mechanical_curves, melnikov_curve, resonance_context, shoot_periodic, tree_sum, Label, MechanicalSystem,
    PeriodicOrbit, PlanarProblem, ResonanceContext, ResonanceSearch, Spectrum, TrigSystem,
};

use crate::grid::{parse_bracket, parse_eps};
use crate::output::{csv_bytes, emit, json_bytes, num};
use crate::{Common, SeriesModeArg};

fn read_config(common: &Common) -> Result<String> {
    std::fs::read_to_string(&common.config).with_context(|| format!("reading {}", common.config.display()))
}

fn load_trig(common: &Common) -> Result<TrigSystem> {
    let text = read_config(common)?;
    TrigSystem::from_toml_str(&text).with_context(|| format!("loading {}", common.config.display()))
}

fn load_mechanical(common: &Common) -> Result<MechanicalSystem> {
    let text = read_config(common)?;
    MechanicalSystem::from_toml_str(&text).with_context(|| format!("loading {}", common.config.display()))
}

fn context(sys: &TrigSystem, common: &Common) -> Result<ResonanceContext> {
    let search = match common.a0 {
        Some(a0) => ResonanceSearch::Root(a0),
        None => find_resonance_bracket(sys, common.p, common.q, 100.0)
            .map(|(lo, hi)| ResonanceSearch::Bracket(lo, hi))
            .unwrap_or(ResonanceSearch::Root(1.0)),
    };
    Ok(resonance_context(sys, common.p, common.q, search)?)
}

fn energy_bracket(common: &Common) -> Result<(f64, f64)> {
    parse_bracket(&common.energy_bracket).context("--energy-bracket")
}

fn out(common: &Common) -> Option<&Path> {
    common.out.as_deref()
}

fn no_mechanical(common: &Common, what: &str) -> Result<()> {
    if common.mechanical {
        bail!("`{what}` works on action-angle systems only; drop --mechanical");
    }
    Ok(())
}

pub fn melnikov(common: &Common, n_t: usize) -> Result<ExitCode> {
    if n_t == 0 {
        bail!("--t0-grid must be positive");
    }
    let rows: Vec<Vec<String>> = if common.mechanical {
        let mech = load_mechanical(common)?;
        let mm = mechanical_melnikov(&mech, common.p, common.q, energy_bracket(common)?)?;
        let d = mm.d();
        uniform_grid(n_t)
            .into_iter()
            .map(|t0| vec![num(t0), num(mm.c0(t0)), num(d)])
            .collect()
    } else {
        let sys = load_trig(common)?;
        let ctx = context(&sys, common)?;
        let curve = melnikov_curve(&sys, &ctx, n_t)?;
        (0..n_t)
            .map(|i| vec![num(curve.t0_grid[i]), num(curve.c0_values[i]), num(curve.d_values[i])])
            .collect()
    };
    emit(out(common), &csv_bytes(&["t0", "C0", "D"], &rows)?)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct OrderOut {
    k: usize,
    alpha: Vec<(i64, f64, f64)>,
    #[serde(rename = "A")]
    action: Vec<(i64, f64, f64)>,
}

#[derive(Serialize)]
struct SeriesOut {
    t0: f64,
    mode: &'static str,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    c: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_fixed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_bar: Option<Vec<f64>>,
    orders: Vec<OrderOut>,
}

fn triples(s: &Spectrum) -> Vec<(i64, f64, f64)> {
    s.iter().map(|(nu, c)| (nu, c.re, c.im)).collect()
}

pub fn series(common: &Common, order: usize, t0: f64, mode: SeriesModeArg, c_fixed: Option<f64>) -> Result<ExitCode> {
    no_mechanical(common, "series")?;
    let sys = load_trig(common)?;
    let ctx = context(&sys, common)?;
    let state = match (mode, c_fixed) {
        (SeriesModeArg::C, None) => c_mode_series(&sys, &ctx, t0, order)?,
        (SeriesModeArg::C, Some(_)) => bail!("--c-fixed only applies to --mode fixed"),
        (SeriesModeArg::Fixed, None) => bail!("--mode fixed needs --c-fixed"),
        (SeriesModeArg::Fixed, Some(c)) => {
            let t0 = refine_phase_zero(&sys, &ctx, c, t0);
            let mut state = SeriesState::new(&sys, &ctx, t0, SeriesMode::FixedPhase { c })?;
            state.compute_to(order)?;
            state
        }
    };
    let fixed = matches!(mode, SeriesModeArg::Fixed);
    let doc = SeriesOut {
        t0: state.t0(),
        mode: state.mode().name(),
        c: (!fixed).then(|| state.c_coeffs().to_vec()),
        c_fixed: if fixed { c_fixed } else { None },
        alpha_bar: fixed.then(|| state.alpha_bar_coeffs().to_vec()),
        orders: (1..=order)
            .map(|k| OrderOut {
                k,
                alpha: triples(state.alpha(k)),
                action: triples(state.action(k)),
            })
            .collect(),
    };
    emit(out(common), &json_bytes(&doc)?)?;
    Ok(ExitCode::SUCCESS)
}

pub fn curves(
    common: &Common,
    order: usize,
    eps: &str,
    two_sided: bool,
    n_t: Option<usize>,
    constant_tol: Option<f64>,
) -> Result<ExitCode> {
    let eps = parse_eps(eps, two_sided)?;
    let rows: Vec<Vec<String>> = if common.mechanical {
        let mech = load_mechanical(common)?;
        let mc = mechanical_curves(&mech, common.p, common.q, &eps, n_t.unwrap_or(64), energy_bracket(common)?)?;
        let argbest = |max: bool| {
            let sign = if max { 1.0 } else { -1.0 };
            (0..mc.t0_grid.len())
                .max_by(|&a, &b| (sign * mc.c0_values[a]).total_cmp(&(sign * mc.c0_values[b])))
                .map(|i| mc.t0_grid[i])
                .unwrap_or(0.0)
        };
        let (tau1, tau2) = (argbest(true), argbest(false));
        eprintln!("C0 mean {:.3e}, max {:.6}, min {:.6}", mc.c0_mean, mc.c0_max, mc.c0_min);
        (0..eps.len())
            .map(|i| vec![num(eps[i]), num(mc.gamma1[i]), num(mc.gamma2[i]), num(tau1), num(tau2)])
            .collect()
    } else {
        let sys = load_trig(common)?;
        let ctx = context(&sys, common)?;
        let surf = c_surface(&sys, &ctx, order, n_t)?;
        let bc = bifurcation_curves(&surf, &eps);
        let kstar = degeneracy_order(&surf, constant_tol.unwrap_or(DEFAULT_CONSTANT_TOL));
        eprintln!("degeneracy: {kstar:?}");
        (0..eps.len())
            .map(|i| vec![num(eps[i]), num(bc.gamma1[i]), num(bc.gamma2[i]), num(bc.tau1[i]), num(bc.tau2[i])])
            .collect()
    };
    emit(out(common), &csv_bytes(&["eps", "gamma1", "gamma2", "tau1", "tau2"], &rows)?)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CountOut {
    count: usize,
    roots: Vec<f64>,
}

pub fn count(common: &Common, order: usize, eps: f64, gamma: f64, n_t: Option<usize>) -> Result<ExitCode> {
    no_mechanical(common, "count")?;
    let sys = load_trig(common)?;
    let ctx = context(&sys, common)?;
    let surf = c_surface(&sys, &ctx, order, n_t)?;
    let found = count_subharmonics(&surf, eps, gamma)?;
    println!("{}", found.count);
    if let Some(path) = out(common) {
        let doc = CountOut {
            count: found.count,
            roots: found.roots,
        };
        emit(Some(path), &json_bytes(&doc)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn trees(common: &Common, order: usize, t0: f64, check: bool) -> Result<ExitCode> {
    no_mechanical(common, "trees")?;
    let sys = load_trig(common)?;
    let ctx = context(&sys, common)?;
    let labels = [Label::Alpha, Label::Action, Label::Dissipation];
    if !check {
        let mut rows = Vec::new();
        for k in 1..=order {
            for label in labels {
                for nu in momentum_range(&sys, &ctx, k) {
                    let n = enumerate_trees(&sys, &ctx, k, label, nu)?.len();
                    if n > 0 {
                        rows.push(vec![k.to_string(), label.name().to_string(), nu.to_string(), n.to_string()]);
                    }
                }
            }
        }
        emit(out(common), &csv_bytes(&["k", "h", "nu", "trees"], &rows)?)?;
        return Ok(ExitCode::SUCCESS);
    }
    let state = c_mode_series(&sys, &ctx, t0, order)?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for k in 1..=order {
        for label in labels {
            for nu in momentum_range(&sys, &ctx, k) {
                let series = match label {
                    Label::Alpha => state.alpha(k).get(nu),
                    Label::Action => state.action(k).get(nu),
                    Label::Dissipation if nu == 0 => state.c(k).into(),
                    Label::Dissipation => 0.0.into(),
                };
                let trees = tree_sum(&sys, &ctx, t0, k, label, nu)?;
                if series.norm() == 0.0 && trees.norm() == 0.0 {
                    continue;
                }
                let diff = (series - trees).norm();
                worst = worst.max(diff / series.norm().max(1.0));
                rows.push(vec![
                    k.to_string(),
                    label.name().to_string(),
                    nu.to_string(),
                    num(trees.re),
                    num(trees.im),
                    num(series.re),
                    num(series.im),
                    num(diff),
                ]);
            }
        }
    }
    let header = ["k", "h", "nu", "tree_re", "tree_im", "series_re", "series_im", "abs_diff"];
    emit(out(common), &csv_bytes(&header, &rows)?)?;
    eprintln!("{} coefficients, max relative mismatch {worst:.3e}", rows.len());
    if worst > 1e-10 {
        eprintln!("error: tree sums disagree with the recursion");
        return Ok(ExitCode::from(crate::EXIT_ORACLE));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct VerifyOut {
    converged: bool,
    defect: Option<f64>,
    orbit_ic: Option<[f64; 2]>,
    iterations: usize,
}

fn seeds_for(common: &Common, eps: f64, order: usize, t0: Option<f64>) -> Result<Vec<[f64; 2]>> {
    if common.mechanical {
        let mech = load_mechanical(common)?;
        let mm = mechanical_melnikov(&mech, common.p, common.q, energy_bracket(common)?)?;
        return Ok(match t0 {
            Some(t0) => vec![mm.orbit.state_at((-t0).rem_euclid(mm.orbit.period))],
            None => orbit_seeds(&mm.orbit, DEFAULT_SEEDS),
        });
    }
    let sys = load_trig(common)?;
    let ctx = context(&sys, common)?;
    Ok(match t0 {
        Some(t0) => vec![c_mode_series(&sys, &ctx, t0, order)?.initial_condition(eps)],
        None => series_seeds(&sys, &ctx, eps, order, DEFAULT_SEEDS),
    })
}

pub fn verify(common: &Common, order: usize, eps: f64, c: f64, t0: Option<f64>) -> Result<ExitCode> {
    let seeds = seeds_for(common, eps, order, t0)?;
    if seeds.is_empty() {
        bail!("no seeds could be built");
    }
    let result: subharmonic::Result<PeriodicOrbit> = if common.mechanical {
        let mech = load_mechanical(common)?;
        let problem = PlanarProblem::mechanical(&mech, eps, c, common.q);
        shoot_one_or_many(&problem, &seeds)
    } else {
        let sys = load_trig(common)?;
        let ctx = context(&sys, common)?;
        let problem = PlanarProblem::action_angle(&sys, &ctx, eps, c);
        shoot_one_or_many(&problem, &seeds)
    };
    let (doc, code) = match result {
        Ok(orbit) => (
            VerifyOut {
                converged: true,
                defect: Some(orbit.defect),
                orbit_ic: Some(orbit.initial),
                iterations: orbit.iterations,
            },
            ExitCode::SUCCESS,
        ),
        Err(subharmonic::Error::NoConvergence { iterations, defect }) => {
            eprintln!("error: shooting did not converge");
            (
                VerifyOut {
                    converged: false,
                    defect: defect.is_finite().then_some(defect),
                    orbit_ic: None,
                    iterations,
                },
                ExitCode::from(crate::EXIT_ORACLE),
            )
        }
        Err(e) => return Err(e.into()),
    };
    emit(out(common), &json_bytes(&doc)?)?;
    Ok(code)
}

fn shoot_one_or_many(problem: &PlanarProblem<'_>, seeds: &[[f64; 2]]) -> subharmonic::Result<PeriodicOrbit> {
    match seeds {
        [one] => shoot_periodic(problem, *one),
        many => shoot_from_seeds(problem, many),
    }
}

/// `C` range of the Melnikov curve, padded on both sides.
fn default_bracket(lo: f64, hi: f64) -> (f64, f64) {
    let pad = 0.5 * (hi - lo) + 0.1;
    (lo - pad, hi + pad)
}

pub fn scan(common: &Common, order: usize, eps: &str, two_sided: bool, bracket: Option<&str>) -> Result<ExitCode> {
    let eps = parse_eps(eps, two_sided)?;
    let explicit = bracket.map(parse_bracket).transpose().context("--bracket")?;
    let mut rows = Vec::new();
    if common.mechanical {
        let mech = load_mechanical(common)?;
        let mm = mechanical_melnikov(&mech, common.p, common.q, energy_bracket(common)?)?;
        let bracket = match explicit {
            Some(b) => b,
            None => {
                let values: Vec<f64> = uniform_grid(64).iter().map(|&t| mm.c0(t)).collect();
                let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
                default_bracket(lo, hi)
            }
        };
        let seeds = orbit_seeds(&mm.orbit, DEFAULT_SEEDS);
        for &e in &eps {
            let exists = |c: f64| shoot_from_seeds(&PlanarProblem::mechanical(&mech, e, c, common.q), &seeds).is_ok();
            let (upper, lower) = empirical_curve(exists, bracket)?;
            rows.push(vec![num(e), num(upper), num(lower)]);
        }
    } else {
        let sys = load_trig(common)?;
        let ctx = context(&sys, common)?;
        let bracket = match explicit {
            Some(b) => b,
            None => {
                let curve = melnikov_curve(&sys, &ctx, 64)?;
                let lo = curve.c0_values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = curve.c0_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                default_bracket(lo, hi)
            }
        };
        for &e in &eps {
            let seeds = series_seeds(&sys, &ctx, e, order, DEFAULT_SEEDS);
            let (upper, lower) = empirical_curve(|c| action_angle_exists(&sys, &ctx, e, c, &seeds), bracket)?;
            rows.push(vec![num(e), num(upper), num(lower)]);
        }
    }
    emit(out(common), &csv_bytes(&["eps", "C_max_hat", "C_min_hat"], &rows)?)?;
    Ok(ExitCode::SUCCESS)
}
