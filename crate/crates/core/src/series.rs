//! Order-by-order Fourier recursion for the subharmonic solution.
//!
//! Work in the frame `s = t` with the forcing shifted by `t₀`, and expand
//!
//! ```text
//! α(s) = ω(A₀) s + Σ_{k≥1} εᵏ α⁽ᵏ⁾(s),   A(s) = A₀ + Σ_{k≥1} εᵏ A⁽ᵏ⁾(s)
//! ```
//!
//! with `α⁽ᵏ⁾, A⁽ᵏ⁾` finite Fourier sums in `e^{iνs/q}`. In C-mode the
//! dissipation is expanded too, `C = Σ εᵏ Cₖ(t₀)`, and `Cₖ` is chosen so
//! that the zero mode of `G` vanishes at every order. In fixed-phase mode
//! `C` is frozen and the constant phase shifts `ᾱ⁽ᵏ⁾` play that role.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::melnikov::{melnikov_dt0, melnikov_value, solve_c0};
use crate::poly::factorial;
use crate::spectrum::Spectrum;
use crate::trigsys::{jets_at, Component, JetTable, ResonanceContext, TrigSystem};

/// Which parameter absorbs the solvability condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesMode {
    /// `C` is expanded in `ε`, `t₀` is free.
    CMode,
    /// `C` is fixed, the phase is corrected order by order.
    FixedPhase { c: f64 },
}

impl SeriesMode {
    pub fn name(&self) -> &'static str {
        match self {
            SeriesMode::CMode => "c",
            SeriesMode::FixedPhase { .. } => "fixed",
        }
    }
}

type JetKey = (Component, usize, usize, usize);

#[derive(Debug, Clone)]
pub struct SeriesState {
    sys: TrigSystem,
    ctx: ResonanceContext,
    t0: f64,
    mode: SeriesMode,
    /// Skip the phase correction and just record obstructions.
    hierarchy: bool,
    /// Taylor coefficients `ω⁽ʲ⁾(A₀)/j!`.
    omega_taylor: Vec<f64>,
    jets: JetTable,
    jet_specs: BTreeMap<JetKey, Spectrum>,
    /// `D = ∂M/∂C` (C-mode) or `-M'(t₀)/ω(A₀)` (fixed-phase).
    divisor: f64,
    alpha: Vec<Spectrum>,
    a: Vec<Spectrum>,
    c: Vec<f64>,
    alpha_bar: Vec<f64>,
    f_full: Vec<Spectrum>,
    g_full: Vec<Spectrum>,
    /// Zero mode of `G⁽ᵏ⁾` before the order-k parameter is inserted.
    obstruction: Vec<f64>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl SeriesState {
    /// Install the order-zero data at phase `t0`.
    pub fn new(sys: &TrigSystem, ctx: &ResonanceContext, t0: f64, mode: SeriesMode) -> Result<Self> {
        let scale = sys.coefficient_scale().max(f64::MIN_POSITIVE);
        match mode {
            SeriesMode::CMode => {
                let (c0, d) = solve_c0(sys, ctx, t0)?;
                Ok(Self::build(sys, ctx, t0, mode, c0, d, false))
            }
            SeriesMode::FixedPhase { c } => {
                let m_prime = melnikov_dt0(sys, ctx, t0, c);
                if m_prime.abs() < 1e-10 * scale {
                    return Err(Error::DegenerateZero { t0, m_prime });
                }
                let m = melnikov_value(sys, ctx, t0, c);
                if m.abs() > 1e-10 * scale {
                    return Err(Error::NotAZero { t0, m });
                }
                Ok(Self::build(sys, ctx, t0, mode, c, -m_prime / ctx.omega_a0, false))
            }
        }
    }

    /// Fixed-`C` state used to walk the obstruction hierarchy: no
    /// preconditions, and every undetermined phase shift is set to zero.
    pub fn for_hierarchy(sys: &TrigSystem, ctx: &ResonanceContext, t0: f64, c: f64) -> Self {
        Self::build(sys, ctx, t0, SeriesMode::FixedPhase { c }, c, 0.0, true)
    }

    fn build(
        sys: &TrigSystem,
        ctx: &ResonanceContext,
        t0: f64,
        mode: SeriesMode,
        c0: f64,
        divisor: f64,
        hierarchy: bool,
    ) -> Self {
        let mut state = SeriesState {
            sys: sys.clone(),
            ctx: *ctx,
            t0,
            mode,
            hierarchy,
            omega_taylor: sys.omega().taylor_at(ctx.a0),
            jets: jets_at(sys, ctx, c0, 4),
            jet_specs: BTreeMap::new(),
            divisor,
            alpha: vec![Spectrum::new()],
            a: vec![Spectrum::new()],
            c: vec![c0],
            alpha_bar: vec![0.0],
            f_full: Vec::new(),
            g_full: Vec::new(),
            obstruction: Vec::new(),
        };
        state.ensure_jets(1);
        let f0 = state.jet_specs[&(Component::F, 0, 0, 0)].clone();
        let g0 = state.jet_specs[&(Component::G, 0, 0, 0)].clone();
        state.obstruction.push(g0.get(0).re);
        state.f_full.push(f0);
        state.g_full.push(g0);
        state
    }

    pub fn ctx(&self) -> &ResonanceContext {
        &self.ctx
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn mode(&self) -> SeriesMode {
        self.mode
    }

    pub fn jets(&self) -> &JetTable {
        &self.jets
    }

    /// Highest order computed so far.
    pub fn k_done(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn alpha(&self, k: usize) -> &Spectrum {
        &self.alpha[k]
    }

    pub fn action(&self, k: usize) -> &Spectrum {
        &self.a[k]
    }

    /// `C_k`; in fixed-phase mode `C_0` is the frozen value and the rest vanish.
    pub fn c(&self, k: usize) -> f64 {
        self.c[k]
    }

    pub fn c_coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn alpha_bar(&self, k: usize) -> f64 {
        self.alpha_bar[k]
    }

    pub fn alpha_bar_coeffs(&self) -> &[f64] {
        &self.alpha_bar
    }

    /// `D(t₀)` in C-mode, `⟨∂₁G⟩` in fixed-phase mode.
    pub fn divisor(&self) -> f64 {
        self.divisor
    }

    /// `G⁽ᵏ⁾` including the order-k parameter.
    pub fn g_order(&self, k: usize) -> &Spectrum {
        &self.g_full[k]
    }

    pub fn f_order(&self, k: usize) -> &Spectrum {
        &self.f_full[k]
    }

    /// Zero mode of `G⁽ᵏ⁾` before the order-k parameter enters, for the
    /// highest computed order: `M(t₀, C)` at order zero and the obstruction
    /// `Mₖ(t₀)` of the fixed-`C` hierarchy afterwards.
    pub fn obstruction(&self) -> f64 {
        *self.obstruction.last().expect("order zero is always present")
    }

    /// The dissipation `Σ εᵏ Cₖ` at this phase.
    pub fn c_total(&self, eps: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &c| acc * eps + c)
    }

    fn ensure_jets(&mut self, k: usize) {
        if self.jets.kmax < k {
            self.jets = jets_at(&self.sys, &self.ctx, self.c[0], 2 * k);
        }
        let (p, q, t0) = (self.ctx.p, self.ctx.q, self.t0);
        for comp in [Component::F, Component::G] {
            for r1 in 0..=k {
                for r2 in 0..=k - r1 {
                    for r3 in 0..=k - r1 - r2 {
                        let key = (comp, r1, r2, r3);
                        if self.jet_specs.contains_key(&key) {
                            continue;
                        }
                        let mut spec = Spectrum::new();
                        for m in self.jets.modes(comp) {
                            let jet = m.get(r2, r3);
                            if jet == ZERO || (r1 > 0 && m.nu == 0) {
                                continue;
                            }
                            let dalpha = Complex64::new(0.0, m.nu as f64).powi(r1 as i32) / factorial(r1);
                            let phase = Complex64::from_polar(1.0, m.sigma as f64 * t0);
                            spec.add(m.nu * p + m.sigma * q, phase * dalpha * jet);
                        }
                        self.jet_specs.insert(key, spec);
                    }
                }
            }
        }
    }

    fn delta_alpha(&self) -> Vec<Spectrum> {
        self.alpha
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let mut s = s.clone();
                s.add(0, Complex64::new(self.alpha_bar.get(k).copied().unwrap_or(0.0), 0.0));
                s
            })
            .collect()
    }

    fn delta_c(&self) -> Vec<f64> {
        match self.mode {
            SeriesMode::CMode => {
                let mut d = self.c.clone();
                d[0] = 0.0;
                d
            }
            SeriesMode::FixedPhase { .. } => vec![0.0; self.c.len()],
        }
    }

    /// `[εᵐ] (δX)ʳ` for `r, m ≤ k`, from the known orders of `δX`.
    fn power_table(series: &[Spectrum], k: usize) -> Vec<Vec<Spectrum>> {
        let mut table = vec![vec![Spectrum::new(); k + 1]; k + 1];
        table[0][0] = Spectrum::one();
        for r in 1..=k {
            for m in r..=k {
                let mut acc = Spectrum::new();
                for j in 1..=m + 1 - r {
                    let Some(x) = series.get(j) else { break };
                    if x.is_empty() || table[r - 1][m - j].is_empty() {
                        continue;
                    }
                    acc += &(x * &table[r - 1][m - j]);
                }
                table[r][m] = acc;
            }
        }
        table
    }

    fn scalar_power_table(series: &[f64], k: usize) -> Vec<Vec<f64>> {
        let mut table = vec![vec![0.0; k + 1]; k + 1];
        table[0][0] = 1.0;
        for r in 1..=k {
            for m in r..=k {
                table[r][m] = (1..=m + 1 - r)
                    .map(|j| series.get(j).copied().unwrap_or(0.0) * table[r - 1][m - j])
                    .sum();
            }
        }
        table
    }

    /// `[εᵏ]` of the component evaluated along the current expansion.
    #[allow(clippy::needless_range_loop)]
    fn compose(
        &self,
        comp: Component,
        k: usize,
        pa: &[Vec<Spectrum>],
        pact: &[Vec<Spectrum>],
        pc: &[Vec<f64>],
    ) -> Spectrum {
        let mut out = Spectrum::new();
        for r1 in 0..=k {
            for r2 in 0..=k - r1 {
                for r3 in 0..=k - r1 - r2 {
                    if r1 + r2 + r3 == 0 {
                        continue;
                    }
                    let spec = &self.jet_specs[&(comp, r1, r2, r3)];
                    if spec.is_empty() {
                        continue;
                    }
                    let mut prod = Spectrum::new();
                    for m1 in r1..=k {
                        if pa[r1][m1].is_empty() {
                            continue;
                        }
                        for m2 in r2..=k - m1 {
                            let m3 = k - m1 - m2;
                            let cv = pc[r3][m3];
                            if cv == 0.0 || pact[r2][m2].is_empty() {
                                continue;
                            }
                            prod.add_scaled(&(&pa[r1][m1] * &pact[r2][m2]), Complex64::new(cv, 0.0));
                        }
                    }
                    if !prod.is_empty() {
                        out += &(spec * &prod);
                    }
                }
            }
        }
        out
    }

    /// Extend the expansion by one order.
    pub fn compute_order(&mut self) -> Result<()> {
        let k = self.k_done() + 1;
        self.ensure_jets(k);
        let omega = self.ctx.omega_small;
        let omega_prime = self.ctx.omega_prime;

        // Nonlinear part of ω(A₀ + δA) at order k only involves A⁽ʲ⁾, j < k.
        let pact = Self::power_table(&self.a, k);
        let mut f_tilde = self.f_full[k - 1].clone();
        for (j, &w) in self.omega_taylor.iter().enumerate().skip(2) {
            if j <= k && w != 0.0 {
                f_tilde.add_scaled(&pact[j][k], Complex64::new(w, 0.0));
            }
        }
        let g_prev = &self.g_full[k - 1];

        let mut alpha_k = Spectrum::new();
        let mut a_k = Spectrum::new();
        for (nu, g) in g_prev.iter().filter(|&(nu, _)| nu != 0) {
            let inv = Complex64::new(0.0, omega * nu as f64).inv();
            a_k.add(nu, g * inv);
            alpha_k.add(nu, g * inv * inv * omega_prime);
        }
        for (nu, f) in f_tilde.iter().filter(|&(nu, _)| nu != 0) {
            alpha_k.add(nu, f / Complex64::new(0.0, omega * nu as f64));
        }
        a_k.set(0, -f_tilde.get(0) / omega_prime);
        self.alpha.push(alpha_k);
        self.a.push(a_k);

        let pa = Self::power_table(&self.delta_alpha(), k);
        let pact = Self::power_table(&self.a, k);
        let pc = Self::scalar_power_table(&self.delta_c(), k);
        let mut gamma = self.compose(Component::G, k, &pa, &pact, &pc);
        let mut phi = self.compose(Component::F, k, &pa, &pact, &pc);
        let residual = gamma.get(0);
        self.obstruction.push(residual.re);

        match self.mode {
            SeriesMode::CMode => {
                let ck = -residual.re / self.divisor;
                gamma.add_scaled(&self.jet_specs[&(Component::G, 0, 0, 1)], Complex64::new(ck, 0.0));
                phi.add_scaled(&self.jet_specs[&(Component::F, 0, 0, 1)], Complex64::new(ck, 0.0));
                self.c.push(ck);
                self.alpha_bar.push(0.0);
            }
            SeriesMode::FixedPhase { .. } => {
                let bar = if self.hierarchy { 0.0 } else { -residual.re / self.divisor };
                gamma.add_scaled(&self.jet_specs[&(Component::G, 1, 0, 0)], Complex64::new(bar, 0.0));
                phi.add_scaled(&self.jet_specs[&(Component::F, 1, 0, 0)], Complex64::new(bar, 0.0));
                self.c.push(0.0);
                self.alpha_bar.push(bar);
            }
        }

        if !self.hierarchy {
            let left = gamma.get(0).norm();
            let scale = residual.norm().max(gamma.max_norm()).max(self.jets.scale()).max(1.0);
            if left > 1e-12 * scale {
                return Err(Error::SolvabilityFailure { k, residual: left });
            }
            gamma.set(0, ZERO);
        }
        self.f_full.push(phi);
        self.g_full.push(gamma);
        Ok(())
    }

    /// Compute orders up to and including `k`.
    pub fn compute_to(&mut self, k: usize) -> Result<()> {
        while self.k_done() < k {
            self.compute_order()?;
        }
        Ok(())
    }

    fn deltas(&self, eps: f64, s: f64) -> (f64, f64, f64, f64) {
        let w = self.ctx.omega_small;
        let (mut da, mut dact, mut dda, mut ddact) = (0.0, 0.0, 0.0, 0.0);
        let mut pow = 1.0;
        for k in 1..=self.k_done() {
            pow *= eps;
            da += pow * (self.alpha[k].eval(w, s).re + self.alpha_bar[k]);
            dact += pow * self.a[k].eval(w, s).re;
            dda += pow * self.alpha[k].derivative(w).eval(w, s).re;
            ddact += pow * self.a[k].derivative(w).eval(w, s).re;
        }
        (da, dact, dda, ddact)
    }

    fn c_value(&self, eps: f64) -> f64 {
        match self.mode {
            SeriesMode::CMode => self.c_total(eps),
            SeriesMode::FixedPhase { c } => c,
        }
    }

    /// Truncated series at time `s` of the shifted frame; the angle is
    /// reduced to `[0, 2π)`.
    pub fn evaluate_solution(&self, eps: f64, s: f64) -> (f64, f64) {
        let (da, dact, _, _) = self.deltas(eps, s);
        let alpha = (self.ctx.omega_a0 * s + da).rem_euclid(2.0 * PI);
        (alpha, self.ctx.a0 + dact)
    }

    /// Initial condition at original time zero, i.e. `s = -t₀`.
    pub fn initial_condition(&self, eps: f64) -> [f64; 2] {
        let (alpha, a) = self.evaluate_solution(eps, -self.t0);
        [alpha, a]
    }

    /// Largest violation of the equations of motion by the truncated series
    /// over `n` equally spaced samples of one period.
    pub fn residual(&self, eps: f64, n: usize) -> f64 {
        let c = self.c_value(eps);
        let (t0, period) = (self.t0, self.ctx.period);
        (0..n)
            .map(|j| {
                let s = period * j as f64 / n as f64;
                let (da, dact, dda, ddact) = self.deltas(eps, s);
                let alpha = self.ctx.omega_a0 * s + da;
                let a = self.ctx.a0 + dact;
                // ω(A₀ + δA) - ω(A₀) from the Taylor coefficients, avoiding cancellation.
                let domega = self
                    .omega_taylor
                    .iter()
                    .skip(1)
                    .rev()
                    .fold(0.0, |acc, &w| (acc + w) * dact);
                let r1 = dda - domega - eps * self.sys.eval_f(alpha, a, c, s + t0).re;
                let r2 = ddact - eps * self.sys.eval_g(alpha, a, c, s + t0).re;
                r1.abs() + r2.abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|ν|` in the support of `α⁽ᵏ⁾` and `A⁽ᵏ⁾` over all orders.
    pub fn max_mode(&self) -> i64 {
        self.alpha
            .iter()
            .chain(&self.a)
            .map(Spectrum::max_abs_mode)
            .max()
            .unwrap_or(0)
    }
}

/// Run a C-mode series to order `k` at phase `t0`.
pub fn c_mode_series(sys: &TrigSystem, ctx: &ResonanceContext, t0: f64, k: usize) -> Result<SeriesState> {
    let mut state = SeriesState::new(sys, ctx, t0, SeriesMode::CMode)?;
    state.compute_to(k)?;
    Ok(state)
}

/// Polish a guess for a zero of `t₀ ↦ M(t₀, C)` by Newton's method.
pub fn refine_phase_zero(sys: &TrigSystem, ctx: &ResonanceContext, c: f64, guess: f64) -> f64 {
    let mut t0 = guess;
    for _ in 0..50 {
        let d = melnikov_dt0(sys, ctx, t0, c);
        if d == 0.0 {
            break;
        }
        let step = melnikov_value(sys, ctx, t0, c) / d;
        t0 -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    t0
}
