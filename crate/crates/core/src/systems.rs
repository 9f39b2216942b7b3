//! Ready-made systems with closed-form behaviour, used by the tests, the
//! guide and the sample configs.

use num_complex::Complex64;

use crate::error::Result;
use crate::mechanical::{MechanicalOrbit, MechanicalSystem, DEFAULT_ENERGY_BRACKET};
use crate::oracle::PlanarProblem;
use crate::poly::{BiPoly, Poly};
use crate::trigsys::{Mode, TrigSystem};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn constant_mode(nu: i64, sigma: i64, v: Complex64) -> Mode {
    Mode::new(nu, sigma, BiPoly::constant(v))
}

/// `-C`, the linear dissipation term.
fn damping() -> Mode {
    Mode::new(0, 0, BiPoly::from_terms([(0, 1, c(-1.0, 0.0))]))
}

/// `sin(ν α - t)` as its two exponential modes.
fn sine(nu: i64) -> [Mode; 2] {
    [
        constant_mode(nu, -1, c(0.0, -0.5)),
        constant_mode(-nu, 1, c(0.0, 0.5)),
    ]
}

fn cos_t() -> [Mode; 2] {
    [constant_mode(0, 1, c(0.5, 0.0)), constant_mode(0, -1, c(0.5, 0.0))]
}

fn build(omega: Vec<f64>, f: Vec<Mode>, g: Vec<Mode>) -> TrigSystem {
    TrigSystem::new(Poly::new(omega), f, g, false).expect("catalog systems are real")
}

/// `ω(A) = A`, `F = 0`, `G = -C + sin(α - t)`; resonant at `A₀ = 1` with
/// `C₀(t₀) = -sin t₀` exactly at every order.
pub fn sys_a() -> TrigSystem {
    let mut g = vec![damping()];
    g.extend(sine(1));
    build(vec![0.0, 1.0], vec![], g)
}

/// [`sys_a`] with an extra non-resonant forcing `cos t` in `G`.
pub fn sys_a_prime() -> TrigSystem {
    let mut g = vec![damping()];
    g.extend(sine(1));
    g.extend(cos_t());
    build(vec![0.0, 1.0], vec![], g)
}

/// `G = -C + sin(3α - t)`, resonant for `p/q = 1/3` at `A₀ = 1/3`.
pub fn sys_a3() -> TrigSystem {
    let mut g = vec![damping()];
    g.extend(sine(3));
    build(vec![0.0, 1.0], vec![], g)
}

/// `G = -C + sin(2α - t)`: no resonant forcing at `p/q = 1`.
pub fn sys_b() -> TrigSystem {
    let mut g = vec![damping()];
    g.extend(sine(2));
    build(vec![0.0, 1.0], vec![], g)
}

/// `G = -C + cos α + cos t`: `C₀ ≡ 0` and the first phase dependence
/// appears at order one.
pub fn sys_e() -> TrigSystem {
    let mut g = vec![damping()];
    g.push(constant_mode(1, 0, c(0.5, 0.0)));
    g.push(constant_mode(-1, 0, c(0.5, 0.0)));
    g.extend(cos_t());
    build(vec![0.0, 1.0], vec![], g)
}

/// Constant frequency map: violates the twist condition everywhere.
pub fn isochronous() -> TrigSystem {
    let mut g = vec![damping()];
    g.extend(sine(1));
    build(vec![1.0], vec![], g)
}

/// Action–angle persistence example `H = A²/2 + ε f(α, t) (A - 1)²` with
/// `f = cos(α - t) + cos t`. The torus `A = 1` stays invariant for every `ε`.
pub fn persistent_torus() -> TrigSystem {
    // (A - 1)² = A² - 2A + 1
    let square = |v: Complex64| BiPoly::from_terms([(2, 0, v), (1, 0, -2.0 * v), (0, 0, v)]);
    let linear = |v: Complex64| BiPoly::from_terms([(1, 0, v), (0, 0, -v)]);
    // G = -∂_α H₁ = sin(α - t) (A - 1)², F = ∂_A H₁ = 2 f (A - 1)
    let g = vec![
        Mode::new(1, -1, square(c(0.0, -0.5))),
        Mode::new(-1, 1, square(c(0.0, 0.5))),
    ];
    let f = vec![
        Mode::new(1, -1, linear(c(1.0, 0.0))),
        Mode::new(-1, 1, linear(c(1.0, 0.0))),
        Mode::new(0, 1, linear(c(1.0, 0.0))),
        Mode::new(0, -1, linear(c(1.0, 0.0))),
    ];
    build(vec![0.0, 1.0], f, g)
}

/// `ẍ + x³ + εCẋ = ε cos t`.
pub fn cubic_oscillator() -> MechanicalSystem {
    MechanicalSystem::new(Poly::new(vec![0.0, 0.0, 0.0, 1.0]), vec![(1, vec![c(0.5, 0.0)]), (-1, vec![c(0.5, 0.0)])])
        .expect("catalog systems are real")
}

/// `ẍ + x + εCẋ = ε cos t`: isochronous.
pub fn harmonic_oscillator() -> MechanicalSystem {
    MechanicalSystem::new(Poly::new(vec![0.0, 1.0]), vec![(1, vec![c(0.5, 0.0)]), (-1, vec![c(0.5, 0.0)])])
        .expect("catalog systems are real")
}

/// Planar persistence example `H = y²/2 + x⁴/4 + ε cos t (H₀ - E)²` with
/// `H₀ = y²/2 + x⁴/4` and `E` the energy of the `2π`-periodic orbit of
/// [`cubic_oscillator`]. That orbit solves the perturbed equations for
/// every `ε` and every phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceSystem {
    pub energy: f64,
    pub orbit: MechanicalOrbit,
}

impl PersistenceSystem {
    pub fn problem(&self, eps: f64) -> PlanarProblem<'static> {
        let energy = self.energy;
        PlanarProblem::new(
            move |t, z| {
                let h0 = 0.5 * z[1] * z[1] + 0.25 * z[0].powi(4);
                let factor = 1.0 + 2.0 * eps * t.cos() * (h0 - energy);
                [z[1] * factor, -z[0].powi(3) * factor]
            },
            2.0 * std::f64::consts::PI,
            [0.0, 0.0],
        )
    }
}

pub fn sys_d() -> Result<PersistenceSystem> {
    let orbit = cubic_oscillator().orbit_with_period(2.0 * std::f64::consts::PI, DEFAULT_ENERGY_BRACKET)?;
    Ok(PersistenceSystem {
        energy: orbit.energy,
        orbit,
    })
}
