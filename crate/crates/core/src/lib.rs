//! Subharmonic orbits of weakly forced, weakly damped anisochronous systems.
//!
//! The unperturbed system is written in action–angle form
//!
//! ```text
//! α' = ω(A) + ε F(α, A, C, t)
//! A' = ε G(α, A, C, t)
//! ```
//!
//! with `F` and `G` finite sums of `e^{i(να + σt)} P(A, C)`. At a resonance
//! `ω(A₀) = p/q` this crate computes
//!
//! * the subharmonic Melnikov function and its root curve `C₀(t₀)`
//!   ([`melnikov`]),
//! * the Fourier coefficients of the subharmonic solution order by order
//!   together with the dissipation `C(ε, t₀)` ([`series`]),
//! * the same coefficients as sums over labelled trees, as an independent
//!   check ([`trees`]),
//! * the bifurcation curves `γ₁(ε)`, `γ₂(ε)` and the number of subharmonic
//!   solutions for given `(ε, γ)` ([`bifurcation`]),
//! * periodic orbits of the full system by Newton shooting ([`oracle`]),
//! * first-order results for forced oscillators `ẍ + g(x) + γẋ = εf(x, t)`
//!   ([`mechanical`]).
//!
//! ```
//! use subharmonic::{resonance_context, systems, c_mode_series, ResonanceSearch};
//!
//! let sys = systems::sys_a();
//! let ctx = resonance_context(&sys, 1, 1, ResonanceSearch::Bracket(0.5, 1.5)).unwrap();
//! let state = c_mode_series(&sys, &ctx, 1.0, 3).unwrap();
//! assert!((state.c(0) + 1.0f64.sin()).abs() < 1e-14);
//! ```

pub mod bifurcation;
pub mod error;
pub mod mechanical;
pub mod melnikov;
pub mod ode;
pub mod oracle;
pub mod poly;
pub mod series;
pub mod spectrum;
pub mod systems;
pub mod trees;
pub mod trigsys;

pub use bifurcation::{
    bifurcation_curves, c_surface, count_subharmonics, degeneracy_order, stationary_phases, BifurcationCurves,
    CSurface, Degeneracy, Stationary, SubharmonicCount,
};
pub use error::{Error, Result};
pub use mechanical::{mechanical_c0, mechanical_curves, MechanicalCurves, MechanicalOrbit, MechanicalSystem};
pub use melnikov::{melnikov_curve, melnikov_hierarchy, melnikov_planar, melnikov_value, solve_c0, MelnikovCurve};
pub use oracle::{empirical_curve, shoot_periodic, PeriodicOrbit, PlanarProblem};
pub use poly::{BiPoly, Poly};
pub use series::{c_mode_series, SeriesMode, SeriesState};
pub use spectrum::Spectrum;
pub use trees::{enumerate_trees, tree_sum, Label, Tree};
pub use trigsys::{resonance_context, Component, Mode, ResonanceContext, ResonanceSearch, TrigSystem};

// The guide's snippets run as doctests.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod guide_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/systems.md")]
mod guide_systems {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/melnikov.md")]
mod guide_melnikov {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/series.md")]
mod guide_series {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/trees.md")]
mod guide_trees {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/bifurcation.md")]
mod guide_bifurcation {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/shooting.md")]
mod guide_shooting {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/mechanical.md")]
mod guide_mechanical {}
