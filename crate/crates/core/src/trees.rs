//! Labelled-tree expansion of the series coefficients.
//!
//! Unrolling the recursion turns every coefficient `α⁽ᵏ⁾_ν`, `A⁽ᵏ⁾_ν`, `Cₖ`
//! into a finite sum over rooted trees. Each line carries a component label
//! and a conserved momentum, each node a Fourier mode of `F` or `G` and the
//! derivative multi-index it applies. The value of a tree is the product of
//! its line propagators and node factors. This module enumerates the trees
//! explicitly, which is only sensible at low order; it exists to check the
//! recursion independently.

use std::collections::{BTreeSet, HashMap};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::melnikov::solve_c0;
use crate::poly::factorial;
use crate::trigsys::{jets_at, Component, JetTable, ResonanceContext, TrigSystem};

/// Default upper limit on the order accepted by [`enumerate_trees`].
pub const DEFAULT_ORDER_CAP: usize = 3;

/// Component label of a line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Alpha,
    Action,
    Dissipation,
}

impl Label {
    pub fn name(&self) -> &'static str {
        match self {
            Label::Alpha => "alpha",
            Label::Action => "A",
            Label::Dissipation => "C",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Line {
    pub label: Label,
    /// 2 only for angle lines fed by a `G` node.
    pub degree: u8,
    pub momentum: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub component: Component,
    pub nu: i64,
    pub sigma: i64,
    /// Number of angle, action and dissipation children.
    pub r: [usize; 3],
    /// The line leaving the node towards the root.
    pub line: Line,
    pub children: Vec<usize>,
}

/// A labelled tree; `nodes[0]` is the node attached to the root line.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn root_line(&self) -> Line {
        self.nodes[0].line
    }

    /// Number of lines not labelled `C`.
    pub fn order(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.line.label != Label::Dissipation)
            .count()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Bound on the node count established by the counting argument:
    /// `3k - 2` for angle and action roots, `3k - 1` for dissipation roots.
    pub fn node_bound(&self) -> usize {
        let k = self.order();
        match self.root_line().label {
            Label::Dissipation => 3 * k - 1,
            _ => 3 * k - 2,
        }
    }

    /// Canonical form of the unlabelled, unordered shape.
    pub fn shape(&self) -> String {
        fn walk(t: &Tree, v: usize) -> String {
            let mut kids: Vec<String> = t.nodes[v].children.iter().map(|&c| walk(t, c)).collect();
            kids.sort();
            format!("({})", kids.concat())
        }
        walk(self, 0)
    }

    fn momentum_ok(&self, p: i64, q: i64) -> bool {
        self.nodes.iter().all(|n| {
            let entering: i64 = n.children.iter().map(|&c| self.nodes[c].line.momentum).sum();
            n.line.momentum == n.nu * p + n.sigma * q + entering
        })
    }

    /// Check every structural rule: momentum conservation, line labels,
    /// dissipation-node constraint and child bookkeeping.
    pub fn is_valid(&self, p: i64, q: i64) -> bool {
        self.momentum_ok(p, q)
            && self.nodes.iter().all(|n| {
                let line_ok = match n.line.label {
                    Label::Alpha => n.line.momentum != 0 && (n.line.degree == 1) == (n.component == Component::F),
                    Label::Action => {
                        n.line.degree == 1 && (n.line.momentum == 0) == (n.component == Component::F)
                    }
                    Label::Dissipation => {
                        n.line.momentum == 0
                            && n.component == Component::G
                            && (n.r[2] >= 2 || n.r[0] + n.r[1] >= 1)
                    }
                };
                let labels: Vec<Label> = n.children.iter().map(|&c| self.nodes[c].line.label).collect();
                let expected: Vec<Label> = std::iter::repeat_n(Label::Alpha, n.r[0])
                    .chain(std::iter::repeat_n(Label::Action, n.r[1]))
                    .chain(std::iter::repeat_n(Label::Dissipation, n.r[2]))
                    .collect();
                line_ok && labels == expected
            })
    }

    /// Product of propagators and node factors.
    pub fn value(&self, jets: &JetTable, ctx: &ResonanceContext, t0: f64) -> Complex64 {
        let d = dissipation_derivative(jets, ctx, t0);
        self.nodes
            .iter()
            .map(|n| propagator(n, ctx, d) * node_factor(n, jets, t0))
            .product()
    }

    fn graft(&mut self, parent: usize, sub: &Tree) {
        let offset = self.nodes.len();
        for n in &sub.nodes {
            let mut n = n.clone();
            for c in &mut n.children {
                *c += offset;
            }
            self.nodes.push(n);
        }
        self.nodes[parent].children.push(offset);
    }
}

/// `D(t₀) = ∂M/∂C` at the jet evaluation point.
fn dissipation_derivative(jets: &JetTable, ctx: &ResonanceContext, t0: f64) -> Complex64 {
    jets.modes(Component::G)
        .iter()
        .filter(|m| m.nu * ctx.p + m.sigma * ctx.q == 0)
        .map(|m| Complex64::from_polar(1.0, m.sigma as f64 * t0) * m.get(0, 1))
        .sum()
}

fn propagator(n: &Node, ctx: &ResonanceContext, d: Complex64) -> Complex64 {
    let i_omega_nu = Complex64::new(0.0, ctx.omega_small * n.line.momentum as f64);
    match (n.line.label, n.line.degree) {
        (Label::Alpha, 1) => i_omega_nu.inv(),
        (Label::Alpha, _) => ctx.omega_prime / (i_omega_nu * i_omega_nu),
        (Label::Action, _) if n.line.momentum != 0 => i_omega_nu.inv(),
        (Label::Action, _) => Complex64::new(-1.0 / ctx.omega_prime, 0.0),
        (Label::Dissipation, _) => -d.inv(),
    }
}

fn node_factor(n: &Node, jets: &JetTable, t0: f64) -> Complex64 {
    let dalpha = Complex64::new(0.0, n.nu as f64).powi(n.r[0] as i32) / factorial(n.r[0]);
    Complex64::from_polar(1.0, n.sigma as f64 * t0) * dalpha * jets.get(n.component, n.nu, n.sigma, n.r[1], n.r[2])
}

/// The kinds of line that can carry a given label and momentum:
/// `(degree, node component, children order offset)`.
fn line_kinds(label: Label, nu: i64) -> Vec<(u8, Component)> {
    match label {
        Label::Alpha if nu == 0 => vec![],
        Label::Alpha => vec![(1, Component::F), (2, Component::G)],
        Label::Action if nu == 0 => vec![(1, Component::F)],
        Label::Action => vec![(1, Component::G)],
        Label::Dissipation if nu == 0 => vec![(1, Component::G)],
        Label::Dissipation => vec![],
    }
}

struct Enumerator<'a> {
    jets: &'a JetTable,
    p: i64,
    q: i64,
    max_momentum: i64,
    memo: HashMap<(usize, Label, i64), Vec<Tree>>,
}

impl Enumerator<'_> {
    fn lines(&mut self, k: usize, label: Label, nu: i64) -> Vec<Tree> {
        if let Some(v) = self.memo.get(&(k, label, nu)) {
            return v.clone();
        }
        let mut out = Vec::new();
        // A dissipation line adds no order; the others add one.
        let below = match label {
            Label::Dissipation => k,
            _ => match k.checked_sub(1) {
                Some(b) => b,
                None => return out,
            },
        };
        if label == Label::Dissipation && k == 0 {
            return out;
        }
        for (degree, component) in line_kinds(label, nu) {
            let modes: Vec<(i64, i64)> = self.jets.modes(component).iter().map(|m| (m.nu, m.sigma)).collect();
            for (mnu, msigma) in modes {
                let mom = mnu * self.p + msigma * self.q;
                for r1 in 0..=below {
                    for r2 in 0..=below - r1 {
                        for r3 in 0..=below - r1 - r2 {
                            let r = r1 + r2 + r3;
                            if (r == 0) != (below == 0) {
                                continue;
                            }
                            if r1 > 0 && mnu == 0 {
                                continue;
                            }
                            if self.jets.get(component, mnu, msigma, r2, r3) == Complex64::new(0.0, 0.0) {
                                continue;
                            }
                            if label == Label::Dissipation && !(r3 >= 2 || r1 + r2 >= 1) {
                                continue;
                            }
                            let node = Node {
                                component,
                                nu: mnu,
                                sigma: msigma,
                                r: [r1, r2, r3],
                                line: Line { label, degree, momentum: nu },
                                children: Vec::new(),
                            };
                            let slots: Vec<Label> = std::iter::repeat_n(Label::Alpha, r1)
                                .chain(std::iter::repeat_n(Label::Action, r2))
                                .chain(std::iter::repeat_n(Label::Dissipation, r3))
                                .collect();
                            for orders in compositions(below, r) {
                                self.fill(&node, &slots, &orders, nu - mom, &mut out);
                            }
                        }
                    }
                }
            }
        }
        self.memo.insert((k, label, nu), out.clone());
        out
    }

    /// Attach children to `node` in every way compatible with the slot
    /// labels, orders and the total momentum they must carry.
    fn fill(&mut self, node: &Node, slots: &[Label], orders: &[usize], momentum: i64, out: &mut Vec<Tree>) {
        let mut choices: Vec<Vec<Tree>> = Vec::with_capacity(slots.len());
        self.assign(slots, orders, momentum, &mut choices, &mut |choices| {
            let mut partial = vec![Tree { nodes: vec![node.clone()] }];
            for options in choices {
                let mut next = Vec::with_capacity(partial.len() * options.len());
                for base in &partial {
                    for sub in options {
                        let mut t = base.clone();
                        t.graft(0, sub);
                        next.push(t);
                    }
                }
                partial = next;
            }
            out.extend(partial);
        });
    }

    fn assign(
        &mut self,
        slots: &[Label],
        orders: &[usize],
        momentum: i64,
        choices: &mut Vec<Vec<Tree>>,
        emit: &mut dyn FnMut(&[Vec<Tree>]),
    ) {
        let i = choices.len();
        if i == slots.len() {
            if momentum == 0 {
                emit(choices);
            }
            return;
        }
        let label = slots[i];
        let candidates: Vec<i64> = if i + 1 == slots.len() {
            vec![momentum]
        } else if label == Label::Dissipation {
            vec![0]
        } else {
            let bound = 3 * orders[i] as i64 * self.max_momentum;
            (-bound..=bound).collect()
        };
        for nu in candidates {
            let trees = self.lines(orders[i], label, nu);
            if trees.is_empty() {
                continue;
            }
            choices.push(trees);
            self.assign(slots, orders, momentum - nu, choices, emit);
            choices.pop();
        }
    }
}

/// Ordered ways of writing `total` as `parts` positive integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if total < parts {
        return vec![];
    }
    let mut out = Vec::new();
    for first in 1..=total - (parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn check_supported(sys: &TrigSystem, k: usize, cap: usize) -> Result<()> {
    if k > cap {
        return Err(Error::TooLarge { k, cap });
    }
    if sys.omega().degree() > 1 {
        return Err(Error::UnsupportedOmega);
    }
    Ok(())
}

/// All trees of order `k` whose root line has label `label` and momentum `nu`,
/// with nodes labelled by the modes of `jets`.
pub fn enumerate_trees_with(
    sys: &TrigSystem,
    ctx: &ResonanceContext,
    jets: &JetTable,
    k: usize,
    label: Label,
    nu: i64,
    cap: usize,
) -> Result<Vec<Tree>> {
    check_supported(sys, k, cap)?;
    let mut e = Enumerator {
        jets,
        p: ctx.p,
        q: ctx.q,
        max_momentum: sys.max_abs_momentum(ctx.p, ctx.q),
        memo: HashMap::new(),
    };
    Ok(e.lines(k, label, nu))
}

/// Enumerate with jets taken at `C = 0`; the tree structure only depends
/// on which jets vanish, which is generic in `C`.
pub fn enumerate_trees(sys: &TrigSystem, ctx: &ResonanceContext, k: usize, label: Label, nu: i64) -> Result<Vec<Tree>> {
    check_supported(sys, k, DEFAULT_ORDER_CAP)?;
    let jets = jets_at(sys, ctx, 0.0, k.max(1));
    enumerate_trees_with(sys, ctx, &jets, k, label, nu, DEFAULT_ORDER_CAP)
}

/// Sum of the tree values; equals the series coefficient of the same
/// order, label and momentum in C-mode at phase `t0`.
pub fn tree_sum(sys: &TrigSystem, ctx: &ResonanceContext, t0: f64, k: usize, label: Label, nu: i64) -> Result<Complex64> {
    tree_sum_capped(sys, ctx, t0, k, label, nu, DEFAULT_ORDER_CAP)
}

pub fn tree_sum_capped(
    sys: &TrigSystem,
    ctx: &ResonanceContext,
    t0: f64,
    k: usize,
    label: Label,
    nu: i64,
    cap: usize,
) -> Result<Complex64> {
    check_supported(sys, k, cap)?;
    let (c0, _) = solve_c0(sys, ctx, t0)?;
    let jets = jets_at(sys, ctx, c0, k.max(1));
    let trees = enumerate_trees_with(sys, ctx, &jets, k, label, nu, cap)?;
    Ok(trees.iter().map(|t| t.value(&jets, ctx, t0)).sum())
}

/// Momenta that can carry a nonzero coefficient at order `k`.
pub fn momentum_range(sys: &TrigSystem, ctx: &ResonanceContext, k: usize) -> std::ops::RangeInclusive<i64> {
    let b = 3 * k as i64 * sys.max_abs_momentum(ctx.p, ctx.q);
    -b..=b
}

/// Distinct unlabelled shapes among all trees of order `k`.
pub fn shape_count(sys: &TrigSystem, ctx: &ResonanceContext, k: usize) -> Result<usize> {
    let mut shapes = BTreeSet::new();
    for label in [Label::Alpha, Label::Action, Label::Dissipation] {
        for nu in momentum_range(sys, ctx, k) {
            for t in enumerate_trees(sys, ctx, k, label, nu)? {
                shapes.insert(t.shape());
            }
        }
    }
    Ok(shapes.len())
}
