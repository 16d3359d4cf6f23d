//! Transition configurations `□T ∧ X`, their construction from ordered
//! invariants, enabled liveness tests and small-model bounds.

use std::fmt;

use crate::formula::Formula;
use crate::interval::{VAtom, VariableContext};
use crate::invariants::{
    liveness_formula, transition_formula, ConditionalLivenessFormula, Invariant,
};

/// Which kinds of interval to decide over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    Finite,
    Infinite,
    #[default]
    Both,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigKind {
    /// `init ∧ finite`
    FiniteTime { init: Formula },
    /// `init ∧ □◇⁺L`
    InfiniteTime {
        init: Formula,
        liveness: ConditionalLivenessFormula,
    },
    /// `w ∧ empty`
    Final { w: Formula },
    /// `α ∧ L ∧ □◇⁺(α ∧ L)`
    Periodic {
        alpha: VAtom,
        liveness: ConditionalLivenessFormula,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionConfiguration {
    pub t: Formula,
    pub kind: ConfigKind,
    pub ctx: VariableContext,
}

/// Conjunction of literals describing `alpha` over `ctx`.
pub fn atom_formula(alpha: &VAtom, ctx: &VariableContext) -> Formula {
    Formula::conj(ctx.names().iter().enumerate().map(|(i, v)| {
        if alpha.get(i) {
            Formula::var(v.clone())
        } else {
            Formula::not(Formula::var(v.clone()))
        }
    }))
}

impl TransitionConfiguration {
    pub fn liveness(&self) -> Option<&ConditionalLivenessFormula> {
        match &self.kind {
            ConfigKind::InfiniteTime { liveness, .. } | ConfigKind::Periodic { liveness, .. } => {
                Some(liveness)
            }
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ConfigKind::FiniteTime { .. } => "finite-time",
            ConfigKind::InfiniteTime { .. } => "infinite-time",
            ConfigKind::Final { .. } => "final",
            ConfigKind::Periodic { .. } => "periodic",
        }
    }

    /// The configuration as a single PTL formula.
    pub fn to_formula(&self) -> Formula {
        let box_t = Formula::always(self.t.clone());
        let live =
            |l: &ConditionalLivenessFormula| Formula::always(Formula::sdiamond(l.to_formula()));
        match &self.kind {
            ConfigKind::FiniteTime { init } => {
                Formula::conj([box_t, init.clone(), Formula::Finite])
            }
            ConfigKind::InfiniteTime { init, liveness } => {
                Formula::conj([box_t, init.clone(), live(liveness)])
            }
            ConfigKind::Final { w } => Formula::conj([self.t.clone(), w.clone(), Formula::Empty]),
            ConfigKind::Periodic { alpha, liveness } => {
                let a = atom_formula(alpha, &self.ctx);
                let al = Formula::and(a.clone(), liveness.to_formula());
                Formula::conj([
                    box_t,
                    a,
                    liveness.to_formula(),
                    Formula::always(Formula::sdiamond(al)),
                ])
            }
        }
    }

    /// For an infinite-time configuration, the formula
    /// `⊡T ∧ init ∧ ◇(L ∧ finite ∧ more ∧ (V ≈ V))` which is satisfiable in
    /// finite time iff the configuration is satisfiable. `V ≈ V` says every
    /// variable ends with its initial value.
    pub fn finite_reduction(&self) -> Option<Formula> {
        let ConfigKind::InfiniteTime { init, liveness } = &self.kind else {
            return None;
        };
        let same_ends = Formula::implies(
            Formula::Finite,
            Formula::conj(self.ctx.names().iter().map(|v| {
                Formula::equiv(
                    Formula::var(v.clone()),
                    Formula::fin(Formula::var(v.clone())),
                )
            })),
        );
        Some(Formula::conj([
            Formula::bm(self.t.clone()),
            init.clone(),
            Formula::diamond(Formula::conj([
                liveness.to_formula(),
                Formula::Finite,
                Formula::More,
                same_ends,
            ])),
        ]))
    }
}

impl fmt::Display for TransitionConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration", self.kind_name())?;
        writeln!(f, "  vars: {}", self.ctx.names().join(" "))?;
        writeln!(f, "  T: {}", self.t)?;
        match &self.kind {
            ConfigKind::FiniteTime { init } => writeln!(f, "  init: {init}")?,
            ConfigKind::InfiniteTime { init, liveness } => {
                writeln!(f, "  init: {init}")?;
                writeln!(f, "  L: {}", liveness.to_formula())?;
            }
            ConfigKind::Final { w } => writeln!(f, "  w: {w}")?,
            ConfigKind::Periodic { alpha, liveness } => {
                writeln!(f, "  alpha: {}", alpha.display(&self.ctx))?;
                writeln!(f, "  L: {}", liveness.to_formula())?;
            }
        }
        writeln!(f, "  formula: {}", self.to_formula())?;
        if let Some(r) = self.finite_reduction() {
            writeln!(f, "  finite reduction: {r}")?;
        }
        Ok(())
    }
}

/// Builds the finite-time and/or infinite-time configurations of `□I ∧
/// init`. The context is `source` extended with every variable of `I` and
/// `init`.
pub fn build_configs(
    inv: &Invariant,
    init: &Formula,
    source: &VariableContext,
    mode: Mode,
) -> Vec<TransitionConfiguration> {
    debug_assert!(inv.is_ordered());
    let mut ctx = source.clone();
    for v in inv.dependent_vars() {
        ctx.push(v);
    }
    for v in inv.to_formula().vars().into_iter().chain(init.vars()) {
        ctx.push(v);
    }
    let t = transition_formula(inv);
    let mut out = Vec::new();
    if mode != Mode::Infinite {
        out.push(TransitionConfiguration {
            t: t.clone(),
            kind: ConfigKind::FiniteTime { init: init.clone() },
            ctx: ctx.clone(),
        });
    }
    if mode != Mode::Finite {
        out.push(TransitionConfiguration {
            t,
            kind: ConfigKind::InfiniteTime {
                init: init.clone(),
                liveness: liveness_formula(inv),
            },
            ctx,
        });
    }
    out
}

/// The liveness tests of `L` whose guards hold at `alpha`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnabledLiveness {
    pub indices: Vec<usize>,
    pub thetas: Vec<Formula>,
}

/// `En_{L,α}`. Guards must be state formulas over `ctx`.
pub fn enabled(
    l: &ConditionalLivenessFormula,
    alpha: &VAtom,
    ctx: &VariableContext,
) -> EnabledLiveness {
    let val = |v: &str| {
        let i = ctx
            .index_of(v)
            .unwrap_or_else(|| panic!("guard variable `{v}` missing from context"));
        alpha.get(i)
    };
    let mut en = EnabledLiveness::default();
    for (k, (eta, theta)) in l.implications.iter().enumerate() {
        if eta
            .eval_state(&val)
            .expect("liveness guard is a state formula")
        {
            en.indices.push(k);
            en.thetas.push(theta.clone());
        }
    }
    en
}

/// Small-model bounds. Lengths are interval lengths (states minus one);
/// the prefix bound counts prefix states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub finite_max_length: u128,
    pub infinite_prefix_max: u128,
    pub infinite_period_max: u128,
}

pub fn bounds(tc: &TransitionConfiguration) -> Bounds {
    let atoms: u128 = 1u128.checked_shl(tc.ctx.len() as u32).unwrap_or(u128::MAX);
    let l = tc.liveness().map_or(0, |l| l.len()) as u128;
    Bounds {
        finite_max_length: atoms - 1,
        infinite_prefix_max: atoms - 1,
        infinite_period_max: (l + 1).saturating_mul(atoms),
    }
}
