//! Symbolic decision procedure over BDDs.
//!
//! A transition configuration `□T ∧ ...` is compiled into three BDDs:
//! `Γ1` (initial states), `Γ2` (the step relation over `V ∪ V'`, obtained by
//! *flattening* `T`) and `Γ3` (states on which a one-state interval
//! satisfies `T`). Finite-time satisfiability is a forward image iteration
//! that stops at the first `Δ_k` meeting `Γ3` or when the union of the
//! `Δ`s converges. Infinite-time satisfiability searches for a reachable
//! loop head whose strongly connected neighbourhood meets every enabled
//! liveness test.

use thiserror::Error;

use crate::bdd::{BddError, BddManager, BddRef};
use crate::formula::{Formula, FormulaClass};
use crate::interval::{FiniteInterval, LassoInterval, VAtom, VariableContext};
use crate::invariants::{
    order, past_reduce, translate, InvariantError, Translation, TranslationMode,
};
use crate::transconf::{build_configs, enabled, ConfigKind, Mode, TransitionConfiguration};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("formula is not in NL1: {0}")]
    NotNl1(String),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Bdd(#[from] BddError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InconclusiveReason {
    IterationCap,
    NodeLimit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    SatFinite(FiniteInterval),
    SatInfinite(LassoInterval),
    Unsat,
    Inconclusive(InconclusiveReason),
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::SatFinite(_) | Verdict::SatInfinite(_))
    }

    /// Restricts a model to the variables of `target`.
    pub fn project(&self, ctx: &VariableContext, target: &VariableContext) -> Verdict {
        match self {
            Verdict::SatFinite(s) => Verdict::SatFinite(s.project(ctx, target)),
            Verdict::SatInfinite(l) => Verdict::SatInfinite(l.project(ctx, target)),
            other => other.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum NextMode {
    Prime,
    False,
    Forbid,
}

fn compile(
    m: &mut BddManager,
    f: &Formula,
    mode: NextMode,
    primed: bool,
) -> Result<BddRef, EngineError> {
    let rec = |m: &mut BddManager, g: &Formula| compile(m, g, mode, primed);
    Ok(match f {
        Formula::Var(v) => {
            if primed {
                m.var(&VariableContext::primed(v))?
            } else {
                m.var(v)?
            }
        }
        Formula::True => BddRef::TRUE,
        Formula::False => BddRef::FALSE,
        Formula::Not(a) => {
            let a = rec(m, a)?;
            m.not(a)
        }
        Formula::Or(a, b) => {
            let (a, b) = (rec(m, a)?, rec(m, b)?);
            m.or(a, b)
        }
        Formula::And(a, b) => {
            let (a, b) = (rec(m, a)?, rec(m, b)?);
            m.and(a, b)
        }
        Formula::Implies(a, b) => {
            let (a, b) = (rec(m, a)?, rec(m, b)?);
            m.implies(a, b)
        }
        Formula::Equiv(a, b) => {
            let (a, b) = (rec(m, a)?, rec(m, b)?);
            m.iff(a, b)
        }
        Formula::Next(a) => match mode {
            NextMode::Prime if !primed => compile(m, a, mode, true)?,
            NextMode::False => BddRef::FALSE,
            _ => return Err(EngineError::NotNl1(f.to_string())),
        },
        other => return Err(EngineError::NotNl1(other.to_string())),
    })
}

fn check_nl1(t: &Formula) -> Result<Formula, EngineError> {
    if t.classify() > FormulaClass::Nl1 {
        return Err(EngineError::NotNl1(t.to_string()));
    }
    Ok(t.expand_temporal())
}

/// `Γ2`: variables under `○` are primed and the `○`s dropped.
pub fn flatten(m: &mut BddManager, t: &Formula) -> Result<BddRef, EngineError> {
    let e = check_nl1(t)?;
    compile(m, &e, NextMode::Prime, false)
}

/// `Γ3`: every `○` construct replaced by `false`.
pub fn gamma3(m: &mut BddManager, t: &Formula) -> Result<BddRef, EngineError> {
    let e = check_nl1(t)?;
    compile(m, &e, NextMode::False, false)
}

/// BDD of a state formula over `V`.
pub fn state_bdd(m: &mut BddManager, w: &Formula) -> Result<BddRef, EngineError> {
    let e = w.expand_temporal();
    compile(m, &e, NextMode::Forbid, false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymbolicConfig {
    pub gamma1: BddRef,
    pub gamma2: BddRef,
    pub gamma3: BddRef,
    pub iteration_cap: u64,
}

impl SymbolicConfig {
    /// Compiles `T` and `init`. The default cap is `2^|V|`.
    pub fn new(
        m: &mut BddManager,
        t: &Formula,
        init: &Formula,
        cap: Option<u64>,
    ) -> Result<Self, EngineError> {
        Ok(SymbolicConfig {
            gamma1: state_bdd(m, init)?,
            gamma2: flatten(m, t)?,
            gamma3: gamma3(m, t)?,
            iteration_cap: cap.unwrap_or_else(|| m.context().atom_count()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachTrace {
    pub deltas: Vec<BddRef>,
    pub union: BddRef,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Image and preimage computations performed.
    pub iterations: u64,
    /// BDD nodes allocated (nodes are never freed, so this is the peak).
    pub peak_nodes: usize,
    /// Loop-head candidates examined by the infinite-time search.
    pub candidates: u64,
}

/// Image and preimage under `Γ2`, with iteration accounting.
struct Stepper<'a> {
    m: &'a mut BddManager,
    gamma2: BddRef,
    stats: Stats,
}

type Step<T> = Result<T, InconclusiveReason>;

impl Stepper<'_> {
    fn guard(&self) -> Step<()> {
        if self.m.overflowed() {
            Err(InconclusiveReason::NodeLimit)
        } else {
            Ok(())
        }
    }

    /// `(∃V(s ∧ Γ2))[V'→V]`
    fn image(&mut self, s: BddRef) -> Step<BddRef> {
        self.stats.iterations += 1;
        let a = self.m.and(s, self.gamma2);
        let e = self.m.exists_all(false, a);
        let r = self.m.swap_primed(e);
        self.guard()?;
        Ok(r)
    }

    /// `∃V'(Γ2 ∧ s[V→V'])`
    fn preimage(&mut self, s: BddRef) -> Step<BddRef> {
        self.stats.iterations += 1;
        let sp = self.m.swap_primed(s);
        let a = self.m.and(self.gamma2, sp);
        let r = self.m.exists_all(true, a);
        self.guard()?;
        Ok(r)
    }

    /// Closure of `s` under image (or preimage when `backward`), reached
    /// in at most `cap` steps.
    fn closure(&mut self, s: BddRef, backward: bool, cap: u64) -> Step<BddRef> {
        let mut acc = s;
        let mut frontier = s;
        for _ in 0..=cap {
            if frontier.is_false() {
                return Ok(acc);
            }
            let next = if backward {
                self.preimage(frontier)?
            } else {
                self.image(frontier)?
            };
            let nacc = self.m.not(acc);
            frontier = self.m.and(next, nacc);
            acc = self.m.or(acc, frontier);
        }
        Err(InconclusiveReason::IterationCap)
    }

    /// Shortest path from some state of `from` to some state of `to`, as a
    /// list of atoms (first in `from`, last in `to`).
    fn shortest_path(&mut self, from: BddRef, to: BddRef, cap: u64) -> Step<Option<Vec<VAtom>>> {
        let mut layers = vec![from];
        let mut seen = from;
        loop {
            let last = *layers.last().expect("nonempty");
            let hit = self.m.and(last, to);
            if !hit.is_false() {
                let mut x = self.m.pick_full_atom(hit).expect("nonempty hit");
                let mut path = vec![x.clone()];
                for layer in layers[..layers.len() - 1].iter().rev() {
                    let cube = self.m.atom_cube(&x, false);
                    let pre = self.preimage(cube)?;
                    let cand = self.m.and(*layer, pre);
                    x = self.m.pick_full_atom(cand).expect("layer predecessor");
                    path.push(x.clone());
                }
                path.reverse();
                return Ok(Some(path));
            }
            if layers.len() as u64 > cap {
                return Err(InconclusiveReason::IterationCap);
            }
            let img = self.image(last)?;
            let nseen = self.m.not(seen);
            let frontier = self.m.and(img, nseen);
            if frontier.is_false() {
                return Ok(None);
            }
            seen = self.m.or(seen, frontier);
            layers.push(frontier);
        }
    }
}

pub enum FiniteOutcome {
    /// `Δ_n ∧ Γ3` is the first nonempty intersection.
    Hit(usize),
    Unsat,
    Inconclusive(InconclusiveReason),
}

/// Forward `Δ` iteration for `□T ∧ init ∧ finite`.
pub fn reach_finite(
    m: &mut BddManager,
    cfg: &SymbolicConfig,
    stats: &mut Stats,
) -> (FiniteOutcome, ReachTrace) {
    let mut st = Stepper {
        m,
        gamma2: cfg.gamma2,
        stats: *stats,
    };
    let mut trace = ReachTrace {
        deltas: vec![cfg.gamma1],
        union: cfg.gamma1,
    };
    let outcome = loop {
        let k = trace.deltas.len() - 1;
        let last = trace.deltas[k];
        if !st.m.and(last, cfg.gamma3).is_false() {
            break FiniteOutcome::Hit(k);
        }
        if k as u64 >= cfg.iteration_cap {
            break FiniteOutcome::Inconclusive(InconclusiveReason::IterationCap);
        }
        let next = match st.image(last) {
            Ok(n) => n,
            Err(r) => break FiniteOutcome::Inconclusive(r),
        };
        let union = st.m.or(trace.union, next);
        if union == trace.union {
            break FiniteOutcome::Unsat;
        }
        trace.union = union;
        trace.deltas.push(next);
    };
    *stats = st.stats;
    stats.peak_nodes = m.node_count();
    (outcome, trace)
}

/// Backward pass: `γ_n ∈ Δ_n ∧ Γ3`, then `γ_{k-1} ∈ ∃V'(Δ_{k-1} ∧ Γ2 ∧
/// γ_k[V→V'])`, each picked with [`BddManager::pick_full_atom`].
pub fn extract_finite_model(
    m: &mut BddManager,
    trace: &ReachTrace,
    cfg: &SymbolicConfig,
    n: usize,
) -> FiniteInterval {
    let last = m.and(trace.deltas[n], cfg.gamma3);
    let mut gamma = m
        .pick_full_atom(last)
        .expect("final layer meets the final-state set");
    let mut states = vec![gamma.clone()];
    for k in (1..=n).rev() {
        let next = m.atom_cube(&gamma, true);
        let a = m.and(trace.deltas[k - 1], cfg.gamma2);
        let a = m.and(a, next);
        let pre = m.exists_all(true, a);
        gamma = m
            .pick_full_atom(pre)
            .expect("every layer state has a predecessor in the previous layer");
        states.push(gamma.clone());
    }
    states.reverse();
    FiniteInterval::new(states)
}

pub fn decide_finite(m: &mut BddManager, cfg: &SymbolicConfig, stats: &mut Stats) -> Verdict {
    let (outcome, trace) = reach_finite(m, cfg, stats);
    match outcome {
        FiniteOutcome::Hit(n) => Verdict::SatFinite(extract_finite_model(m, &trace, cfg, n)),
        FiniteOutcome::Unsat => Verdict::Unsat,
        FiniteOutcome::Inconclusive(r) => Verdict::Inconclusive(r),
    }
}

/// Lasso search for `□T ∧ init ∧ □◇⁺L`. `thetas` holds the compiled
/// liveness tests `(η_k, θ_k)` of `L` as formulas; they are evaluated on
/// loop-head candidates in `m`'s context.
pub fn decide_infinite(
    m: &mut BddManager,
    cfg: &SymbolicConfig,
    liveness: &crate::invariants::ConditionalLivenessFormula,
    stats: &mut Stats,
) -> Result<Verdict, EngineError> {
    let ctx = m.context().clone();
    let thetas = liveness
        .implications
        .iter()
        .map(|(_, theta)| state_bdd(m, theta))
        .collect::<Result<Vec<_>, _>>()?;
    let mut st = Stepper {
        m,
        gamma2: cfg.gamma2,
        stats: *stats,
    };
    let verdict = search_lasso(&mut st, cfg, liveness, &thetas, &ctx);
    *stats = st.stats;
    stats.peak_nodes = m.node_count();
    Ok(verdict.unwrap_or_else(Verdict::Inconclusive))
}

fn search_lasso(
    st: &mut Stepper<'_>,
    cfg: &SymbolicConfig,
    liveness: &crate::invariants::ConditionalLivenessFormula,
    thetas: &[BddRef],
    ctx: &VariableContext,
) -> Step<Verdict> {
    let cap = cfg.iteration_cap;
    let reach = st.closure(cfg.gamma1, false, cap)?;
    // states of Reach with an infinite path: greatest fixpoint of Z ∧ pre(Z)
    let mut live = reach;
    loop {
        let pre = st.preimage(live)?;
        let next = st.m.and(live, pre);
        if next == live {
            break;
        }
        live = next;
    }
    let mut candidates = live;
    while let Some(beta) = st.m.pick_full_atom(candidates) {
        st.stats.candidates += 1;
        let bcube = st.m.atom_cube(&beta, false);
        let nb = st.m.not(bcube);
        candidates = st.m.and(candidates, nb);

        let succ = st.image(bcube)?;
        let fwd = st.closure(succ, false, cap)?;
        if st.m.and(fwd, bcube).is_false() {
            continue;
        }
        let bwd = st.closure(bcube, true, cap)?;
        let scc = st.m.and(fwd, bwd);
        let en = enabled(liveness, &beta, ctx);
        let targets: Vec<BddRef> = en
            .indices
            .iter()
            .map(|&k| st.m.and(scc, thetas[k]))
            .collect();
        if targets.iter().any(|t| t.is_false()) {
            continue;
        }

        let prefix = st
            .shortest_path(cfg.gamma1, bcube, cap)?
            .expect("loop head is reachable");
        // period: β → γ1 → ... → γm → β along shortest legs, skipping tests
        // already met by a state visited earlier in the period
        let mut cycle = vec![beta.clone()];
        for t in &targets {
            let met = cycle.iter().any(|s| {
                let c = st.m.atom_cube(s, false);
                !st.m.and(c, *t).is_false()
            });
            if met {
                continue;
            }
            let from = st.m.atom_cube(cycle.last().expect("nonempty"), false);
            let leg = st
                .shortest_path(from, *t, cap)?
                .expect("target in the loop");
            cycle.extend_from_slice(&leg[1..]);
        }
        let from = st.m.atom_cube(cycle.last().expect("nonempty"), false);
        if cycle.len() == 1 {
            let start = st.image(from)?;
            let leg = st
                .shortest_path(start, bcube, cap)?
                .expect("β is on a cycle");
            cycle.extend(leg);
        } else {
            let leg = st
                .shortest_path(from, bcube, cap)?
                .expect("β is on a cycle");
            cycle.extend_from_slice(&leg[1..]);
        }
        cycle.pop();
        let mut prefix = prefix;
        prefix.pop();
        return Ok(Verdict::SatInfinite(LassoInterval::new(prefix, cycle)));
    }
    Ok(Verdict::Unsat)
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub mode: Mode,
    pub translation: TranslationMode,
    /// Iteration cap; `2^|V|` when absent.
    pub max_iters: Option<u64>,
    pub node_limit: Option<usize>,
    /// Render `Γ1`, `Γ2`, `Γ3` of every configuration as DOT.
    pub dump_bdd: bool,
}

#[derive(Clone, Debug)]
pub struct Decision {
    /// Verdict with models over the full variable set `ctx`.
    pub verdict: Verdict,
    /// User variables of the input, in first-occurrence order.
    pub user_ctx: VariableContext,
    /// User variables, past-tracking variables and dependent variables.
    pub ctx: VariableContext,
    /// Variables introduced for past subformulas.
    pub past_vars: Vec<String>,
    /// The past-free formula handed to the translator.
    pub reduced: Formula,
    pub translation: Translation,
    pub configs: Vec<TransitionConfiguration>,
    pub stats: Stats,
    pub bdd_dot: Vec<String>,
}

impl Decision {
    pub fn projected(&self) -> Verdict {
        self.verdict.project(&self.ctx, &self.user_ctx)
    }
}

/// Full pipeline: past elimination, translation, ordering, configuration
/// building and symbolic search. With [`Mode::Both`] the finite-time
/// configuration is tried first.
pub fn decide(x: &Formula, opts: &Options) -> Result<Decision, EngineError> {
    let user_ctx = VariableContext::new(x.vars());
    let reduction = past_reduce(x)?;
    let translation = translate(&reduction.formula, opts.translation, reduction.aux.len())?;
    let ordered = order(&translation.invariant);
    let mut source = user_ctx.clone();
    for v in &reduction.aux {
        source.push(v.clone());
    }
    let configs = build_configs(&ordered, &translation.init, &source, opts.mode);
    let ctx = configs[0].ctx.clone();

    let mut m = BddManager::new(&ctx);
    m.set_node_limit(opts.node_limit);
    let mut stats = Stats::default();
    let mut bdd_dot = Vec::new();
    let mut verdict = Verdict::Unsat;
    for tc in &configs {
        let init = match &tc.kind {
            ConfigKind::FiniteTime { init } | ConfigKind::InfiniteTime { init, .. } => init,
            _ => unreachable!("only finite- and infinite-time configurations are built"),
        };
        let cfg = SymbolicConfig::new(&mut m, &tc.t, init, opts.max_iters)?;
        if opts.dump_bdd {
            bdd_dot.push(m.to_dot(&[
                ("gamma1".into(), cfg.gamma1),
                ("gamma2".into(), cfg.gamma2),
                ("gamma3".into(), cfg.gamma3),
            ]));
        }
        let v = if m.overflowed() {
            Verdict::Inconclusive(InconclusiveReason::NodeLimit)
        } else {
            match &tc.kind {
                ConfigKind::FiniteTime { .. } => decide_finite(&mut m, &cfg, &mut stats),
                ConfigKind::InfiniteTime { liveness, .. } => {
                    decide_infinite(&mut m, &cfg, liveness, &mut stats)?
                }
                _ => unreachable!(),
            }
        };
        match v {
            Verdict::Unsat => {}
            Verdict::Inconclusive(_) => {
                if verdict == Verdict::Unsat {
                    verdict = v;
                }
            }
            sat => {
                verdict = sat;
                break;
            }
        }
    }
    stats.peak_nodes = m.node_count();
    Ok(Decision {
        verdict,
        user_ctx,
        ctx,
        past_vars: reduction.aux,
        reduced: reduction.formula,
        translation: Translation {
            invariant: ordered,
            init: translation.init,
        },
        configs,
        stats,
        bdd_dot,
    })
}
