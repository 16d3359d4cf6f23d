//! Invariants: conjunctions of dependencies `r ≡ φ` that name the temporal
//! subformulas of an input formula, plus the transition and liveness
//! formulas derived from them, and elimination of past-time operators.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::formula::{dependent_var, reserved_index, Formula, FormulaClass};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InvariantError {
    #[error("variable `{0}` lies in the reserved dependent-variable namespace")]
    ReservedVariable(String),
    #[error("past operator cannot be eliminated here: {0}")]
    UnsupportedPastNesting(String),
}

/// Right-hand side of a dependency.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DepBody {
    /// `◇w` for a state formula `w`.
    Diamond(Formula),
    /// `w U w'` for state formulas `w`, `w'`.
    Until(Formula, Formula),
    /// An NL¹ formula.
    Nl1(Formula),
}

impl DepBody {
    pub fn to_formula(&self) -> Formula {
        match self {
            DepBody::Diamond(w) => Formula::diamond(w.clone()),
            DepBody::Until(w, w2) => Formula::until(w.clone(), w2.clone()),
            DepBody::Nl1(t) => t.clone(),
        }
    }

    pub fn is_nl1(&self) -> bool {
        matches!(self, DepBody::Nl1(_))
    }

    fn map(&self, f: impl Fn(&Formula) -> Formula) -> DepBody {
        match self {
            DepBody::Diamond(w) => DepBody::Diamond(f(w)),
            DepBody::Until(w, w2) => DepBody::Until(f(w), f(w2)),
            DepBody::Nl1(t) => DepBody::Nl1(f(t)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dependency {
    pub var: String,
    pub body: DepBody,
}

impl Dependency {
    pub fn new(var: impl Into<String>, body: DepBody) -> Self {
        Dependency {
            var: var.into(),
            body,
        }
    }

    /// `var ≡ body`.
    pub fn to_formula(&self) -> Formula {
        Formula::equiv(Formula::var(self.var.clone()), self.body.to_formula())
    }
}

impl fmt::Display for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Invariant {
    pub deps: Vec<Dependency>,
}

impl Invariant {
    pub fn new(deps: Vec<Dependency>) -> Self {
        Invariant { deps }
    }

    pub fn len(&self) -> usize {
        self.deps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deps.is_empty()
    }

    /// All ◇- and until-dependencies precede every NL¹ dependency.
    pub fn is_ordered(&self) -> bool {
        let first_nl1 = self
            .deps
            .iter()
            .position(|d| d.body.is_nl1())
            .unwrap_or(self.deps.len());
        self.deps[first_nl1..].iter().all(|d| d.body.is_nl1())
    }

    pub fn dependent_vars(&self) -> Vec<String> {
        self.deps.iter().map(|d| d.var.clone()).collect()
    }

    /// The conjunction of all dependencies (`true` when empty).
    pub fn to_formula(&self) -> Formula {
        Formula::conj(self.deps.iter().map(Dependency::to_formula))
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.deps {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

/// A conjunction of implications `η ⊃ ⟐θ`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConditionalLivenessFormula {
    pub implications: Vec<(Formula, Formula)>,
}

impl ConditionalLivenessFormula {
    pub fn new(implications: Vec<(Formula, Formula)>) -> Self {
        ConditionalLivenessFormula { implications }
    }

    pub fn len(&self) -> usize {
        self.implications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.implications.is_empty()
    }

    pub fn to_formula(&self) -> Formula {
        Formula::conj(
            self.implications
                .iter()
                .map(|(eta, theta)| Formula::implies(eta.clone(), Formula::dm(theta.clone()))),
        )
    }
}

impl fmt::Display for ConditionalLivenessFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (eta, theta) in &self.implications {
            writeln!(
                f,
                "{}",
                Formula::implies(eta.clone(), Formula::dm(theta.clone()))
            )?;
        }
        Ok(())
    }
}

/// How [`translate`] builds the invariant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TranslationMode {
    /// Rule-by-rule translation of the primitive form: one dependency per
    /// non-NL¹ node, no sharing.
    Literal,
    /// State subformulas stay inline, identical dependencies are shared and
    /// the initial condition is a state formula.
    #[default]
    Optimized,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Translation {
    pub invariant: Invariant,
    /// State formula that must hold at the first state.
    pub init: Formula,
}

/// Translates a past-free formula into an invariant `I` and an initial
/// condition `init` such that `X` is satisfiable iff `□I ∧ init` is, and
/// `□I ⊃ (init ≡ X)` is valid.
///
/// Dependent variables are numbered from `first + 1`. Reserved names
/// `r1..r<first>` may already appear in `x` (for instance those introduced
/// by [`past_reduce`]); any other reserved name is rejected.
pub fn translate(
    x: &Formula,
    mode: TranslationMode,
    first: usize,
) -> Result<Translation, InvariantError> {
    let mut bad = None;
    let mut has_past = false;
    x.visit(&mut |f| match f {
        Formula::Var(v) if bad.is_none() => {
            if reserved_index(v).is_some_and(|k| k == 0 || k > first) {
                bad = Some(v.clone());
            }
        }
        Formula::Prev(_)
        | Formula::Once(_)
        | Formula::WPrev(_)
        | Formula::SoFar(_)
        | Formula::First => has_past = true,
        _ => {}
    });
    if let Some(v) = bad {
        return Err(InvariantError::ReservedVariable(v));
    }
    if has_past {
        return Err(InvariantError::UnsupportedPastNesting(
            "past operators must be removed before translation".into(),
        ));
    }
    Ok(match mode {
        TranslationMode::Literal => {
            let deps = literal_h(&x.expand());
            let invariant = shift(&Invariant::new(deps), first);
            let init = Formula::var(dependent_var(first + invariant.len()));
            Translation { invariant, init }
        }
        TranslationMode::Optimized => {
            let mut t = Optimizer {
                next: first,
                deps: Vec::new(),
                shared: HashMap::new(),
            };
            let init = t.abstract_state(&x.expand_temporal()).simplify();
            Translation {
                invariant: Invariant::new(t.deps),
                init,
            }
        }
    })
}

/// `H(X)` over the primitive form, numbering from `r1`.
fn literal_h(x: &Formula) -> Vec<Dependency> {
    let r = |k: usize| Formula::var(dependent_var(k));
    if x.classify() <= FormulaClass::Nl1 {
        return vec![Dependency::new(dependent_var(1), DepBody::Nl1(x.clone()))];
    }
    let unary = |y: &Formula, body: fn(Formula) -> DepBody| {
        let mut deps = literal_h(y);
        let m = deps.len();
        deps.push(Dependency::new(dependent_var(m + 1), body(r(m))));
        deps
    };
    let binary = |y: &Formula, z: &Formula, body: fn(Formula, Formula) -> DepBody| {
        let mut deps = literal_h(y);
        let m = deps.len();
        let right = shift(&Invariant::new(literal_h(z)), m).deps;
        let n = right.len();
        deps.extend(right);
        deps.push(Dependency::new(
            dependent_var(m + n + 1),
            body(r(m), r(m + n)),
        ));
        deps
    };
    match x {
        Formula::Not(y) => unary(y, |a| DepBody::Nl1(Formula::not(a))),
        Formula::Next(y) => unary(y, |a| DepBody::Nl1(Formula::next(a))),
        Formula::Diamond(y) => unary(y, DepBody::Diamond),
        Formula::Or(y, z) => binary(y, z, |a, b| DepBody::Nl1(Formula::or(a, b))),
        Formula::Until(y, z) => binary(y, z, DepBody::Until),
        other => unreachable!("non-NL¹ leaf {other:?} in primitive form"),
    }
}

struct Optimizer {
    next: usize,
    deps: Vec<Dependency>,
    shared: HashMap<DepBody, String>,
}

impl Optimizer {
    fn dep(&mut self, body: DepBody) -> Formula {
        let body = body.map(Formula::simplify);
        if let Some(v) = self.shared.get(&body) {
            return Formula::var(v.clone());
        }
        self.next += 1;
        let v = dependent_var(self.next);
        self.shared.insert(body.clone(), v.clone());
        self.deps.push(Dependency::new(v.clone(), body));
        Formula::var(v)
    }

    /// A state formula equivalent to `f` under the dependencies created.
    fn abstract_state(&mut self, f: &Formula) -> Formula {
        match f.classify() {
            FormulaClass::State => return f.clone(),
            FormulaClass::Nl1 => return self.dep(DepBody::Nl1(f.clone())),
            _ => {}
        }
        match f {
            Formula::Diamond(g) => {
                let w = self.abstract_state(g);
                self.dep(DepBody::Diamond(w))
            }
            Formula::Until(g, h) => {
                let w = self.abstract_state(g);
                let w2 = self.abstract_state(h);
                self.dep(DepBody::Until(w, w2))
            }
            Formula::Next(g) => {
                let w = self.abstract_state(g);
                self.dep(DepBody::Nl1(Formula::next(w)))
            }
            Formula::Not(_)
            | Formula::Or(..)
            | Formula::And(..)
            | Formula::Implies(..)
            | Formula::Equiv(..) => f.map_children(|c| self.abstract_state(c)),
            other => unreachable!("unexpanded node {other:?}"),
        }
    }
}

/// `I ↑ k`: every reserved `r_j` becomes `r_{j+k}`, in heads and bodies.
pub fn shift(inv: &Invariant, k: usize) -> Invariant {
    if k == 0 {
        return inv.clone();
    }
    let ren = |v: &str| match reserved_index(v) {
        Some(j) => dependent_var(j + k),
        None => v.to_string(),
    };
    Invariant::new(
        inv.deps
            .iter()
            .map(|d| Dependency::new(ren(&d.var), d.body.map(|f| f.rename(&ren))))
            .collect(),
    )
}

/// Stable partition: ◇- and until-dependencies first, then NL¹ ones.
pub fn order(inv: &Invariant) -> Invariant {
    let (live, nl1): (Vec<_>, Vec<_>) = inv.deps.iter().cloned().partition(|d| !d.body.is_nl1());
    Invariant::new(live.into_iter().chain(nl1).collect())
}

/// `T_I`: each `r ≡ ◇w` becomes `r ≡ (w ∨ ○r)`, each `r ≡ w U w'` becomes
/// `r ≡ (w' ∨ (w ∧ ○r))`; NL¹ dependencies are kept.
pub fn transition_formula(inv: &Invariant) -> Formula {
    Formula::conj(inv.deps.iter().map(|d| {
        let r = Formula::var(d.var.clone());
        let body = match &d.body {
            DepBody::Diamond(w) => Formula::or(w.clone(), Formula::next(r.clone())),
            DepBody::Until(w, w2) => Formula::or(
                w2.clone(),
                Formula::and(w.clone(), Formula::next(r.clone())),
            ),
            DepBody::Nl1(t) => t.clone(),
        };
        Formula::equiv(r, body)
    }))
}

/// `L_I`: one `r ⊃ ⟐θ` per ◇-dependency `r ≡ ◇θ` and per until-dependency
/// `r ≡ w U θ`.
pub fn liveness_formula(inv: &Invariant) -> ConditionalLivenessFormula {
    ConditionalLivenessFormula::new(
        inv.deps
            .iter()
            .filter_map(|d| {
                let theta = match &d.body {
                    DepBody::Diamond(w) => w,
                    DepBody::Until(_, w2) => w2,
                    DepBody::Nl1(_) => return None,
                };
                Some((Formula::var(d.var.clone()), theta.clone()))
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PastReduction {
    /// Past-free formula, satisfiable at the first state iff the input is
    /// satisfiable at some position.
    pub formula: Formula,
    /// Auxiliary variables `r1..r<k>`, one per distinct past subformula.
    pub aux: Vec<String>,
}

/// Eliminates `⊖` and `once`. Each distinct past subformula is replaced by
/// a fresh variable `u` tracking it at every state:
///
/// * `⊖y`: `¬u ∧ □(more ⊃ (○u ≡ y))`
/// * `once w`: `(u ≡ w) ∧ □(more ⊃ (○u ≡ (○w ∨ u)))`
///
/// The result is the conjunction of those constraints with `◇X'`, where
/// `X'` is the input with past subformulas replaced. A past-free input is
/// returned unchanged.
pub fn past_reduce(x: &Formula) -> Result<PastReduction, InvariantError> {
    let mut bad = None;
    x.visit(&mut |f| {
        if let Formula::Var(v) = f {
            if bad.is_none() && reserved_index(v).is_some() {
                bad = Some(v.clone());
            }
        }
    });
    if let Some(v) = bad {
        return Err(InvariantError::ReservedVariable(v));
    }
    let e = x.expand_temporal();
    if e.past_depth() == 0 {
        return Ok(PastReduction {
            formula: x.clone(),
            aux: Vec::new(),
        });
    }
    let mut aux: Vec<String> = Vec::new();
    let mut seen: HashMap<Formula, Formula> = HashMap::new();
    let mut constraints = Vec::new();
    let reduced = e.map_bottom_up(&mut |node| match &node {
        Formula::Prev(_) | Formula::Once(_) => {
            if let Some(u) = seen.get(&node) {
                return u.clone();
            }
            let name = dependent_var(aux.len() + 1);
            aux.push(name.clone());
            let u = Formula::var(name);
            let step = |rhs: Formula| {
                Formula::always(Formula::implies(
                    Formula::More,
                    Formula::equiv(Formula::next(u.clone()), rhs),
                ))
            };
            constraints.push(match &node {
                Formula::Prev(y) => Formula::and(Formula::not(u.clone()), step((**y).clone())),
                Formula::Once(w) => Formula::and(
                    Formula::equiv(u.clone(), (**w).clone()),
                    step(Formula::or(Formula::next((**w).clone()), u.clone())),
                ),
                _ => unreachable!(),
            });
            seen.insert(node, u.clone());
            u
        }
        _ => node,
    });
    constraints.push(Formula::diamond(reduced));
    Ok(PastReduction {
        formula: Formula::conj(constraints),
        aux,
    })
}

/// For a state formula `z` whose past operators are all `⊖s` with `s` a
/// past-free state formula, returns `(T', w')` where `T'` replaces each
/// `⊖s` by `s` and wraps the remaining maximal state subformulas in `○`,
/// and `w'` replaces each `⊖s` by `false`. Then `z` holds at state `k+1`
/// iff `T'` holds at state `k`, and `z` holds at state 0 iff `w'` does.
pub fn past_shift(z: &Formula) -> Result<(Formula, Formula), InvariantError> {
    fn has_past(f: &Formula) -> bool {
        let mut p = false;
        f.visit(&mut |g| {
            p |= matches!(
                g,
                Formula::Prev(_)
                    | Formula::Once(_)
                    | Formula::WPrev(_)
                    | Formula::SoFar(_)
                    | Formula::First
            )
        });
        p
    }
    fn step(f: &Formula) -> Result<(Formula, Formula), InvariantError> {
        if !has_past(f) {
            if !f.is_state() {
                return Err(InvariantError::UnsupportedPastNesting(format!(
                    "temporal subformula `{f}`"
                )));
            }
            return Ok((Formula::next(f.clone()), f.clone()));
        }
        match f {
            Formula::Prev(s) if !has_past(s) && s.is_state() => Ok(((**s).clone(), Formula::False)),
            Formula::Not(_)
            | Formula::Or(..)
            | Formula::And(..)
            | Formula::Implies(..)
            | Formula::Equiv(..) => {
                let mut err = None;
                let mut ws = Vec::new();
                let t = f.map_children(|c| match step(c) {
                    Ok((t, w)) => {
                        ws.push(w);
                        t
                    }
                    Err(e) => {
                        err.get_or_insert(e);
                        Formula::True
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                let mut it = ws.into_iter();
                let w = f.map_children(|_| it.next().expect("child count"));
                Ok((t, w))
            }
            other => Err(InvariantError::UnsupportedPastNesting(format!(
                "`{other}` is not a previous-state test of a state formula"
            ))),
        }
    }
    step(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn f(s: &str) -> Formula {
        crate::parser::parse_with(
            s,
            crate::parser::ParseOptions {
                allow_reserved: true,
            },
        )
        .unwrap()
    }

    #[test]
    fn nl1_input_is_one_dependency() {
        let t = translate(&parse("p & next q").unwrap(), TranslationMode::Literal, 0).unwrap();
        assert_eq!(t.invariant.len(), 1);
        assert_eq!(t.init, Formula::var("r1"));
        let t = translate(&parse("<>p").unwrap(), TranslationMode::Literal, 0).unwrap();
        assert_eq!(t.invariant.to_string(), "r1 <-> p\nr2 <-> <> r1\n");
    }

    #[test]
    fn optimized_running_example() {
        let t = translate(
            &parse("[]<>p & []<>~p").unwrap(),
            TranslationMode::Optimized,
            0,
        )
        .unwrap();
        assert_eq!(
            t.invariant.to_string(),
            "r1 <-> <> p\nr2 <-> <> ~r1\nr3 <-> <> ~p\nr4 <-> <> ~r3\n"
        );
        assert_eq!(t.init, f("~r2 & ~r4"));
    }

    #[test]
    fn optimized_shares_subformulas() {
        let t = translate(&parse("<>p | ~<>p").unwrap(), TranslationMode::Optimized, 0).unwrap();
        assert_eq!(t.invariant.len(), 1);
    }

    #[test]
    fn reserved_names_rejected() {
        assert_eq!(
            translate(&f("r1 & p"), TranslationMode::Optimized, 0),
            Err(InvariantError::ReservedVariable("r1".into()))
        );
        assert!(translate(&f("r1 & <>p"), TranslationMode::Optimized, 1).is_ok());
    }

    #[test]
    fn shifting() {
        let i = Invariant::new(vec![
            Dependency::new("r1", DepBody::Nl1(f("p"))),
            Dependency::new("r2", DepBody::Diamond(f("r1"))),
        ]);
        assert_eq!(shift(&i, 1).to_string(), "r2 <-> p\nr3 <-> <> r2\n");
        assert_eq!(shift(&i, 0), i);
    }

    #[test]
    fn ordering_is_stable() {
        let i = Invariant::new(vec![
            Dependency::new("r1", DepBody::Nl1(f("next r1"))),
            Dependency::new("r2", DepBody::Diamond(f("p"))),
            Dependency::new("r3", DepBody::Until(f("p"), f("q"))),
        ]);
        assert!(!i.is_ordered());
        let o = order(&i);
        assert!(o.is_ordered());
        assert_eq!(o.dependent_vars(), ["r2", "r3", "r1"]);
        assert_eq!(order(&o), o);
    }

    #[test]
    fn transition_and_liveness_of_i1() {
        let i1 = Invariant::new(vec![
            Dependency::new("r1", DepBody::Diamond(f("p & ~q"))),
            Dependency::new("r2", DepBody::Nl1(f("r1 & next r2"))),
        ]);
        assert_eq!(
            transition_formula(&i1),
            f("(r1 <-> (p & ~q) | next r1) & (r2 <-> r1 & next r2)")
        );
        let l = liveness_formula(&i1);
        assert_eq!(l.implications, vec![(f("r1"), f("p & ~q"))]);
        assert_eq!(l.to_formula(), f("r1 -> dm (p & ~q)"));
    }

    #[test]
    fn until_dependency_forms() {
        let i = Invariant::new(vec![Dependency::new("r1", DepBody::Until(f("p"), f("q")))]);
        assert_eq!(transition_formula(&i), f("r1 <-> q | p & next r1"));
        assert_eq!(liveness_formula(&i).implications, vec![(f("r1"), f("q"))]);
    }

    #[test]
    fn past_shift_fragment() {
        let (t, w) = past_shift(&parse("p | prev (q & r)").unwrap()).unwrap();
        assert_eq!(t, f("next p | q & r"));
        assert_eq!(w, Formula::or(Formula::var("p"), Formula::False));
        assert!(matches!(
            past_shift(&parse("prev <> p").unwrap()),
            Err(InvariantError::UnsupportedPastNesting(_))
        ));
    }

    #[test]
    fn past_reduce_allocates_shared_variables() {
        let r = past_reduce(&parse("once p & ~once p | prev q").unwrap()).unwrap();
        assert_eq!(r.aux, ["r1", "r2"]);
        assert_eq!(r.formula.past_depth(), 0);
        let plain = parse("<>p").unwrap();
        assert_eq!(past_reduce(&plain).unwrap().formula, plain);
    }
}
