//! Abstract syntax for propositional linear-time temporal logic with
//! `until` and bounded past time.
//!
//! Derived operators are ordinary AST nodes so that dumps stay close to the
//! notation a user wrote. [`Formula::expand`] rewrites every derived node into
//! the nine primitive constructors (`Var`, `True`, `Not`, `Or`, `Next`,
//! `Diamond`, `Until`, `Prev`, `Once`) and every later pipeline stage works on
//! that primitive form.

use std::collections::HashSet;
use std::fmt;

/// Prefix of the reserved dependent-variable namespace (`r1`, `r2`, ...).
pub const RESERVED_PREFIX: char = 'r';

/// Returns the index `k` when `name` is the reserved variable `r<k>`.
pub fn reserved_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix(RESERVED_PREFIX)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Name of the `k`-th dependent variable.
pub fn dependent_var(k: usize) -> String {
    format!("{RESERVED_PREFIX}{k}")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    // primitives
    Var(String),
    True,
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Diamond(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Prev(Box<Formula>),
    Once(Box<Formula>),

    // derived
    False,
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
    /// Henceforth, `[]`.
    Always(Box<Formula>),
    WNext(Box<Formula>),
    /// Eventually in the strict future.
    SDiamond(Box<Formula>),
    More,
    Empty,
    Skip,
    Finite,
    Inf,
    /// Strong test of the final state.
    Sfin(Box<Formula>),
    /// Weak test of the final state.
    Fin(Box<Formula>),
    /// Sometime before the very end.
    Dm(Box<Formula>),
    /// Henceforth except perhaps at the very end.
    Bm(Box<Formula>),
    WPrev(Box<Formula>),
    SoFar(Box<Formula>),
    First,
    /// Empty interval with test, `X?`.
    Test(Box<Formula>),
}

/// Syntactic class of a formula, ordered by inclusion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FormulaClass {
    /// No temporal operators.
    State,
    /// `Next` is the only temporal operator and is never nested.
    Nl1,
    /// Future-only formula outside NL¹ (including NL with nested `Next`).
    Ptl,
    /// Contains `Prev` or `Once`.
    PtlPast,
}

impl fmt::Display for FormulaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FormulaClass::State => "state",
            FormulaClass::Nl1 => "NL1",
            FormulaClass::Ptl => "PTL",
            FormulaClass::PtlPast => "PTL+past",
        };
        f.write_str(s)
    }
}

fn bx(f: Formula) -> Box<Formula> {
    Box::new(f)
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(bx(f))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(bx(a), bx(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(bx(a), bx(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(bx(a), bx(b))
    }

    pub fn equiv(a: Formula, b: Formula) -> Formula {
        Formula::Equiv(bx(a), bx(b))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(bx(f))
    }

    pub fn wnext(f: Formula) -> Formula {
        Formula::WNext(bx(f))
    }

    pub fn diamond(f: Formula) -> Formula {
        Formula::Diamond(bx(f))
    }

    pub fn always(f: Formula) -> Formula {
        Formula::Always(bx(f))
    }

    pub fn sdiamond(f: Formula) -> Formula {
        Formula::SDiamond(bx(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(bx(a), bx(b))
    }

    pub fn prev(f: Formula) -> Formula {
        Formula::Prev(bx(f))
    }

    pub fn wprev(f: Formula) -> Formula {
        Formula::WPrev(bx(f))
    }

    pub fn once(f: Formula) -> Formula {
        Formula::Once(bx(f))
    }

    pub fn so_far(f: Formula) -> Formula {
        Formula::SoFar(bx(f))
    }

    pub fn sfin(f: Formula) -> Formula {
        Formula::Sfin(bx(f))
    }

    pub fn fin(f: Formula) -> Formula {
        Formula::Fin(bx(f))
    }

    pub fn dm(f: Formula) -> Formula {
        Formula::Dm(bx(f))
    }

    pub fn bm(f: Formula) -> Formula {
        Formula::Bm(bx(f))
    }

    pub fn test(f: Formula) -> Formula {
        Formula::Test(bx(f))
    }

    /// Conjunction of all items; `True` when empty.
    pub fn conj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Disjunction of all items; `False` when empty.
    pub fn disj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    /// Direct subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        use Formula::*;
        match self {
            Var(_) | True | False | More | Empty | Skip | Finite | Inf | First => vec![],
            Not(a) | Next(a) | Diamond(a) | Prev(a) | Once(a) | Always(a) | WNext(a)
            | SDiamond(a) | Sfin(a) | Fin(a) | Dm(a) | Bm(a) | WPrev(a) | SoFar(a) | Test(a) => {
                vec![a]
            }
            Or(a, b) | Until(a, b) | And(a, b) | Implies(a, b) | Equiv(a, b) => vec![a, b],
        }
    }

    pub fn is_primitive_node(&self) -> bool {
        matches!(
            self,
            Formula::Var(_)
                | Formula::True
                | Formula::Not(_)
                | Formula::Or(..)
                | Formula::Next(_)
                | Formula::Diamond(_)
                | Formula::Until(..)
                | Formula::Prev(_)
                | Formula::Once(_)
        )
    }

    /// True when every node of the formula is a primitive constructor.
    pub fn is_primitive(&self) -> bool {
        self.is_primitive_node() && self.children().into_iter().all(Formula::is_primitive)
    }

    /// Rewrites every derived operator into primitive constructors.
    pub fn expand(&self) -> Formula {
        self.expand_impl(false)
    }

    /// Rewrites derived temporal operators but keeps the boolean connectives
    /// `False`, `And`, `Implies` and `Equiv`. The result has the same
    /// temporal skeleton as [`Formula::expand`].
    pub fn expand_temporal(&self) -> Formula {
        self.expand_impl(true)
    }

    fn expand_impl(&self, keep_bool: bool) -> Formula {
        use Formula as F;
        let e = |f: &Formula| f.expand_impl(keep_bool);
        let and = |a: Formula, b: Formula| {
            if keep_bool {
                F::and(a, b)
            } else {
                F::not(F::or(F::not(a), F::not(b)))
            }
        };
        let imp = |a: Formula, b: Formula| {
            if keep_bool {
                F::implies(a, b)
            } else {
                F::or(F::not(a), b)
            }
        };
        let always = |a: Formula| F::not(F::diamond(F::not(a)));
        let more = || F::next(F::True);
        let empty = || F::not(F::next(F::True));
        match self {
            F::Var(v) => F::Var(v.clone()),
            F::True => F::True,
            F::Not(a) => F::not(e(a)),
            F::Or(a, b) => F::or(e(a), e(b)),
            F::Next(a) => F::next(e(a)),
            F::Diamond(a) => F::diamond(e(a)),
            F::Until(a, b) => F::until(e(a), e(b)),
            F::Prev(a) => F::prev(e(a)),
            F::Once(a) => F::once(e(a)),

            F::False if keep_bool => F::False,
            F::False => F::not(F::True),
            F::And(a, b) => and(e(a), e(b)),
            F::Implies(a, b) => imp(e(a), e(b)),
            F::Equiv(a, b) if keep_bool => F::equiv(e(a), e(b)),
            F::Equiv(a, b) => {
                let (a, b) = (e(a), e(b));
                and(imp(a.clone(), b.clone()), imp(b, a))
            }
            F::Always(a) => always(e(a)),
            F::WNext(a) => F::not(F::next(F::not(e(a)))),
            F::SDiamond(a) => F::next(F::diamond(e(a))),
            F::More => more(),
            F::Empty => empty(),
            F::Skip => F::next(empty()),
            F::Finite => F::diamond(empty()),
            F::Inf => F::not(F::diamond(empty())),
            F::Sfin(a) => F::diamond(and(empty(), e(a))),
            F::Fin(a) => always(imp(empty(), e(a))),
            F::Dm(a) => F::diamond(and(more(), e(a))),
            F::Bm(a) => always(imp(more(), e(a))),
            F::WPrev(a) => F::not(F::prev(F::not(e(a)))),
            F::SoFar(a) => F::not(F::once(F::not(e(a)))),
            F::First => F::not(F::prev(F::True)),
            F::Test(a) => and(e(a), empty()),
        }
    }

    /// Maximum nesting of `Next` (after expansion of derived operators).
    pub fn next_depth(&self) -> usize {
        self.expand().next_depth_primitive()
    }

    fn next_depth_primitive(&self) -> usize {
        let inner = self
            .children()
            .into_iter()
            .map(Formula::next_depth_primitive)
            .max()
            .unwrap_or(0);
        match self {
            Formula::Next(_) => inner + 1,
            _ => inner,
        }
    }

    /// Maximum nesting of past operators along any path (after expansion).
    pub fn past_depth(&self) -> usize {
        self.expand().past_depth_primitive()
    }

    fn past_depth_primitive(&self) -> usize {
        let inner = self
            .children()
            .into_iter()
            .map(Formula::past_depth_primitive)
            .max()
            .unwrap_or(0);
        match self {
            Formula::Prev(_) | Formula::Once(_) => inner + 1,
            _ => inner,
        }
    }

    /// Tightest syntactic class of the formula.
    pub fn classify(&self) -> FormulaClass {
        self.expand().classify_primitive()
    }

    fn classify_primitive(&self) -> FormulaClass {
        let mut has_past = false;
        let mut has_future = false;
        let mut has_next = false;
        self.visit(&mut |f| match f {
            Formula::Prev(_) | Formula::Once(_) => has_past = true,
            Formula::Diamond(_) | Formula::Until(..) => has_future = true,
            Formula::Next(_) => has_next = true,
            _ => {}
        });
        if has_past {
            FormulaClass::PtlPast
        } else if has_future {
            FormulaClass::Ptl
        } else if has_next {
            if self.next_depth_primitive() <= 1 {
                FormulaClass::Nl1
            } else {
                FormulaClass::Ptl
            }
        } else {
            FormulaClass::State
        }
    }

    pub fn is_state(&self) -> bool {
        self.classify() == FormulaClass::State
    }

    /// True for state formulas and NL¹ formulas.
    pub fn is_nl1(&self) -> bool {
        self.classify() <= FormulaClass::Nl1
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Variables in first-occurrence order.
    pub fn vars(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Var(v) = f {
                if seen.insert(v.as_str()) {
                    out.push(v.clone());
                }
            }
        });
        out
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Truth value of a state formula under `val`. `None` when the formula
    /// contains a temporal operator (`more`, `empty` and friends included).
    pub fn eval_state(&self, val: &impl Fn(&str) -> bool) -> Option<bool> {
        use Formula::*;
        Some(match self {
            Var(v) => val(v),
            True => true,
            False => false,
            Not(a) => !a.eval_state(val)?,
            Or(a, b) => a.eval_state(val)? | b.eval_state(val)?,
            And(a, b) => a.eval_state(val)? & b.eval_state(val)?,
            Implies(a, b) => !a.eval_state(val)? | b.eval_state(val)?,
            Equiv(a, b) => a.eval_state(val)? == b.eval_state(val)?,
            _ => return None,
        })
    }

    /// Rebuilds the formula bottom-up, giving `f` a chance to replace each
    /// node after its children were rewritten.
    pub fn map_bottom_up(&self, f: &mut impl FnMut(Formula) -> Formula) -> Formula {
        let mut children = Vec::new();
        for c in self.children() {
            children.push(c.map_bottom_up(f));
        }
        let mut it = children.into_iter();
        let rebuilt = self.map_children(|_| it.next().expect("child count"));
        f(rebuilt)
    }

    /// Substitutes formulas for variables.
    pub fn substitute(&self, sub: &impl Fn(&str) -> Option<Formula>) -> Formula {
        self.map_bottom_up(&mut |node| match &node {
            Formula::Var(v) => sub(v).unwrap_or(node),
            _ => node,
        })
    }

    /// Renames variables.
    pub fn rename(&self, ren: &impl Fn(&str) -> String) -> Formula {
        self.substitute(&|v| Some(Formula::Var(ren(v))))
    }

    /// Light propositional cleanup used for readable dumps: removes double
    /// negations, folds constants and turns `~(~a | ~b)` back into `a & b`.
    /// The result is semantically equal to the input.
    pub fn simplify(&self) -> Formula {
        use Formula as F;
        match self {
            F::Not(a) => match a.as_ref() {
                F::Not(inner) => inner.simplify(),
                F::Or(x, y) => match (x.as_ref(), y.as_ref()) {
                    (F::Not(x), F::Not(y)) => F::and(x.simplify(), y.simplify()).simplify_shallow(),
                    _ => F::not(a.simplify()).simplify_shallow(),
                },
                _ => F::not(a.simplify()).simplify_shallow(),
            },
            F::Or(a, b) => F::or(a.simplify(), b.simplify()).simplify_shallow(),
            F::And(a, b) => F::and(a.simplify(), b.simplify()).simplify_shallow(),
            F::Var(_)
            | F::True
            | F::False
            | F::More
            | F::Empty
            | F::Skip
            | F::Finite
            | F::Inf
            | F::First => self.clone(),
            _ => {
                // temporal and remaining derived nodes: simplify the operands only
                self.map_children(Formula::simplify)
            }
        }
    }

    fn simplify_shallow(self) -> Formula {
        use Formula as F;
        match self {
            F::Not(a) => match *a {
                F::Not(inner) => *inner,
                F::True => F::False,
                F::False => F::True,
                other => F::not(other),
            },
            F::Or(a, b) => match (*a, *b) {
                (F::True, _) | (_, F::True) => F::True,
                (F::False, x) | (x, F::False) => x,
                (x, y) => F::or(x, y),
            },
            F::And(a, b) => match (*a, *b) {
                (F::False, _) | (_, F::False) => F::False,
                (F::True, x) | (x, F::True) => x,
                (x, y) => F::and(x, y),
            },
            other => other,
        }
    }

    /// Rebuilds this node with `f` applied to each direct child.
    pub fn map_children(&self, mut f: impl FnMut(&Formula) -> Formula) -> Formula {
        use Formula as F;
        let mut m = |x: &Formula| bx(f(x));
        match self {
            F::Var(_)
            | F::True
            | F::False
            | F::More
            | F::Empty
            | F::Skip
            | F::Finite
            | F::Inf
            | F::First => self.clone(),
            F::Not(a) => F::Not(m(a)),
            F::Next(a) => F::Next(m(a)),
            F::Diamond(a) => F::Diamond(m(a)),
            F::Prev(a) => F::Prev(m(a)),
            F::Once(a) => F::Once(m(a)),
            F::Always(a) => F::Always(m(a)),
            F::WNext(a) => F::WNext(m(a)),
            F::SDiamond(a) => F::SDiamond(m(a)),
            F::Sfin(a) => F::Sfin(m(a)),
            F::Fin(a) => F::Fin(m(a)),
            F::Dm(a) => F::Dm(m(a)),
            F::Bm(a) => F::Bm(m(a)),
            F::WPrev(a) => F::WPrev(m(a)),
            F::SoFar(a) => F::SoFar(m(a)),
            F::Test(a) => F::Test(m(a)),
            F::Or(a, b) => F::Or(m(a), m(b)),
            F::Until(a, b) => F::Until(m(a), m(b)),
            F::And(a, b) => F::And(m(a), m(b)),
            F::Implies(a, b) => F::Implies(m(a), m(b)),
            F::Equiv(a, b) => F::Equiv(m(a), m(b)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::print(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Formula {
        Formula::var("p")
    }
    fn q() -> Formula {
        Formula::var("q")
    }

    #[test]
    fn expands_henceforth() {
        assert_eq!(
            Formula::always(p()).expand(),
            Formula::not(Formula::diamond(Formula::not(p())))
        );
    }

    #[test]
    fn expands_skip() {
        assert_eq!(
            Formula::Skip.expand(),
            Formula::next(Formula::not(Formula::next(Formula::True)))
        );
    }

    #[test]
    fn true_is_a_fixpoint() {
        assert_eq!(Formula::True.expand(), Formula::True);
        assert_eq!(Formula::False.expand(), Formula::not(Formula::True));
    }

    #[test]
    fn classification() {
        let nl1 = Formula::and(p(), Formula::next(q()));
        assert_eq!(nl1.classify(), FormulaClass::Nl1);
        let nested = Formula::and(p(), Formula::next(Formula::or(q(), Formula::next(p()))));
        assert_eq!(nested.classify(), FormulaClass::Ptl);
        assert_eq!(nested.next_depth(), 2);
        assert_eq!(
            Formula::or(p(), Formula::not(q())).classify(),
            FormulaClass::State
        );
        assert_eq!(Formula::diamond(p()).classify(), FormulaClass::Ptl);
        assert_eq!(Formula::once(p()).classify(), FormulaClass::PtlPast);
        assert_eq!(Formula::More.classify(), FormulaClass::Nl1);
        assert_eq!(Formula::Skip.classify(), FormulaClass::Ptl);
    }

    #[test]
    fn vars_in_first_occurrence_order() {
        assert_eq!(
            Formula::and(p(), Formula::diamond(q())).vars(),
            vec!["p", "q"]
        );
        assert!(Formula::True.vars().is_empty());
        assert_eq!(
            Formula::or(Formula::diamond(p()), Formula::next(p())).vars(),
            vec!["p"]
        );
    }

    #[test]
    fn reserved_names() {
        assert_eq!(reserved_index("r12"), Some(12));
        assert_eq!(reserved_index("r"), None);
        assert_eq!(reserved_index("rx1"), None);
        assert_eq!(reserved_index("p1"), None);
        assert_eq!(dependent_var(3), "r3");
    }

    #[test]
    fn simplify_restores_conjunction() {
        let f = Formula::and(
            Formula::not(Formula::var("r2")),
            Formula::not(Formula::var("r4")),
        );
        assert_eq!(f.expand().simplify(), f);
        assert_eq!(Formula::not(Formula::not(p())).simplify(), p());
    }
}
