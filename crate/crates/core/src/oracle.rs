//! Reference semantics by brute force.
//!
//! Everything here evaluates formulas directly on concrete intervals with
//! per-subformula truth tables. It shares no code with the symbolic engine
//! and is the ground truth for differential tests.

use std::collections::HashMap;

use thiserror::Error;

use crate::formula::Formula;
use crate::interval::{FiniteInterval, LassoInterval, VAtom, VariableContext};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("variable `{0}` is not in the evaluation context")]
    UnknownVariable(String),
    #[error("exhaustive search over {0} variables is not supported (limit 5)")]
    TooManyVariables(usize),
    #[error("search space of {size} intervals exceeds the cap of {cap}")]
    BoundsTooLarge { size: u128, cap: u128 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Node {
    Var(usize),
    True,
    Not(usize),
    Or(usize, usize),
    Next(usize),
    Diamond(usize),
    Until(usize, usize),
    Prev(usize),
    Once(usize),
}

/// A formula compiled against a context into a DAG of primitive nodes
/// (children always precede parents).
#[derive(Clone, Debug)]
pub struct Evaluator {
    nodes: Vec<Node>,
    root: usize,
    past_depth: usize,
    width: usize,
}

impl Evaluator {
    pub fn new(f: &Formula, ctx: &VariableContext) -> Result<Self, OracleError> {
        let expanded = f.expand();
        let mut b = Builder {
            nodes: Vec::new(),
            dedup: HashMap::new(),
            ctx,
        };
        let root = b.compile(&expanded)?;
        Ok(Evaluator {
            nodes: b.nodes,
            root,
            past_depth: expanded.past_depth(),
            width: ctx.len(),
        })
    }

    pub fn has_past(&self) -> bool {
        self.past_depth > 0
    }

    /// Truth of the formula at every position of a finite interval.
    pub fn finite_table(&self, sigma: &FiniteInterval) -> Vec<bool> {
        let mut t = self.tables(&sigma.states, None);
        t.swap_remove(self.root)
    }

    pub fn finite(&self, sigma: &FiniteInterval, k: usize) -> bool {
        assert!(k <= sigma.length(), "position beyond the interval");
        self.finite_table(sigma)[k]
    }

    /// Truth at every position of the (unrolled) lasso together with the
    /// unrolled loop start; positions at or past the table end wrap.
    fn lasso_table(&self, lambda: &LassoInterval) -> (Vec<bool>, usize) {
        let unrolled = lambda.unroll(self.past_depth);
        let loop_start = unrolled.prefix.len();
        let mut states = unrolled.prefix.clone();
        states.extend_from_slice(&unrolled.period);
        let mut t = self.tables(&states, Some(loop_start));
        (t.swap_remove(self.root), loop_start)
    }

    pub fn lasso(&self, lambda: &LassoInterval, k: usize) -> bool {
        let (t, loop_start) = self.lasso_table(lambda);
        t[wrap(k, loop_start, t.len())]
    }

    /// True when the formula holds at some position (floating
    /// satisfaction). Future-only formulas only need position 0.
    pub fn lasso_somewhere(&self, lambda: &LassoInterval) -> Option<usize> {
        let (t, _) = self.lasso_table(lambda);
        if self.has_past() {
            t.iter().position(|&b| b)
        } else {
            t[0].then_some(0)
        }
    }

    pub fn finite_somewhere(&self, sigma: &FiniteInterval) -> Option<usize> {
        let t = self.finite_table(sigma);
        if self.has_past() {
            t.iter().position(|&b| b)
        } else {
            t[0].then_some(0)
        }
    }

    /// Bottom-up truth tables. `loop_start` is `Some(p)` for a lasso whose
    /// last position is followed by position `p`.
    fn tables(&self, states: &[VAtom], loop_start: Option<usize>) -> Vec<Vec<bool>> {
        let n = states.len();
        for s in states {
            assert_eq!(s.width(), self.width, "atom width does not match context");
        }
        let succ = |i: usize| -> Option<usize> {
            if i + 1 < n {
                Some(i + 1)
            } else {
                loop_start
            }
        };
        let mut t: Vec<Vec<bool>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let col: Vec<bool> = match *node {
                Node::Var(v) => states.iter().map(|s| s.get(v)).collect(),
                Node::True => vec![true; n],
                Node::Not(a) => t[a].iter().map(|b| !b).collect(),
                Node::Or(a, b) => t[a].iter().zip(&t[b]).map(|(x, y)| *x || *y).collect(),
                Node::Next(a) => (0..n).map(|i| succ(i).is_some_and(|j| t[a][j])).collect(),
                Node::Diamond(a) => {
                    let c = &t[a];
                    least_fixpoint(n, loop_start, |i, next| c[i] || next)
                }
                Node::Until(a, b) => {
                    let (ca, cb) = (&t[a], &t[b]);
                    least_fixpoint(n, loop_start, |i, next| cb[i] || (ca[i] && next))
                }
                Node::Prev(a) => (0..n).map(|i| i > 0 && t[a][i - 1]).collect(),
                Node::Once(a) => {
                    let mut acc = false;
                    t[a].iter()
                        .map(|&b| {
                            acc |= b;
                            acc
                        })
                        .collect()
                }
            };
            t.push(col);
        }
        t
    }
}

/// Solves `x[i] = step(i, x[succ(i)])` for the least solution, where the
/// successor of the last position is `loop_start` (or nothing). The loop is
/// swept twice starting from a false seed, which is enough for the
/// monotone single-loop operators used here.
fn least_fixpoint(
    n: usize,
    loop_start: Option<usize>,
    step: impl Fn(usize, bool) -> bool,
) -> Vec<bool> {
    let mut x = vec![false; n];
    match loop_start {
        None => {
            for i in (0..n).rev() {
                let next = i + 1 < n && x[i + 1];
                x[i] = step(i, next);
            }
        }
        Some(p) => {
            for _ in 0..2 {
                for i in (p..n).rev() {
                    let next = if i + 1 < n { x[i + 1] } else { x[p] };
                    x[i] = step(i, next);
                }
            }
            for i in (0..p).rev() {
                x[i] = step(i, x[i + 1]);
            }
        }
    }
    x
}

fn wrap(k: usize, loop_start: usize, n: usize) -> usize {
    if k < n {
        k
    } else {
        loop_start + (k - loop_start) % (n - loop_start)
    }
}

struct Builder<'a> {
    nodes: Vec<Node>,
    dedup: HashMap<Node, usize>,
    ctx: &'a VariableContext,
}

impl Builder<'_> {
    fn push(&mut self, n: Node) -> usize {
        if let Some(&i) = self.dedup.get(&n) {
            return i;
        }
        self.nodes.push(n);
        self.dedup.insert(n, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn compile(&mut self, f: &Formula) -> Result<usize, OracleError> {
        use Formula as F;
        let node = match f {
            F::Var(v) => Node::Var(
                self.ctx
                    .index_of(v)
                    .ok_or_else(|| OracleError::UnknownVariable(v.clone()))?,
            ),
            F::True => Node::True,
            F::Not(a) => Node::Not(self.compile(a)?),
            F::Or(a, b) => Node::Or(self.compile(a)?, self.compile(b)?),
            F::Next(a) => Node::Next(self.compile(a)?),
            F::Diamond(a) => Node::Diamond(self.compile(a)?),
            F::Until(a, b) => Node::Until(self.compile(a)?, self.compile(b)?),
            F::Prev(a) => Node::Prev(self.compile(a)?),
            F::Once(a) => Node::Once(self.compile(a)?),
            other => return self.compile(&other.expand()),
        };
        Ok(self.push(node))
    }
}

/// Truth of `f` at position `k` of a finite interval.
pub fn eval_finite(
    f: &Formula,
    ctx: &VariableContext,
    sigma: &FiniteInterval,
    k: usize,
) -> Result<bool, OracleError> {
    Ok(Evaluator::new(f, ctx)?.finite(sigma, k))
}

/// Truth of `f` at position `k` of a lasso.
pub fn eval_lasso(
    f: &Formula,
    ctx: &VariableContext,
    lambda: &LassoInterval,
    k: usize,
) -> Result<bool, OracleError> {
    Ok(Evaluator::new(f, ctx)?.lasso(lambda, k))
}

/// Propositional interval temporal logic over finite intervals, used to
/// check chop and chop-star identities.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PitlFormula {
    Ptl(Formula),
    Not(Box<PitlFormula>),
    And(Box<PitlFormula>, Box<PitlFormula>),
    Or(Box<PitlFormula>, Box<PitlFormula>),
    Chop(Box<PitlFormula>, Box<PitlFormula>),
    ChopStar(Box<PitlFormula>),
    /// `$T`: a unit interval on which `T` holds.
    UnitTest(Formula),
    /// `w?`: a one-state interval on which `w` holds.
    EmptyTest(Formula),
}

impl PitlFormula {
    pub fn ptl(f: Formula) -> Self {
        PitlFormula::Ptl(f)
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(a: PitlFormula) -> Self {
        PitlFormula::Not(Box::new(a))
    }
    pub fn and(a: PitlFormula, b: PitlFormula) -> Self {
        PitlFormula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: PitlFormula, b: PitlFormula) -> Self {
        PitlFormula::Or(Box::new(a), Box::new(b))
    }
    pub fn chop(a: PitlFormula, b: PitlFormula) -> Self {
        PitlFormula::Chop(Box::new(a), Box::new(b))
    }
    pub fn star(a: PitlFormula) -> Self {
        PitlFormula::ChopStar(Box::new(a))
    }
}

/// Evaluates a PITL formula on a finite interval by dynamic programming over
/// subintervals.
pub fn eval_pitl(
    f: &PitlFormula,
    ctx: &VariableContext,
    sigma: &FiniteInterval,
) -> Result<bool, OracleError> {
    let n = sigma.states.len();
    let mut st = PitlState {
        ctx,
        sigma,
        memo: HashMap::new(),
        compiled: HashMap::new(),
    };
    st.sub(f, 0, n - 1)
}

struct PitlState<'a> {
    ctx: &'a VariableContext,
    sigma: &'a FiniteInterval,
    memo: HashMap<(*const PitlFormula, usize, usize), bool>,
    compiled: HashMap<*const Formula, Evaluator>,
}

impl PitlState<'_> {
    /// Truth of a PTL formula at the start of `sigma[i..=j]`.
    fn ptl(&mut self, x: &Formula, i: usize, j: usize) -> Result<bool, OracleError> {
        let key = x as *const Formula;
        if !self.compiled.contains_key(&key) {
            self.compiled.insert(key, Evaluator::new(x, self.ctx)?);
        }
        Ok(self.compiled[&key].finite(&self.sigma.slice(i, j), 0))
    }

    fn sub(&mut self, f: &PitlFormula, i: usize, j: usize) -> Result<bool, OracleError> {
        let key = (f as *const PitlFormula, i, j);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let v = match f {
            PitlFormula::Ptl(x) => self.ptl(x, i, j)?,
            PitlFormula::Not(a) => !self.sub(a, i, j)?,
            PitlFormula::And(a, b) => self.sub(a, i, j)? && self.sub(b, i, j)?,
            PitlFormula::Or(a, b) => self.sub(a, i, j)? || self.sub(b, i, j)?,
            PitlFormula::Chop(a, b) => {
                let mut found = false;
                for k in i..=j {
                    if self.sub(a, i, k)? && self.sub(b, k, j)? {
                        found = true;
                        break;
                    }
                }
                found
            }
            PitlFormula::ChopStar(a) => {
                // reach[k]: some cut sequence from i ends at k. Empty pieces
                // never help, so only strictly increasing cuts are explored.
                let mut reach = vec![false; j - i + 1];
                reach[0] = true;
                for s in i..j {
                    if !reach[s - i] {
                        continue;
                    }
                    for e in s + 1..=j {
                        if !reach[e - i] && self.sub(a, s, e)? {
                            reach[e - i] = true;
                        }
                    }
                }
                reach[j - i]
            }
            PitlFormula::UnitTest(t) => j == i + 1 && self.ptl(t, i, j)?,
            PitlFormula::EmptyTest(w) => i == j && self.ptl(w, i, j)?,
        };
        self.memo.insert(key, v);
        Ok(v)
    }
}

/// Bounds for exhaustive model search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Finite intervals of length `0..=max_length`.
    Finite { max_length: usize },
    /// Lassos with `prefix.len() <= max_prefix` and
    /// `1 <= period.len() <= max_period`.
    Lasso {
        max_prefix: usize,
        max_period: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Finite(FiniteInterval),
    Lasso(LassoInterval),
}

/// A satisfying interval and the position at which the formula holds
/// (always 0 for future-only formulas).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Found {
    pub witness: Witness,
    pub position: usize,
}

pub const DEFAULT_SEARCH_CAP: u128 = 1 << 22;
pub const MAX_SEARCH_VARS: usize = 5;

/// Exhaustive search for the first satisfying interval, in order of
/// increasing size and then lexicographically (true before false, earlier
/// states and variables more significant). `Ok(None)` only means no model
/// exists within the bounds.
pub fn enumerate_sat(
    f: &Formula,
    ctx: &VariableContext,
    mode: SearchMode,
    cap: u128,
) -> Result<Option<Found>, OracleError> {
    if ctx.len() > MAX_SEARCH_VARS {
        return Err(OracleError::TooManyVariables(ctx.len()));
    }
    let width = ctx.len();
    let shapes: Vec<(usize, usize)> = match mode {
        SearchMode::Finite { max_length } => (0..=max_length).map(|l| (l + 1, 0)).collect(),
        SearchMode::Lasso {
            max_prefix,
            max_period,
        } => {
            let mut v = Vec::new();
            for total in 1..=max_prefix + max_period {
                for pre in 0..=max_prefix.min(total - 1) {
                    let per = total - pre;
                    if (1..=max_period).contains(&per) {
                        v.push((pre, per));
                    }
                }
            }
            v
        }
    };
    let size: u128 = shapes
        .iter()
        .map(|&(a, b)| {
            let bits = (width * (a + b)) as u32;
            if bits >= 127 {
                u128::MAX
            } else {
                1u128 << bits
            }
        })
        .fold(0u128, |acc, x| acc.saturating_add(x));
    if size > cap {
        return Err(OracleError::BoundsTooLarge { size, cap });
    }
    let eval = Evaluator::new(f, ctx)?;
    for (a, b) in shapes {
        let states = a + b;
        let bits = width * states;
        for rank in 0..(1u128 << bits) {
            let atoms: Vec<VAtom> = (0..states)
                .map(|s| {
                    VAtom(
                        (0..width)
                            .map(|v| {
                                let bit = bits - 1 - (s * width + v);
                                (rank >> bit) & 1 == 0
                            })
                            .collect(),
                    )
                })
                .collect();
            match mode {
                SearchMode::Finite { .. } => {
                    let sigma = FiniteInterval::new(atoms);
                    if let Some(position) = eval.finite_somewhere(&sigma) {
                        return Ok(Some(Found {
                            witness: Witness::Finite(sigma),
                            position,
                        }));
                    }
                }
                SearchMode::Lasso { .. } => {
                    let (pre, per) = atoms.split_at(a);
                    let lambda = LassoInterval::new(pre.to_vec(), per.to_vec());
                    if let Some(position) = eval.lasso_somewhere(&lambda) {
                        return Ok(Some(Found {
                            witness: Witness::Lasso(lambda),
                            position,
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}
