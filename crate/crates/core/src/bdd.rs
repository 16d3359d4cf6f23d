//! Reduced ordered binary decision diagrams.
//!
//! Each variable `v` of a [`VariableContext`] owns two adjacent levels: `2i`
//! for `v` and `2i+1` for its primed copy `v'`. The order is fixed when the
//! manager is created. Nodes are hash-consed, so two [`BddRef`]s are equal
//! exactly when they denote the same boolean function.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::interval::{VAtom, VariableContext};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BddError {
    #[error("variable `{0}` is not registered with the BDD manager")]
    UnknownVariable(String),
}

/// Handle to a node. Only meaningful for the manager that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BddRef(u32);

impl BddRef {
    pub const FALSE: BddRef = BddRef(0);
    pub const TRUE: BddRef = BddRef(1);

    pub fn is_false(self) -> bool {
        self == BddRef::FALSE
    }

    pub fn is_true(self) -> bool {
        self == BddRef::TRUE
    }

    pub fn id(self) -> u32 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Xor,
    Iff,
    Implies,
}

impl BinOp {
    fn eval(self, a: bool, b: bool) -> bool {
        match self {
            BinOp::And => a && b,
            BinOp::Or => a || b,
            BinOp::Xor => a != b,
            BinOp::Iff => a == b,
            BinOp::Implies => !a || b,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum CacheOp {
    Bin(BinOp),
    Not,
}

const TERMINAL_LEVEL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Node {
    level: u32,
    low: BddRef,
    high: BddRef,
}

pub struct BddManager {
    nodes: Vec<Node>,
    unique: HashMap<Node, BddRef>,
    cache: HashMap<(CacheOp, BddRef, BddRef), BddRef>,
    ctx: VariableContext,
    node_limit: Option<usize>,
    overflowed: bool,
}

impl BddManager {
    pub fn new(ctx: &VariableContext) -> Self {
        let terminal = |b| Node {
            level: TERMINAL_LEVEL,
            low: BddRef(b),
            high: BddRef(b),
        };
        BddManager {
            nodes: vec![terminal(0), terminal(1)],
            unique: HashMap::new(),
            cache: HashMap::new(),
            ctx: ctx.clone(),
            node_limit: None,
            overflowed: false,
        }
    }

    /// Caps the node table. Once the cap is passed the manager keeps working
    /// but [`BddManager::overflowed`] reports true; callers poll it.
    pub fn set_node_limit(&mut self, limit: Option<usize>) {
        self.node_limit = limit;
    }

    pub fn overflowed(&self) -> bool {
        self.overflowed
    }

    pub fn context(&self) -> &VariableContext {
        &self.ctx
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn clear_cache(&mut self) {
        self.cache.clear();
    }

    pub fn constant(&self, value: bool) -> BddRef {
        if value {
            BddRef::TRUE
        } else {
            BddRef::FALSE
        }
    }

    fn level_of(&self, f: BddRef) -> u32 {
        self.nodes[f.0 as usize].level
    }

    fn node(&self, f: BddRef) -> Node {
        self.nodes[f.0 as usize]
    }

    fn mk(&mut self, level: u32, low: BddRef, high: BddRef) -> BddRef {
        if low == high {
            return low;
        }
        let n = Node { level, low, high };
        if let Some(&r) = self.unique.get(&n) {
            return r;
        }
        let r = BddRef(self.nodes.len() as u32);
        self.nodes.push(n);
        self.unique.insert(n, r);
        if let Some(limit) = self.node_limit {
            if self.nodes.len() > limit {
                self.overflowed = true;
            }
        }
        r
    }

    /// Level for a variable name; `v'` names the primed copy of `v`.
    fn level_for(&self, name: &str) -> Result<u32, BddError> {
        let (base, primed) = match name.strip_suffix('\'') {
            Some(b) => (b, 1),
            None => (name, 0),
        };
        self.ctx
            .index_of(base)
            .map(|i| 2 * i as u32 + primed)
            .ok_or_else(|| BddError::UnknownVariable(name.to_string()))
    }

    pub fn var(&mut self, name: &str) -> Result<BddRef, BddError> {
        let level = self.level_for(name)?;
        Ok(self.mk(level, BddRef::FALSE, BddRef::TRUE))
    }

    /// The `i`-th context variable, primed or not.
    pub fn var_at(&mut self, i: usize, primed: bool) -> BddRef {
        assert!(i < self.ctx.len());
        self.mk(
            2 * i as u32 + u32::from(primed),
            BddRef::FALSE,
            BddRef::TRUE,
        )
    }

    pub fn not(&mut self, a: BddRef) -> BddRef {
        if a.is_false() {
            return BddRef::TRUE;
        }
        if a.is_true() {
            return BddRef::FALSE;
        }
        let key = (CacheOp::Not, a, a);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let n = self.node(a);
        let low = self.not(n.low);
        let high = self.not(n.high);
        let r = self.mk(n.level, low, high);
        self.cache.insert(key, r);
        r
    }

    pub fn apply(&mut self, op: BinOp, a: BddRef, b: BddRef) -> BddRef {
        // terminal and trivial cases
        match op {
            BinOp::And => {
                if a.is_false() || b.is_false() {
                    return BddRef::FALSE;
                }
                if a.is_true() {
                    return b;
                }
                if b.is_true() || a == b {
                    return a;
                }
            }
            BinOp::Or => {
                if a.is_true() || b.is_true() {
                    return BddRef::TRUE;
                }
                if a.is_false() {
                    return b;
                }
                if b.is_false() || a == b {
                    return a;
                }
            }
            _ => {}
        }
        let terminal = |r: BddRef| r.is_true() || r.is_false();
        if terminal(a) && terminal(b) {
            return self.constant(op.eval(a.is_true(), b.is_true()));
        }
        let key = (CacheOp::Bin(op), a, b);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let (la, lb) = (self.level_of(a), self.level_of(b));
        let level = la.min(lb);
        let (a0, a1) = self.cofactors(a, level);
        let (b0, b1) = self.cofactors(b, level);
        let low = self.apply(op, a0, b0);
        let high = self.apply(op, a1, b1);
        let r = self.mk(level, low, high);
        self.cache.insert(key, r);
        r
    }

    fn cofactors(&self, f: BddRef, level: u32) -> (BddRef, BddRef) {
        let n = self.node(f);
        if n.level == level {
            (n.low, n.high)
        } else {
            (f, f)
        }
    }

    pub fn and(&mut self, a: BddRef, b: BddRef) -> BddRef {
        self.apply(BinOp::And, a, b)
    }

    pub fn or(&mut self, a: BddRef, b: BddRef) -> BddRef {
        self.apply(BinOp::Or, a, b)
    }

    pub fn iff(&mut self, a: BddRef, b: BddRef) -> BddRef {
        self.apply(BinOp::Iff, a, b)
    }

    pub fn implies(&mut self, a: BddRef, b: BddRef) -> BddRef {
        self.apply(BinOp::Implies, a, b)
    }

    pub fn xor(&mut self, a: BddRef, b: BddRef) -> BddRef {
        self.apply(BinOp::Xor, a, b)
    }

    /// `a` with the variable at `level` fixed to `value`.
    fn restrict_level(&mut self, a: BddRef, level: u32, value: bool) -> BddRef {
        let mut memo = HashMap::new();
        self.restrict_rec(a, level, value, &mut memo)
    }

    fn restrict_rec(
        &mut self,
        a: BddRef,
        level: u32,
        value: bool,
        memo: &mut HashMap<BddRef, BddRef>,
    ) -> BddRef {
        let n = self.node(a);
        if n.level > level {
            return a;
        }
        if let Some(&r) = memo.get(&a) {
            return r;
        }
        let r = if n.level == level {
            if value {
                n.high
            } else {
                n.low
            }
        } else {
            let low = self.restrict_rec(n.low, level, value, memo);
            let high = self.restrict_rec(n.high, level, value, memo);
            self.mk(n.level, low, high)
        };
        memo.insert(a, r);
        r
    }

    /// `a` with the named variable fixed.
    pub fn restrict(&mut self, a: BddRef, name: &str, value: bool) -> Result<BddRef, BddError> {
        let level = self.level_for(name)?;
        Ok(self.restrict_level(a, level, value))
    }

    /// Existential quantification over the named variables (primed names
    /// allowed).
    pub fn exists(&mut self, names: &[&str], a: BddRef) -> Result<BddRef, BddError> {
        let mut levels = names
            .iter()
            .map(|n| self.level_for(n))
            .collect::<Result<Vec<_>, _>>()?;
        levels.sort_unstable();
        levels.dedup();
        Ok(self.exists_levels(&levels, a))
    }

    /// Existential quantification over every unprimed (`primed == false`) or
    /// every primed (`primed == true`) context variable.
    pub fn exists_all(&mut self, primed: bool, a: BddRef) -> BddRef {
        let levels: Vec<u32> = (0..self.ctx.len() as u32)
            .map(|i| 2 * i + u32::from(primed))
            .collect();
        self.exists_levels(&levels, a)
    }

    fn exists_levels(&mut self, sorted_levels: &[u32], a: BddRef) -> BddRef {
        let mut memo = HashMap::new();
        self.exists_rec(sorted_levels, a, &mut memo)
    }

    fn exists_rec(
        &mut self,
        levels: &[u32],
        a: BddRef,
        memo: &mut HashMap<BddRef, BddRef>,
    ) -> BddRef {
        let n = self.node(a);
        if n.level == TERMINAL_LEVEL {
            return a;
        }
        // skip quantified levels above this node
        let first = levels.partition_point(|&l| l < n.level);
        let rest = &levels[first..];
        if rest.is_empty() {
            return a;
        }
        if let Some(&r) = memo.get(&a) {
            return r;
        }
        let low = self.exists_rec(rest, n.low, memo);
        let high = self.exists_rec(rest, n.high, memo);
        let r = if rest[0] == n.level {
            self.or(low, high)
        } else {
            self.mk(n.level, low, high)
        };
        memo.insert(a, r);
        r
    }

    /// Simultaneously renames every `v` to `v'` and every `v'` to `v`.
    pub fn swap_primed(&mut self, a: BddRef) -> BddRef {
        let mut memo = HashMap::new();
        self.swap_rec(a, &mut memo)
    }

    fn swap_rec(&mut self, a: BddRef, memo: &mut HashMap<BddRef, BddRef>) -> BddRef {
        let n = self.node(a);
        if n.level == TERMINAL_LEVEL {
            return a;
        }
        if let Some(&r) = memo.get(&a) {
            return r;
        }
        let low = self.swap_rec(n.low, memo);
        let high = self.swap_rec(n.high, memo);
        let v = self.mk(n.level ^ 1, BddRef::FALSE, BddRef::TRUE);
        let nv = self.not(v);
        let hi = self.and(v, high);
        let lo = self.and(nv, low);
        let r = self.or(hi, lo);
        memo.insert(a, r);
        r
    }

    /// Conjunction of literals fixing every context variable (primed copies
    /// when `primed`) to the atom's values.
    pub fn atom_cube(&mut self, atom: &VAtom, primed: bool) -> BddRef {
        assert_eq!(atom.width(), self.ctx.len());
        let mut r = BddRef::TRUE;
        for i in (0..atom.width()).rev() {
            let level = 2 * i as u32 + u32::from(primed);
            r = if atom.get(i) {
                self.mk(level, BddRef::FALSE, r)
            } else {
                self.mk(level, r, BddRef::FALSE)
            };
        }
        r
    }

    /// Picks a total assignment to the unprimed variables `over` (context
    /// indices, in the order given) satisfying `a`: each variable is set
    /// true when that keeps the running restriction satisfiable and false
    /// otherwise. Returns `None` iff `a` is false. Variables outside `over`
    /// are left existentially quantified.
    pub fn pick_atom(&mut self, a: BddRef, over: &[usize]) -> Option<Vec<bool>> {
        if a.is_false() {
            return None;
        }
        let mut pi = a;
        let mut bits = Vec::with_capacity(over.len());
        for &i in over {
            let v = self.var_at(i, false);
            let with = self.and(pi, v);
            if !with.is_false() {
                bits.push(true);
                pi = with;
            } else {
                let nv = self.not(v);
                pi = self.and(pi, nv);
                bits.push(false);
            }
        }
        debug_assert!(!pi.is_false());
        Some(bits)
    }

    /// [`BddManager::pick_atom`] over every context variable.
    pub fn pick_full_atom(&mut self, a: BddRef) -> Option<VAtom> {
        let all: Vec<usize> = (0..self.ctx.len()).collect();
        self.pick_atom(a, &all).map(VAtom)
    }

    /// Evaluates under an assignment to levels (`values[level]`).
    pub fn eval_levels(&self, a: BddRef, values: &[bool]) -> bool {
        let mut cur = a;
        loop {
            if cur.is_true() {
                return true;
            }
            if cur.is_false() {
                return false;
            }
            let n = self.node(cur);
            cur = if values[n.level as usize] {
                n.high
            } else {
                n.low
            };
        }
    }

    /// Evaluates on a pair of atoms: `current` for `V`, `next` for `V'`.
    pub fn eval_pair(&self, a: BddRef, current: &VAtom, next: &VAtom) -> bool {
        let mut values = vec![false; 2 * self.ctx.len()];
        for i in 0..self.ctx.len() {
            values[2 * i] = current.get(i);
            values[2 * i + 1] = next.get(i);
        }
        self.eval_levels(a, &values)
    }

    /// Number of satisfying unprimed atoms of a BDD over `V` only.
    pub fn count_atoms(&self, a: BddRef) -> u128 {
        let n = self.ctx.len();
        let mut memo: HashMap<BddRef, u128> = HashMap::new();
        // count over unprimed levels only; primed levels must not occur
        fn go(
            m: &BddManager,
            f: BddRef,
            memo: &mut HashMap<BddRef, u128>,
            n: usize,
        ) -> (u128, usize) {
            // returns (count over variables from this node's var index to n, start index)
            if f.is_false() {
                return (0, n);
            }
            if f.is_true() {
                return (1, n);
            }
            let node = m.node(f);
            let idx = (node.level / 2) as usize;
            if let Some(&c) = memo.get(&f) {
                return (c, idx);
            }
            let (cl, il) = go(m, node.low, memo, n);
            let (ch, ih) = go(m, node.high, memo, n);
            let c = (cl << (il - idx - 1)) + (ch << (ih - idx - 1));
            memo.insert(f, c);
            (c, idx)
        }
        let (c, i) = go(self, a, &mut memo, n);
        c << i
    }

    /// DOT rendering, one line per node: id, variable, low and high edges.
    pub fn to_dot(&self, roots: &[(String, BddRef)]) -> String {
        let mut seen = std::collections::BTreeSet::new();
        let mut stack: Vec<BddRef> = roots.iter().map(|(_, r)| *r).collect();
        while let Some(f) = stack.pop() {
            if f.is_true() || f.is_false() || !seen.insert(f) {
                continue;
            }
            let n = self.node(f);
            stack.push(n.low);
            stack.push(n.high);
        }
        let mut out = String::from(
            "digraph bdd {\n  n0 [shape=box,label=\"0\"];\n  n1 [shape=box,label=\"1\"];\n",
        );
        for f in seen.iter().rev() {
            let n = self.node(*f);
            let _ = writeln!(
                out,
                "  n{} [label=\"{}\"]; n{} -> n{} [style=dashed]; n{} -> n{};",
                f.0,
                self.level_name(n.level),
                f.0,
                n.low.0,
                f.0,
                n.high.0
            );
        }
        for (name, r) in roots {
            let _ = writeln!(
                out,
                "  \"{name}\" [shape=plaintext]; \"{name}\" -> n{};",
                r.0
            );
        }
        out.push_str("}\n");
        out
    }

    fn level_name(&self, level: u32) -> String {
        let base = &self.ctx.names()[(level / 2) as usize];
        if level % 2 == 1 {
            VariableContext::primed(base)
        } else {
            base.clone()
        }
    }
}
