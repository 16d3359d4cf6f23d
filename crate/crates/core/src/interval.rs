//! Variable contexts, atoms and the two interval shapes (finite and
//! ultimately periodic).

use std::collections::HashMap;
use std::fmt;

/// Ordered set of propositional variables `V`. The primed copy `V'` is
/// derived by appending `'` to each name, which can never collide with an
/// identifier.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VariableContext {
    vars: Vec<String>,
    index: HashMap<String, usize>,
}

impl VariableContext {
    /// Builds a context, dropping duplicate names (first occurrence wins).
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut ctx = VariableContext::default();
        for n in names {
            ctx.push(n.into());
        }
        ctx
    }

    /// Appends a variable unless it is already present. Returns its index.
    pub fn push(&mut self, name: String) -> usize {
        if let Some(&i) = self.index.get(&name) {
            return i;
        }
        let i = self.vars.len();
        self.index.insert(name.clone(), i);
        self.vars.push(name);
        i
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.vars
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn primed(name: &str) -> String {
        format!("{name}'")
    }

    /// `2^|V|`, saturating.
    pub fn atom_count(&self) -> u64 {
        1u64.checked_shl(self.vars.len() as u32).unwrap_or(u64::MAX)
    }

    /// Every atom over the context, in enumeration order (true before
    /// false, first variable most significant).
    pub fn atoms(&self) -> impl Iterator<Item = VAtom> + '_ {
        let n = self.vars.len();
        assert!(n < 64, "too many variables to enumerate atoms");
        (0..(1u64 << n)).map(move |m| VAtom::from_rank(m, n))
    }
}

/// One interval state: a total assignment over a [`VariableContext`], in
/// context order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VAtom(pub Vec<bool>);

impl VAtom {
    pub fn new(bits: Vec<bool>) -> Self {
        VAtom(bits)
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    /// The `rank`-th atom in enumeration order over `width` variables.
    pub(crate) fn from_rank(rank: u64, width: usize) -> VAtom {
        VAtom(
            (0..width)
                .map(|i| (rank >> (width - 1 - i)) & 1 == 0)
                .collect(),
        )
    }

    /// Restricts the atom to `target`'s variables, looking them up in `ctx`.
    /// Variables missing from `ctx` become false.
    pub fn project(&self, ctx: &VariableContext, target: &VariableContext) -> VAtom {
        VAtom(
            target
                .names()
                .iter()
                .map(|n| ctx.index_of(n).map(|i| self.0[i]).unwrap_or(false))
                .collect(),
        )
    }

    /// `p=1 q=0 ...` in context order.
    pub fn display<'a>(&'a self, ctx: &'a VariableContext) -> impl fmt::Display + 'a {
        AtomDisplay { atom: self, ctx }
    }
}

struct AtomDisplay<'a> {
    atom: &'a VAtom,
    ctx: &'a VariableContext,
}

impl fmt::Display for AtomDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, bit)) in self.ctx.names().iter().zip(&self.atom.0).enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{name}={}", u8::from(*bit))?;
        }
        Ok(())
    }
}

/// A finite, nonempty sequence of states. Its interval length is the state
/// count minus one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteInterval {
    pub states: Vec<VAtom>,
}

impl FiniteInterval {
    pub fn new(states: Vec<VAtom>) -> Self {
        assert!(!states.is_empty(), "an interval has at least one state");
        FiniteInterval { states }
    }

    /// Interval length (states - 1).
    pub fn length(&self) -> usize {
        self.states.len() - 1
    }

    /// Subinterval from state `i` to state `j` inclusive.
    pub fn slice(&self, i: usize, j: usize) -> FiniteInterval {
        FiniteInterval::new(self.states[i..=j].to_vec())
    }

    /// Fusion: `self` must end in the state `other` starts with.
    pub fn fuse(&self, other: &FiniteInterval) -> Option<FiniteInterval> {
        if self.states.last() != other.states.first() {
            return None;
        }
        let mut states = self.states.clone();
        states.extend_from_slice(&other.states[1..]);
        Some(FiniteInterval::new(states))
    }

    pub fn project(&self, ctx: &VariableContext, target: &VariableContext) -> FiniteInterval {
        FiniteInterval::new(self.states.iter().map(|s| s.project(ctx, target)).collect())
    }
}

/// The ultimately periodic interval `prefix · period^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LassoInterval {
    pub prefix: Vec<VAtom>,
    pub period: Vec<VAtom>,
}

impl LassoInterval {
    pub fn new(prefix: Vec<VAtom>, period: Vec<VAtom>) -> Self {
        assert!(!period.is_empty(), "lasso period must be nonempty");
        LassoInterval { prefix, period }
    }

    /// State at position `k` of the infinite word.
    pub fn state(&self, k: usize) -> &VAtom {
        if k < self.prefix.len() {
            &self.prefix[k]
        } else {
            &self.period[(k - self.prefix.len()) % self.period.len()]
        }
    }

    /// Same infinite word with `copies` extra periods moved into the prefix.
    pub fn unroll(&self, copies: usize) -> LassoInterval {
        let mut prefix = self.prefix.clone();
        for _ in 0..copies {
            prefix.extend_from_slice(&self.period);
        }
        LassoInterval::new(prefix, self.period.clone())
    }

    pub fn project(&self, ctx: &VariableContext, target: &VariableContext) -> LassoInterval {
        LassoInterval::new(
            self.prefix.iter().map(|s| s.project(ctx, target)).collect(),
            self.period.iter().map(|s| s.project(ctx, target)).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_universe() {
        let ctx = VariableContext::new(["p", "q", "p"]);
        assert_eq!(ctx.len(), 2);
        let atoms: Vec<_> = ctx.atoms().collect();
        assert_eq!(atoms.len(), 4);
        assert_eq!(atoms[0], VAtom(vec![true, true]));
        assert_eq!(atoms[1], VAtom(vec![true, false]));
        assert_eq!(atoms[3], VAtom(vec![false, false]));
        assert_eq!(VariableContext::primed("p"), "p'");
        assert_eq!(VariableContext::default().atom_count(), 1);
    }

    #[test]
    fn fusion_keeps_one_copy_of_shared_state() {
        let a = VAtom(vec![true]);
        let b = VAtom(vec![false]);
        let x = FiniteInterval::new(vec![a.clone(), b.clone()]);
        let y = FiniteInterval::new(vec![b.clone(), a.clone()]);
        assert_eq!(x.fuse(&y).unwrap().states, vec![a.clone(), b, a.clone()]);
        assert!(x.fuse(&x).is_none());
    }

    #[test]
    fn lasso_positions() {
        let l = LassoInterval::new(
            vec![VAtom(vec![true])],
            vec![VAtom(vec![false]), VAtom(vec![true])],
        );
        assert!(l.state(0).get(0));
        assert!(!l.state(1).get(0));
        assert!(l.state(2).get(0));
        assert!(!l.state(5).get(0));
        let u = l.unroll(2);
        for k in 0..10 {
            assert_eq!(l.state(k), u.state(k));
        }
    }

    #[test]
    fn display_atom() {
        let ctx = VariableContext::new(["p", "q"]);
        assert_eq!(
            VAtom(vec![true, false]).display(&ctx).to_string(),
            "p=1 q=0"
        );
    }
}
