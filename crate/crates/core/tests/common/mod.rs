//! Random formula generators and exhaustive interval enumeration shared by
//! the integration tests.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tsat_core::invariants::{DepBody, Dependency, Invariant};
use tsat_core::{FiniteInterval, Formula, VAtom, VariableContext};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn leaf(rng: &mut ChaCha8Rng, vars: &[&str]) -> Formula {
    match rng.gen_range(0..10) {
        0 => Formula::True,
        1 => Formula::False,
        _ => Formula::var(vars[rng.gen_range(0..vars.len())]),
    }
}

/// Boolean combination of variables.
pub fn state(rng: &mut ChaCha8Rng, vars: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return leaf(rng, vars);
    }
    let d = depth - 1;
    match rng.gen_range(0..5) {
        0 => Formula::not(state(rng, vars, d)),
        1 => Formula::and(state(rng, vars, d), state(rng, vars, d)),
        2 => Formula::or(state(rng, vars, d), state(rng, vars, d)),
        3 => Formula::implies(state(rng, vars, d), state(rng, vars, d)),
        _ => Formula::equiv(state(rng, vars, d), state(rng, vars, d)),
    }
}

/// Boolean combination of state formulas and `○`/`more`/`empty` applied
/// to state formulas.
pub fn nl1(rng: &mut ChaCha8Rng, vars: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..6) {
            0 => Formula::next(state(rng, vars, 1)),
            1 => Formula::wnext(state(rng, vars, 1)),
            2 => Formula::More,
            3 => Formula::Empty,
            _ => leaf(rng, vars),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..6) {
        0 => Formula::not(nl1(rng, vars, d)),
        1 => Formula::and(nl1(rng, vars, d), nl1(rng, vars, d)),
        2 => Formula::or(nl1(rng, vars, d), nl1(rng, vars, d)),
        3 => Formula::implies(nl1(rng, vars, d), nl1(rng, vars, d)),
        4 => Formula::equiv(nl1(rng, vars, d), nl1(rng, vars, d)),
        _ => Formula::next(state(rng, vars, d)),
    }
}

/// Future-time formula of AST depth at most `depth` over every operator
/// of the language.
pub fn future(rng: &mut ChaCha8Rng, vars: &[&str], depth: usize) -> Formula {
    if depth <= 1 || rng.gen_bool(0.15) {
        return match rng.gen_range(0..12) {
            0 => Formula::More,
            1 => Formula::Empty,
            2 => Formula::Skip,
            3 => Formula::Finite,
            4 => Formula::Inf,
            _ => leaf(rng, vars),
        };
    }
    let d = depth - 1;
    let g = |rng: &mut ChaCha8Rng| future(rng, vars, d);
    match rng.gen_range(0..18) {
        0 | 1 => Formula::not(g(rng)),
        2 => Formula::and(g(rng), g(rng)),
        3 => Formula::or(g(rng), g(rng)),
        4 => Formula::implies(g(rng), g(rng)),
        5 => Formula::equiv(g(rng), g(rng)),
        6 => Formula::next(g(rng)),
        7 => Formula::wnext(g(rng)),
        8 => Formula::diamond(g(rng)),
        9 => Formula::always(g(rng)),
        10 => Formula::until(g(rng), g(rng)),
        11 => Formula::sdiamond(g(rng)),
        12 => Formula::sfin(g(rng)),
        13 => Formula::fin(g(rng)),
        14 => Formula::dm(g(rng)),
        15 => Formula::bm(g(rng)),
        16 => Formula::test(g(rng)),
        _ => Formula::and(g(rng), Formula::Finite),
    }
}

/// Like [`future`] but mixing in past operators.
pub fn with_past(rng: &mut ChaCha8Rng, vars: &[&str], depth: usize) -> Formula {
    if depth <= 1 || rng.gen_bool(0.15) {
        return match rng.gen_range(0..8) {
            0 => Formula::First,
            1 => Formula::More,
            _ => leaf(rng, vars),
        };
    }
    let d = depth - 1;
    let g = |rng: &mut ChaCha8Rng| with_past(rng, vars, d);
    match rng.gen_range(0..14) {
        0 => Formula::not(g(rng)),
        1 => Formula::and(g(rng), g(rng)),
        2 => Formula::or(g(rng), g(rng)),
        3 => Formula::prev(g(rng)),
        4 => Formula::wprev(g(rng)),
        5 => Formula::once(g(rng)),
        6 => Formula::so_far(g(rng)),
        7 => Formula::next(g(rng)),
        8 => Formula::diamond(g(rng)),
        9 => Formula::always(g(rng)),
        10 => Formula::until(g(rng), g(rng)),
        11 => Formula::implies(g(rng), g(rng)),
        12 => Formula::prev(g(rng)),
        _ => Formula::once(g(rng)),
    }
}

/// Random ordered invariant whose dependent variables are `heads` and
/// whose bodies range over `vars`.
pub fn ordered_invariant(rng: &mut ChaCha8Rng, heads: &[&str], vars: &[&str]) -> Invariant {
    let mut live = Vec::new();
    let mut rest = Vec::new();
    for h in heads {
        match rng.gen_range(0..3) {
            0 => live.push(Dependency::new(*h, DepBody::Diamond(state(rng, vars, 2)))),
            1 => live.push(Dependency::new(
                *h,
                DepBody::Until(state(rng, vars, 2), state(rng, vars, 2)),
            )),
            _ => rest.push(Dependency::new(*h, DepBody::Nl1(nl1(rng, vars, 2)))),
        }
    }
    live.extend(rest);
    Invariant::new(live)
}

/// Every finite interval over `ctx` with length `0..=max_length`.
pub fn all_intervals(ctx: &VariableContext, max_length: usize) -> Vec<FiniteInterval> {
    let atoms: Vec<VAtom> = ctx.atoms().collect();
    let mut out = Vec::new();
    let mut layer: Vec<Vec<VAtom>> = atoms.iter().map(|a| vec![a.clone()]).collect();
    for _ in 0..=max_length {
        out.extend(layer.iter().cloned().map(FiniteInterval::new));
        layer = layer
            .iter()
            .flat_map(|s| {
                atoms.iter().map(move |a| {
                    let mut t = s.clone();
                    t.push(a.clone());
                    t
                })
            })
            .collect();
    }
    out
}
