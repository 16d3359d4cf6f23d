mod common;

use tsat_core::bdd::BddManager;
use tsat_core::engine::{
    decide, extract_finite_model, reach_finite, FiniteOutcome, InconclusiveReason, Options, Stats,
    SymbolicConfig, Verdict,
};
use tsat_core::invariants::TranslationMode;
use tsat_core::oracle::Evaluator;
use tsat_core::parse;
use tsat_core::transconf::{ConfigKind, Mode};

fn opts(mode: Mode, translation: TranslationMode) -> Options {
    Options {
        mode,
        translation,
        ..Options::default()
    }
}

/// Models satisfy the transition configuration over the full variable set,
/// not only the user formula.
#[test]
fn models_satisfy_their_configuration() {
    let mut rng = common::rng(21);
    for i in 0..200 {
        let x = common::future(&mut rng, &["p", "q"][..1 + i % 2], 4);
        for mode in [Mode::Finite, Mode::Infinite] {
            let d = decide(&x, &opts(mode, TranslationMode::Optimized)).unwrap();
            let tc = &d.configs[0];
            let ev = Evaluator::new(&tc.to_formula(), &d.ctx).unwrap();
            match &d.verdict {
                Verdict::SatFinite(s) => assert!(ev.finite(s, 0), "{x}: {s:?}"),
                Verdict::SatInfinite(l) => {
                    assert!(matches!(tc.kind, ConfigKind::InfiniteTime { .. }));
                    assert!(ev.lasso(l, 0), "{x}: {l:?}");
                }
                Verdict::Unsat => {}
                other => panic!("{x}: {other:?}"),
            }
        }
    }
}

#[test]
fn literal_and_optimized_translations_agree() {
    let mut rng = common::rng(22);
    let mut compared = 0;
    for i in 0..150 {
        let x = common::future(&mut rng, &["p", "q"][..1 + i % 2], 3);
        for mode in [Mode::Finite, Mode::Infinite] {
            let literal = Options {
                node_limit: Some(200_000),
                ..opts(mode, TranslationMode::Literal)
            };
            let a = decide(&x, &literal).unwrap();
            if matches!(a.verdict, Verdict::Inconclusive(_)) {
                continue;
            }
            let b = decide(&x, &opts(mode, TranslationMode::Optimized)).unwrap();
            assert_eq!(a.verdict.is_sat(), b.verdict.is_sat(), "{x} in {mode:?}");
            compared += 1;
        }
    }
    assert!(compared >= 200, "only {compared} literal runs finished");
}

#[test]
fn verdicts_are_deterministic() {
    let mut rng = common::rng(23);
    for _ in 0..50 {
        let x = common::future(&mut rng, &["p", "q"], 4);
        let a = decide(&x, &Options::default()).unwrap();
        let b = decide(&x, &Options::default()).unwrap();
        assert_eq!(a.verdict, b.verdict, "{x}");
        assert_eq!(a.stats, b.stats, "{x}");
    }
}

#[test]
fn delta_union_grows_and_stabilizes() {
    let mut rng = common::rng(24);
    for _ in 0..100 {
        let x = common::future(&mut rng, &["p", "q"], 4);
        let d = decide(&x, &opts(Mode::Finite, TranslationMode::Optimized)).unwrap();
        let tc = &d.configs[0];
        let ConfigKind::FiniteTime { init } = &tc.kind else {
            unreachable!()
        };
        let mut m = BddManager::new(&tc.ctx);
        let cfg = SymbolicConfig::new(&mut m, &tc.t, init, None).unwrap();
        let mut stats = Stats::default();
        let (outcome, trace) = reach_finite(&mut m, &cfg, &mut stats);
        assert!((trace.deltas.len() as u64) <= tc.ctx.atom_count() + 1);
        assert_eq!(trace.deltas[0], cfg.gamma1);
        let mut union = trace.deltas[0];
        for &delta in &trace.deltas[1..] {
            let grown = m.or(union, delta);
            assert_ne!(grown, union, "union stalls before convergence is reported");
            union = grown;
        }
        assert_eq!(union, trace.union);
        match outcome {
            FiniteOutcome::Hit(n) => {
                let s = extract_finite_model(&mut m, &trace, &cfg, n);
                assert_eq!(s.states.len(), n + 1);
                let first = m.atom_cube(&s.states[0], false);
                assert!(!m.and(first, cfg.gamma1).is_false());
                let last = m.atom_cube(&s.states[n], false);
                assert!(!m.and(last, cfg.gamma3).is_false());
                for w in s.states.windows(2) {
                    assert!(m.eval_pair(cfg.gamma2, &w[0], &w[1]));
                }
                assert!(d.verdict.is_sat());
            }
            FiniteOutcome::Unsat => assert_eq!(d.verdict, Verdict::Unsat),
            FiniteOutcome::Inconclusive(r) => panic!("{x}: {r:?}"),
        }
    }
}

#[test]
fn lowering_the_cap_gives_inconclusive_not_unsat() {
    // needs three steps to reach a final state where p alternates
    let x = parse("p & next (~p & next (p & next (~p & empty)))").unwrap();
    for cap in 0..3 {
        let d = decide(
            &x,
            &Options {
                mode: Mode::Finite,
                max_iters: Some(cap),
                ..Options::default()
            },
        )
        .unwrap();
        assert_eq!(
            d.verdict,
            Verdict::Inconclusive(InconclusiveReason::IterationCap),
            "cap {cap}"
        );
    }
    let d = decide(&x, &opts(Mode::Finite, TranslationMode::Optimized)).unwrap();
    let Verdict::SatFinite(s) = d.projected() else {
        panic!("{:?}", d.verdict)
    };
    let ps: Vec<bool> = s.states.iter().map(|a| a.get(0)).collect();
    assert_eq!(ps, [true, false, true, false]);
}

#[test]
fn node_limit_is_reported() {
    let x = parse("[]<>p & []<>~p & []<>q & [](p -> next q)").unwrap();
    let d = decide(
        &x,
        &Options {
            node_limit: Some(20),
            ..Options::default()
        },
    )
    .unwrap();
    assert_eq!(
        d.verdict,
        Verdict::Inconclusive(InconclusiveReason::NodeLimit)
    );
}

#[test]
fn corpus_verdicts() {
    let cases: [(&str, Mode, bool); 12] = [
        ("[]<>p & []<>~p", Mode::Finite, false),
        ("[]<>p & []<>~p", Mode::Infinite, true),
        ("[](<>p & <>~p)", Mode::Infinite, true),
        ("p & ~p", Mode::Both, false),
        ("[]p & <>~p", Mode::Both, false),
        ("p U q & []~q", Mode::Both, false),
        ("inf & finite", Mode::Both, false),
        (
            "[](p -> next ~p) & [](~p -> next p) & p",
            Mode::Infinite,
            true,
        ),
        (
            "[](p -> next ~p) & [](~p -> next p) & p",
            Mode::Finite,
            false,
        ),
        ("[]<>(p & q) & [](p -> next ~q)", Mode::Infinite, true),
        ("once p & ~p & [] ~prev p", Mode::Both, true),
        ("sofar p & prev ~p", Mode::Both, false),
    ];
    for (text, mode, sat) in cases {
        let x = parse(text).unwrap();
        let d = decide(&x, &opts(mode, TranslationMode::Optimized)).unwrap();
        assert_eq!(
            d.verdict.is_sat(),
            sat,
            "{text} in {mode:?}: {:?}",
            d.verdict
        );
        if sat {
            let ev = Evaluator::new(&x, &d.user_ctx).unwrap();
            let ok = match d.projected() {
                Verdict::SatFinite(s) => ev.finite_somewhere(&s).is_some(),
                Verdict::SatInfinite(l) => ev.lasso_somewhere(&l).is_some(),
                _ => false,
            };
            assert!(ok, "{text}: model rejected");
        }
    }
}
