use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use tsat_core::engine::{decide, Decision, InconclusiveReason, Options, Verdict};
use tsat_core::invariants::{liveness_formula, transition_formula, TranslationMode};
use tsat_core::oracle::{
    enumerate_sat, Evaluator, SearchMode, Witness, DEFAULT_SEARCH_CAP, MAX_SEARCH_VARS,
};
use tsat_core::transconf::Mode;
use tsat_core::{parse, FiniteInterval, Formula, LassoInterval, VAtom, VariableContext};

const EXIT_SAT: u8 = 0;
const EXIT_UNSAT: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_NODE_LIMIT: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Finite,
    Infinite,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BddFormat {
    Dot,
}

/// Decide satisfiability of a propositional linear-time temporal logic
/// formula over finite and infinite intervals.
#[derive(Debug, Parser)]
#[command(name = "tsat", version)]
struct Cli {
    /// Formula text (alternatively use --file).
    formula: Option<String>,
    /// Read the formula from a file.
    #[arg(long, value_name = "PATH", conflicts_with = "formula")]
    file: Option<PathBuf>,
    /// Kinds of intervals to consider.
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    /// Print a satisfying interval.
    #[arg(long)]
    model: bool,
    /// Include dependent variables in printed models.
    #[arg(long)]
    show_internal: bool,
    /// Print the invariant, transition formula and liveness formula.
    #[arg(long)]
    dump_invariant: bool,
    /// Print the transition configurations.
    #[arg(long)]
    dump_config: bool,
    /// Print the initial, step and final-state BDDs.
    #[arg(long, value_enum, value_name = "FORMAT")]
    dump_bdd: Option<BddFormat>,
    /// Translate rule by rule, without sharing or inlining.
    #[arg(long)]
    h_literal: bool,
    /// Cap on image iterations (default: 2^|V|).
    #[arg(long, value_name = "N")]
    max_iters: Option<u64>,
    /// Cross-check against exhaustive search with bounds
    /// LEN[,PREFIX,PERIOD] (default 4,2,4).
    #[arg(long, value_name = "LEN[,PREFIX,PERIOD]", num_args = 0..=1, default_missing_value = "")]
    oracle: Option<String>,
    /// Print search statistics.
    #[arg(long)]
    stats: bool,
    /// Emit one JSON object instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct OracleBounds {
    length: usize,
    prefix: usize,
    period: usize,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds {
            length: 4,
            prefix: 2,
            period: 4,
        }
    }
}

fn parse_oracle_bounds(s: &str) -> Result<OracleBounds, String> {
    let mut b = OracleBounds::default();
    if s.is_empty() {
        return Ok(b);
    }
    let nums = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad oracle bound `{p}`: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    match nums[..] {
        [len] => b.length = len,
        [len, pre, per] => {
            b = OracleBounds {
                length: len,
                prefix: pre,
                period: per,
            }
        }
        _ => return Err("expected LEN or LEN,PREFIX,PERIOD".into()),
    }
    if b.period == 0 {
        return Err("the period bound must be positive".into());
    }
    Ok(b)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_SAT };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(msg) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: &Cli) -> Result<(String, u8), String> {
    let text = match (&cli.formula, &cli.file) {
        (Some(t), None) => t.clone(),
        (None, Some(p)) => std::fs::read_to_string(p)
            .map_err(|e| format!("error: cannot read {}: {e}", p.display()))?,
        _ => return Err("error: supply a formula or --file PATH".into()),
    };
    let formula = parse(&text).map_err(|e| e.render(&text).to_string())?;
    let oracle = match &cli.oracle {
        Some(s) => {
            let b = parse_oracle_bounds(s).map_err(|e| format!("error: {e}"))?;
            let n = formula.vars().len();
            if n > MAX_SEARCH_VARS {
                return Err(format!(
                    "error: --oracle supports at most {MAX_SEARCH_VARS} variables, formula has {n}"
                ));
            }
            Some(b)
        }
        None => None,
    };
    let node_limit = match std::env::var("TSAT_NODE_LIMIT") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|e| format!("error: TSAT_NODE_LIMIT: {e}"))?,
        ),
        Err(_) => None,
    };
    let opts = Options {
        mode: match cli.mode {
            ModeArg::Finite => Mode::Finite,
            ModeArg::Infinite => Mode::Infinite,
            ModeArg::Both => Mode::Both,
        },
        translation: if cli.h_literal {
            TranslationMode::Literal
        } else {
            TranslationMode::Optimized
        },
        max_iters: cli.max_iters,
        node_limit,
        dump_bdd: cli.dump_bdd.is_some(),
    };
    let d = decide(&formula, &opts).map_err(|e| format!("error: {e}"))?;
    let check = oracle.map(|b| oracle_check(&formula, &d, opts.mode, b));

    let (shown, model_ctx) = if cli.show_internal {
        (d.verdict.clone(), d.ctx.clone())
    } else {
        (d.projected(), d.user_ctx.clone())
    };
    let code = match &d.verdict {
        Verdict::SatFinite(_) | Verdict::SatInfinite(_) => EXIT_SAT,
        Verdict::Unsat => EXIT_UNSAT,
        Verdict::Inconclusive(InconclusiveReason::IterationCap) => EXIT_INCONCLUSIVE,
        Verdict::Inconclusive(InconclusiveReason::NodeLimit) => EXIT_NODE_LIMIT,
    };

    if cli.json {
        let mut obj = json!({
            "verdict": verdict_name(&d.verdict),
            "exit_code": code,
            "variables": model_ctx.names(),
        });
        if shown.is_sat() {
            obj["model"] = model_json(&shown, &model_ctx);
        }
        if cli.stats {
            obj["stats"] = json!({
                "iterations": d.stats.iterations,
                "peak_nodes": d.stats.peak_nodes,
                "candidates": d.stats.candidates,
            });
        }
        if let Some(c) = &check {
            obj["oracle"] = json!({ "agrees": c.agrees, "detail": c.detail });
        }
        if cli.dump_invariant {
            obj["invariant"] = Value::String(invariant_dump(&d));
        }
        if cli.dump_config {
            obj["configs"] = d
                .configs
                .iter()
                .map(|c| Value::String(c.to_string()))
                .collect();
        }
        if cli.dump_bdd.is_some() {
            obj["bdd"] = d.bdd_dot.iter().cloned().map(Value::String).collect();
        }
        return Ok((format!("{obj}\n"), code));
    }

    let mut out = String::new();
    if cli.dump_invariant {
        out.push_str(&invariant_dump(&d));
    }
    if cli.dump_config {
        for c in &d.configs {
            out.push_str(&c.to_string());
        }
    }
    for dot in &d.bdd_dot {
        out.push_str(dot);
    }
    let _ = writeln!(out, "{}", verdict_line(&d.verdict));
    if cli.model && shown.is_sat() {
        out.push_str(&model_text(&shown, &model_ctx));
    }
    if let Some(c) = &check {
        let _ = writeln!(out, "oracle: {}", c.detail);
    }
    if cli.stats {
        let _ = writeln!(
            out,
            "stats: iterations={} peak_nodes={} candidates={}",
            d.stats.iterations, d.stats.peak_nodes, d.stats.candidates
        );
    }
    Ok((out, code))
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::SatFinite(_) => "sat-finite",
        Verdict::SatInfinite(_) => "sat-infinite",
        Verdict::Unsat => "unsat",
        Verdict::Inconclusive(InconclusiveReason::IterationCap) => "inconclusive",
        Verdict::Inconclusive(InconclusiveReason::NodeLimit) => "node-limit",
    }
}

fn verdict_line(v: &Verdict) -> &'static str {
    match v {
        Verdict::SatFinite(_) => "SAT (finite)",
        Verdict::SatInfinite(_) => "SAT (infinite)",
        Verdict::Unsat => "UNSAT",
        Verdict::Inconclusive(InconclusiveReason::IterationCap) => {
            "INCONCLUSIVE (iteration cap reached)"
        }
        Verdict::Inconclusive(InconclusiveReason::NodeLimit) => {
            "INCONCLUSIVE (node limit exceeded)"
        }
    }
}

fn states_text(out: &mut String, states: &[VAtom], first: usize, ctx: &VariableContext) {
    for (i, s) in states.iter().enumerate() {
        let _ = writeln!(out, "S{}: {}", first + i, s.display(ctx));
    }
}

fn model_text(v: &Verdict, ctx: &VariableContext) -> String {
    let mut out = String::new();
    match v {
        Verdict::SatFinite(s) => states_text(&mut out, &s.states, 0, ctx),
        Verdict::SatInfinite(l) => {
            out.push_str("prefix:\n");
            states_text(&mut out, &l.prefix, 0, ctx);
            out.push_str("period:\n");
            states_text(&mut out, &l.period, l.prefix.len(), ctx);
        }
        _ => {}
    }
    out
}

fn atoms_json(states: &[VAtom], ctx: &VariableContext) -> Value {
    states
        .iter()
        .map(|s| {
            Value::Object(
                ctx.names()
                    .iter()
                    .enumerate()
                    .map(|(i, n)| (n.clone(), Value::Bool(s.get(i))))
                    .collect(),
            )
        })
        .collect::<Vec<_>>()
        .into()
}

fn model_json(v: &Verdict, ctx: &VariableContext) -> Value {
    match v {
        Verdict::SatFinite(s) => json!({ "states": atoms_json(&s.states, ctx) }),
        Verdict::SatInfinite(l) => json!({
            "prefix": atoms_json(&l.prefix, ctx),
            "period": atoms_json(&l.period, ctx),
        }),
        _ => Value::Null,
    }
}

fn invariant_dump(d: &Decision) -> String {
    let inv = &d.translation.invariant;
    let mut out = String::from("invariant:\n");
    for dep in &inv.deps {
        let _ = writeln!(out, "  {dep}");
    }
    let _ = writeln!(out, "init: {}", d.translation.init);
    let _ = writeln!(out, "T: {}", transition_formula(inv));
    let _ = writeln!(out, "L: {}", liveness_formula(inv).to_formula());
    out
}

struct OracleCheck {
    agrees: bool,
    detail: String,
}

/// Checks a model by direct evaluation, or an UNSAT verdict by bounded
/// exhaustive search, using floating satisfaction for past formulas.
fn oracle_check(x: &Formula, d: &Decision, mode: Mode, b: OracleBounds) -> OracleCheck {
    let ctx = &d.user_ctx;
    let ev = match Evaluator::new(x, ctx) {
        Ok(ev) => ev,
        Err(e) => {
            return OracleCheck {
                agrees: false,
                detail: format!("error: {e}"),
            }
        }
    };
    match d.projected() {
        Verdict::SatFinite(s) => confirm(ev.finite_somewhere(&s).is_some()),
        Verdict::SatInfinite(l) => confirm(ev.lasso_somewhere(&l).is_some()),
        Verdict::Unsat => {
            let mut searches = Vec::new();
            if mode != Mode::Infinite {
                searches.push(SearchMode::Finite {
                    max_length: b.length,
                });
            }
            if mode != Mode::Finite {
                searches.push(SearchMode::Lasso {
                    max_prefix: b.prefix,
                    max_period: b.period,
                });
            }
            for s in searches {
                match enumerate_sat(x, ctx, s, DEFAULT_SEARCH_CAP) {
                    Ok(None) => {}
                    Ok(Some(found)) => {
                        return OracleCheck {
                            agrees: false,
                            detail: format!(
                                "DISAGREES: found a model {}",
                                witness_text(&found.witness, ctx)
                            ),
                        }
                    }
                    Err(e) => {
                        return OracleCheck {
                            agrees: false,
                            detail: format!("error: {e}"),
                        }
                    }
                }
            }
            let mut bounds = Vec::new();
            if mode != Mode::Infinite {
                bounds.push(format!("length <= {}", b.length));
            }
            if mode != Mode::Finite {
                bounds.push(format!("prefix <= {}, period <= {}", b.prefix, b.period));
            }
            OracleCheck {
                agrees: true,
                detail: format!("bounded-confirmed ({})", bounds.join("; ")),
            }
        }
        Verdict::Inconclusive(_) => OracleCheck {
            agrees: true,
            detail: "skipped (no verdict)".into(),
        },
    }
}

fn confirm(ok: bool) -> OracleCheck {
    OracleCheck {
        agrees: ok,
        detail: if ok {
            "model confirmed".into()
        } else {
            "DISAGREES: model rejected".into()
        },
    }
}

fn witness_text(w: &Witness, ctx: &VariableContext) -> String {
    let fmt = |s: &[VAtom]| {
        s.iter()
            .map(|a| format!("[{}]", a.display(ctx)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    match w {
        Witness::Finite(FiniteInterval { states }) => fmt(states),
        Witness::Lasso(LassoInterval { prefix, period }) => {
            format!("{} ({})^w", fmt(prefix), fmt(period))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_bound_syntax() {
        assert_eq!(parse_oracle_bounds("").unwrap(), OracleBounds::default());
        assert_eq!(parse_oracle_bounds("3").unwrap().length, 3);
        let b = parse_oracle_bounds("3,1,2").unwrap();
        assert_eq!((b.length, b.prefix, b.period), (3, 1, 2));
        assert!(parse_oracle_bounds("1,2").is_err());
        assert!(parse_oracle_bounds("x").is_err());
        assert!(parse_oracle_bounds("1,1,0").is_err());
    }
}
