use std::process::{Command, Output};

fn tsat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsat"))
        .args(args)
        .env_remove("TSAT_NODE_LIMIT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn exit_codes() {
    assert_eq!(tsat(&["<>p"]).status.code(), Some(0));
    assert_eq!(tsat(&["p & ~p"]).status.code(), Some(1));
    assert_eq!(tsat(&["(("]).status.code(), Some(64));
    assert_eq!(tsat(&[]).status.code(), Some(64));
    assert_eq!(tsat(&["p", "--mode", "sideways"]).status.code(), Some(64));
    assert_eq!(tsat(&["--help"]).status.code(), Some(0));
}

#[test]
fn verdict_lines() {
    assert_eq!(stdout(&tsat(&["<>p"])).lines().next(), Some("SAT (finite)"));
    assert_eq!(
        stdout(&tsat(&["[]<>p & []<>~p"])).lines().next(),
        Some("SAT (infinite)")
    );
    assert_eq!(stdout(&tsat(&["[]p & <>~p"])).trim(), "UNSAT");
    assert_eq!(
        stdout(&tsat(&["[]<>p & []<>~p", "--mode", "finite"])).trim(),
        "UNSAT"
    );
}

#[test]
fn syntax_errors_show_a_span() {
    let o = tsat(&["p & )"]);
    assert_eq!(o.status.code(), Some(64));
    let err = stderr(&o);
    assert!(err.starts_with("syntax error at 4..5"), "{err}");
    assert!(err.contains("p & )\n    ^"), "{err}");
}

#[test]
fn finite_model_format() {
    let o = tsat(&["p & next (~p & q & empty)", "--model"]);
    assert_eq!(stdout(&o), "SAT (finite)\nS0: p=1 q=1\nS1: p=0 q=1\n");
}

#[test]
fn lasso_model_format() {
    let o = tsat(&["[]<>p & []<>~p", "--mode", "infinite", "--model"]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "SAT (infinite)");
    let period = lines.iter().position(|l| *l == "period:").unwrap();
    assert_eq!(lines[1], "prefix:");
    let states: Vec<&str> = lines[period + 1..].to_vec();
    assert!(
        states.contains(&"S0: p=1") || states.contains(&"S1: p=1"),
        "{out}"
    );
    assert!(states.iter().any(|l| l.ends_with("p=0")), "{out}");
    assert!(states.iter().any(|l| l.ends_with("p=1")), "{out}");
}

#[test]
fn show_internal_lists_auxiliary_variables() {
    let out = stdout(&tsat(&["[]<>p", "--model", "--show-internal"]));
    assert!(
        out.lines()
            .any(|l| l.starts_with("S0: p=") && l.contains(" r1=")),
        "{out}"
    );
    let plain = stdout(&tsat(&["[]<>p", "--model"]));
    assert!(!plain.contains("r1="), "{plain}");
}

#[test]
fn json_output() {
    let o = tsat(&["p U q", "--json", "--model", "--stats", "--oracle"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "sat-finite");
    assert_eq!(v["exit_code"], 0);
    assert_eq!(v["variables"], serde_json::json!(["p", "q"]));
    assert!(v["model"].is_object() || v["model"].is_array(), "{v}");
    assert!(v["stats"]["iterations"].is_u64(), "{v}");
    assert_eq!(v["oracle"]["agrees"], true, "{v}");

    let o = tsat(&["p & ~p", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "unsat");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reads_formula_from_file() {
    let dir = std::env::temp_dir().join(format!("tsat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("f.ptl");
    std::fs::write(&path, "[]<>p &\n  []<>~p\n").unwrap();
    let o = tsat(&["--file", path.to_str().unwrap(), "--mode", "infinite"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "SAT (infinite)");
    let missing = tsat(&["--file", dir.join("nope").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(64));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn oracle_confirms_models() {
    let out = stdout(&tsat(&["[](p -> next q) & <>p", "--oracle"]));
    assert!(out.contains("oracle: model confirmed"), "{out}");
    let out = stdout(&tsat(&["[]p & <>~p", "--oracle", "3,2,3"]));
    assert!(out.contains("oracle: bounded-confirmed"), "{out}");
    assert_eq!(tsat(&["p", "--oracle", "x"]).status.code(), Some(64));
}

#[test]
fn dumps() {
    let out = stdout(&tsat(&["<>p", "--dump-invariant", "--h-literal"]));
    assert!(out.contains("invariant:\n"), "{out}");
    assert!(out.contains("r1 <-> p"), "{out}");
    assert!(out.contains("L: "), "{out}");

    let out = stdout(&tsat(&["[]<>p", "--dump-config"]));
    assert!(out.contains("finite-time configuration"), "{out}");
    assert!(out.contains("infinite-time configuration"), "{out}");
    assert!(out.contains("finite reduction: "), "{out}");

    let out = stdout(&tsat(&["<>p", "--dump-bdd", "dot"]));
    assert!(out.contains("digraph bdd {"), "{out}");
    assert!(
        out.trim_end().ends_with("SAT (finite)") || out.contains("}\n"),
        "{out}"
    );
}

#[test]
fn iteration_cap_and_node_limit() {
    let o = tsat(&[
        "p & next (~p & next (p & next (~p & empty)))",
        "--mode",
        "finite",
        "--max-iters",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o).trim(), "INCONCLUSIVE (iteration cap reached)");

    let o = Command::new(env!("CARGO_BIN_EXE_tsat"))
        .arg("[]<>p & []<>q & []<>~p")
        .env("TSAT_NODE_LIMIT", "5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout(&o).trim(), "INCONCLUSIVE (node limit exceeded)");
}

#[test]
fn past_operators_are_accepted() {
    assert_eq!(tsat(&["once p & ~p & [] ~prev p"]).status.code(), Some(0));
    assert_eq!(tsat(&["sofar p & prev ~p"]).status.code(), Some(1));
}
