use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn fixtures() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures"))
}

fn stv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stv"))
        .current_dir(fixtures())
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn keys(v: &Value) -> Vec<&str> {
    let mut k: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    k.sort();
    k
}

#[test]
fn validate_evil_json() {
    let o = stv(&["validate", "S.src", "--ctx", "evil.tctx", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(
        keys(&v),
        [
            "h_source",
            "h_target",
            "note",
            "reason",
            "source_context",
            "verdict",
            "witness"
        ]
    );
    assert_eq!(v["verdict"], "reject");
    assert_eq!(v["witness"], json!(["display", "send"]));
    assert_eq!(v["reason"], "alphabet_escape");
    assert_eq!(v["h_target"], "(display . send) + eps");
    assert_eq!(v["h_source"], Value::Null);
}

#[test]
fn validate_friendly() {
    let o = stv(&["validate", "S.src", "--ctx", "friendly.tctx"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("accept\n"), "{text}");
    assert!(text.contains("H_T = display + eps"));

    let v = json(&stv(&["--json", "validate", "S.src", "--ctx", "friendly.tctx"]));
    assert_eq!(v["verdict"], "accept");
    assert_eq!(v["witness"], Value::Null);
    assert_eq!(v["h_source"], "display + eps");
}

#[test]
fn validate_human_reject_mentions_the_caveat() {
    let o = stv(&["validate", "S.src", "--ctx", "deadsend.tctx"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("witness: send"), "{text}");
    assert!(text.contains("false alarm"), "{text}");
}

#[test]
fn compile_to_file_and_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.trg");
    let o = stv(&[
        "compile",
        "S_prime.src",
        "-o",
        out.to_str().unwrap(),
        "--pass",
        "factor_common_prefix",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(
        fs::read_to_string(&out).unwrap(),
        fs::read_to_string(fixtures().join("T_prime.trg")).unwrap()
    );

    let o = stv(&["compile", "S.src"]);
    assert_eq!(stdout(&o), fs::read_to_string(fixtures().join("T.trg")).unwrap());

    let v = json(&stv(&["compile", "S.src", "--json"]));
    assert_eq!(keys(&v), ["output", "passes", "target"]);
    assert_eq!(v["passes"], json!([]));
}

#[test]
fn compiled_output_round_trips_through_infer() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.trg");
    assert!(stv(&["compile", "S.src", "-o", out.to_str().unwrap()]).status.success());
    let o = stv(&["infer", out.to_str().unwrap(), "--ctx", "evil.tctx", "--json"]);
    assert_eq!(json(&o), json!({"type": "int", "effect": "(display . send) + eps"}));
}

#[test]
fn infer_without_context() {
    let o = stv(&["infer", "S.src"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "type: int -[display + eps]-> int\neffect: eps\n");

    let o = stv(&["infer", "T.trg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unbound identifier `sc_print`"));
}

#[test]
fn trace_prints_one_action_per_line() {
    let o = stv(&["trace", "T.trg", "--ctx", "evil.tctx", "--fuel", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "display(42)\nsend(42)\n");
    assert!(String::from_utf8_lossy(&o.stderr).contains("value: 42"));

    let v = json(&stv(&["trace", "T.trg", "--ctx", "friendly.tctx", "--json"]));
    assert_eq!(
        v,
        json!({"trace": [{"action": "display", "payload": 42}], "terminated": true, "value": "42"})
    );

    let v = json(&stv(&["trace", "T.trg", "--ctx", "evil.tctx", "--fuel", "3", "--json"]));
    assert_eq!(v["terminated"], false);
    assert_eq!(v["value"], Value::Null);
}

#[test]
fn equiv_exit_codes() {
    let o = stv(&[
        "equiv",
        "(display . x) + (display . y)",
        "display . (x + y)",
        "--action",
        "x",
        "--action",
        "y",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "equivalent\n");

    let o = stv(&["equiv", "display . send", "display", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o), json!({"equivalent": false, "witness": ["display"]}));

    let o = stv(&["equiv", "display . x", "display"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("undeclared action `x`"));
}

#[test]
fn equiv_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.hist");
    fs::write(&h, "(display . send) + eps\n").unwrap();
    let o = stv(&["equiv", h.to_str().unwrap(), "eps + display . send"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn fuzz_reports() {
    let o = stv(&["fuzz", "--n", "20", "--seed", "3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(keys(&v), ["out_of_fuel", "runs", "terminated", "violations"]);
    assert_eq!(v["runs"], 20);

    let o = stv(&["fuzz", "--n", "0", "--json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(json(&o)["error"].is_string());
}

#[test]
fn usage_and_tool_errors_exit_two() {
    assert_eq!(stv(&[]).status.code(), Some(2));
    assert_eq!(stv(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(stv(&["validate", "S.src"]).status.code(), Some(2));
    assert_eq!(
        stv(&["validate", "S.src", "--ctx", "missing.tctx"]).status.code(),
        Some(2)
    );
    assert_eq!(stv(&["validate", "T.trg", "--ctx", "evil.tctx"]).status.code(), Some(2));
    assert_eq!(stv(&["validate", "evil.tctx", "--ctx", "S.src"]).status.code(), Some(2));
    assert_eq!(stv(&["compile", "S.src", "--pass", "inline"]).status.code(), Some(2));
    assert_eq!(stv(&["equiv", "display +", "eps"]).status.code(), Some(2));
    assert!(stv(&["--help"]).status.success());
}

#[test]
fn errors_in_json_mode_are_documents() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.src");
    fs::write(&bad, "fun x ->\n  (x").unwrap();
    let o = stv(&["--json", "infer", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(keys(&v), ["error"]);
    assert!(v["error"].as_str().unwrap().contains("2:5"), "{v}");

    let other = dir.path().join("prog.txt");
    fs::write(&other, "1").unwrap();
    let o = stv(&["--json", "trace", other.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(json(&o)["error"].as_str().unwrap().contains("extension"));
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("stuck.trg");
    fs::write(&p, "display 1; sc_exit 0").unwrap();
    let o = stv(&["trace", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sc_exit"));
}
