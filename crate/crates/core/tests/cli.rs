use std::process::Command;

use ospec::cli::run;
use serde_json::Value as Json;

fn specs(file: &str) -> String {
    format!("{}/specs/{file}", env!("CARGO_MANIFEST_DIR"))
}

fn ospec(args: &[&str]) -> ospec::cli::CliOutput {
    run(std::iter::once("ospec").chain(args.iter().copied()))
}

#[test]
fn one_plan_for_the_network() {
    let out = ospec(&[&specs("network.ospec"), &specs("network.json"), "-n", "1"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let doc: Json = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(doc["status"], "satisfiable");
    let plans = doc["plans"].as_array().unwrap();
    assert_eq!(plans.len(), 1);
    let plan = &plans[0];
    assert_eq!(plan["creations"].as_array().unwrap().len(), 6);
    assert_eq!(plan["creations"][0]["args"][0]["object"], "p0");
    let calls = plan["invocations"].as_array().unwrap().len();
    let effects = plan["effects"].as_array().unwrap();
    assert_eq!(effects.len(), 6 + calls);
    assert_eq!(effects[0], "new(Node,p0) = new Node(p0)");
    let labels: Vec<&str> = plan["objects"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["class"].as_str().unwrap())
        .collect();
    assert_eq!(labels, ["Node"; 6]);
    assert!(plan["return"].as_str().unwrap().starts_with("new(Node,p"));
}

#[test]
fn unsatisfiable_exits_one() {
    let out = ospec(&[&specs("network.ospec"), &specs("network_4_cables.json")]);
    assert_eq!(out.code, 1);
    let doc: Json = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(doc["status"], "unsatisfiable");
    assert!(doc["plans"].as_array().unwrap().is_empty());
}

#[test]
fn emit_modes_do_not_solve() {
    let ground = ospec(&[
        &specs("network.ospec"),
        &specs("network.json"),
        "--emit",
        "ground",
    ]);
    assert_eq!(ground.code, 0);
    assert!(ground.stdout.starts_with("0 {edge(p0,p1)} 1.\n"));
    let facts = ospec(&[
        &specs("network.ospec"),
        &specs("network.json"),
        "--emit",
        "facts",
    ]);
    assert!(facts.stdout.contains("param_member(comps,5,p5).\n"));
    assert!(facts.stdout.contains("method_val(p2,getNrSock,5).\n"));
    let core = ospec(&[
        &specs("network.ospec"),
        &specs("network_4_cables.json"),
        "--emit",
        "core",
    ]);
    assert_eq!(core.code, 0);
    assert!(core.stdout.starts_with("% 0 edge(obj(0),obj(1))\n"));
}

#[test]
fn optimize_keeps_only_spanning_trees() {
    let out = ospec(&[
        &specs("network_min.ospec"),
        &specs("network.json"),
        "--optimize",
    ]);
    let doc: Json = serde_json::from_str(&out.stdout).unwrap();
    let plans = doc["plans"].as_array().unwrap();
    assert_eq!(plans.len(), 216);
    assert!(plans
        .iter()
        .all(|p| p["cost"] == 10 && p["invocations"].as_array().unwrap().len() == 10));
}

#[test]
fn diagnostics_name_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };
    let universe = write("u.json", r#"{"params": {}}"#);
    let cases = [
        ("S(){ p :- q(. }", "error[parse]"),
        ("S(){ p(X?) :- not q(X?). }", "error[validation]"),
        (
            "S(Item[] items){ return X? :- X?items(_). }",
            "error[universe]",
        ),
        ("S(){ a. }", "error[plan]"),
    ];
    for (source, prefix) in cases {
        let out = ospec(&[&write("s.ospec", source), &universe]);
        assert_eq!(out.code, 2, "{source}");
        assert!(out.stderr.starts_with(prefix), "{source}: {}", out.stderr);
    }
    let missing = ospec(&["/nonexistent/x.ospec", &universe]);
    assert!(missing.stderr.starts_with("error[io]"));
    let bad_json = ospec(&[&write("t.ospec", "S(){ a. }"), &write("b.json", "{")]);
    assert!(bad_json.stderr.starts_with("error[universe]"));
    let usage = ospec(&["only-one-arg"]);
    assert_eq!(usage.code, 2);
}

#[test]
fn universe_mismatches_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let spec = specs("network.ospec");
    let cases = [
        (
            r#"{"params": {"comps": []}}"#,
            "missing parameter `nrCables`",
        ),
        (
            r#"{"params": {"comps": 3, "nrCables": 9}}"#,
            "must be an array of objects",
        ),
        (
            r#"{"params": {"comps": [{"class": "Node"}], "nrCables": 9}}"#,
            "comps[0] has class `Node`, expected `Component`",
        ),
        (
            r#"{"params": {"comps": [], "nrCables": [], "x": 1}}"#,
            "unknown parameter `x`",
        ),
    ];
    for (json, message) in cases {
        let p = dir.path().join("u.json");
        std::fs::write(&p, json).unwrap();
        let out = ospec(&[&spec, p.to_str().unwrap()]);
        assert_eq!(out.code, 2);
        assert!(out.stderr.contains(message), "{json}: {}", out.stderr);
    }
}

#[test]
fn missing_method_value_is_a_binding_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("u.json");
    std::fs::write(&p, r#"{"params": {"comps": [{"class": "Component", "methods": {"getType": 1}}], "nrCables": 2}}"#)
        .unwrap();
    let out = ospec(&[&specs("network.ospec"), p.to_str().unwrap()]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.starts_with("error[binding]"), "{}", out.stderr);
    assert!(out.stderr.contains("getNrSock"));
}

#[test]
fn external_backend_without_a_solver_fails_cleanly() {
    let out = ospec(&[
        &specs("network.ospec"),
        &specs("network.json"),
        "--backend",
        "external",
        "--solver-cmd",
        "no-such-solver-binary",
    ]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.starts_with("error[backend]"), "{}", out.stderr);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ospec");
    let status = |args: &[String]| Command::new(bin).args(args).output().unwrap();
    let ok = status(&[
        specs("network.ospec"),
        specs("network.json"),
        "-n".into(),
        "1".into(),
        "--seedless".into(),
    ]);
    assert_eq!(ok.status.code(), Some(0));
    let unsat = status(&[specs("network.ospec"), specs("network_4_cables.json")]);
    assert_eq!(unsat.status.code(), Some(1));
    let bad = status(&["nope".into()]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
}
