//! End-to-end runs of the `hardy-node` binary on the fixture scenarios.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn hardy_node(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_hardy-node"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(text) = stdin {
            pipe.write_all(text.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("every stdout line is JSON"))
        .collect()
}

fn summary(lines: &[Value]) -> &Value {
    lines.iter().rev().find(|l| l["summary"] == true).expect("summary line")
}

#[test]
fn every_fixture_passes() {
    for (cmd, file) in [
        ("node-check", "node.json"),
        ("extend-check", "extend.json"),
        ("index", "index.json"),
        ("intersect", "intersect.json"),
        ("energy", "energy.json"),
        ("moduli-dim", "moduli.json"),
    ] {
        let path = fixture(file);
        let out = hardy_node(&["--seed", "7", cmd, path.to_str().unwrap()], None);
        let lines = json_lines(&out);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let s = summary(&lines);
        assert_eq!(s["status"], "pass");
        assert_eq!(s["command"], cmd);
        assert_eq!(s["inputs_digest"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn node_scenario_is_reproducible_under_a_seed() {
    let path = fixture("node.json");
    let run = || {
        let out = hardy_node(&["--seed", "7", "node-check", path.to_str().unwrap()], None);
        let mut lines = json_lines(&out);
        for l in &mut lines {
            l.as_object_mut().unwrap().remove("wall_time_s");
        }
        lines
    };
    let first = run();
    assert_eq!(first, run());
    assert_eq!(summary(&first)["scenario"], "node-basic");
}

#[test]
fn digest_depends_on_settings() {
    let path = fixture("moduli.json");
    let digest = |seed: &str| {
        let out = hardy_node(&["--seed", seed, "moduli-dim", path.to_str().unwrap()], None);
        summary(&json_lines(&out))["inputs_digest"].clone()
    };
    assert_ne!(digest("1"), digest("2"));
}

#[test]
fn malformed_json_exits_with_two_and_a_position() {
    let out = hardy_node(&["index", "-"], Some("{\"triples\": [ }"));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1 column"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_fields_are_rejected() {
    let out = hardy_node(&["moduli-dim"], Some(r#"{"rowz": []}"#));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_expectation_exits_with_one() {
    let text = r#"{"rows": [{"g": 0, "n": 0, "m": 2, "c1d": 3, "expected": 7}]}"#;
    let out = hardy_node(&["moduli-dim"], Some(text));
    assert_eq!(out.status.code(), Some(1));
    let lines = json_lines(&out);
    assert_eq!(summary(&lines)["scenario"], "stdin");
    assert_eq!(summary(&lines)["failed"], 1);
}

#[test]
fn moduli_table_values() {
    let text = r#"{"rows": [
        {"label": "lines", "g": 0, "n": 0, "m": 2, "c1d": 3},
        {"label": "conics", "g": 0, "n": 0, "m": 2, "c1d": 6},
        {"label": "genus 3 curves", "g": 3, "n": 0, "m": 0, "c1d": 0}
    ]}"#;
    let out = hardy_node(&["moduli-dim"], Some(text));
    assert_eq!(out.status.code(), Some(0));
    let lines = json_lines(&out);
    let value = |label: &str| {
        lines
            .iter()
            .find(|l| l["name"].as_str().is_some_and(|n| n.starts_with(label) && n.ends_with("dimension")))
            .map(|l| l["value"].clone())
    };
    assert_eq!(value("lines"), Some(Value::from(2)));
    assert_eq!(value("conics"), Some(Value::from(5)));
    assert_eq!(value("genus 3 curves"), Some(Value::from(6)));
}

#[test]
fn multiple_files_keep_their_order() {
    let (a, b) = (fixture("moduli.json"), fixture("index.json"));
    let out = hardy_node(&["--jobs", "2", "index", b.to_str().unwrap(), b.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<_> = json_lines(&out).iter().filter(|l| l["summary"] == true).map(|l| l["scenario"].clone()).collect();
    assert_eq!(names.len(), 2);
    let out = hardy_node(&["moduli-dim", a.to_str().unwrap(), "missing.json"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_all_passes() {
    let out = hardy_node(&["verify"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(summary(&json_lines(&out))["failed"], 0);
}
