mod common;

use std::path::Path;
use std::process::{Command, Output};

fn caa(args: &[&str], file: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caa"))
        .args(args)
        .arg(file)
        .env("CAA_COLOR", "0")
        .output()
        .expect("run caa")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn validate_accepts_shipped_protocols() {
    for name in common::shipped() {
        let out = caa(&["validate"], &common::protocol_path(&name));
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stdout(&out));
        assert!(stdout(&out).starts_with("ok: "));
    }
}

#[test]
fn validate_reports_mixed_state_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        &dir,
        "mixed.caa",
        "machine #0 {\n    initial s0;\n    s0 -- ?a -> s1;\n    s0 -- #1!b -> s1;\n}\nmachine #1 { initial t; t -- ?b -> t; }\n",
    );
    let out = caa(&["validate"], &file);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("MixedState"), "{text}");
    assert!(text.contains(":4:"), "{text}");
}

#[test]
fn validate_strict_fails_on_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        &dir,
        "unreachable.caa",
        "machine #0 { initial a; final a; b -- ?x -> a; }\n",
    );
    assert_eq!(caa(&["validate"], &file).status.code(), Some(0));
    let strict = caa(&["validate", "--strict"], &file);
    assert_eq!(strict.status.code(), Some(1));
    assert!(stdout(&strict).contains("warning"));
}

#[test]
fn garbage_input_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(&dir, "garbage.caa", "this is not { a protocol");
    for cmd in ["validate", "explore", "races", "classify"] {
        let out = caa(&[cmd], &file);
        assert_eq!(out.status.code(), Some(2), "{cmd}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("1:1"), "{cmd}");
    }
}

#[test]
fn missing_file_is_an_input_error() {
    let out = caa(&["explore"], Path::new("/nonexistent/protocol.caa"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_protocol_is_rejected_before_exploring() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(&dir, "self.caa", "machine #0 { initial a; a -- #0!x -> b; }\n");
    assert_eq!(caa(&["explore"], &file).status.code(), Some(1));
}

#[test]
fn exploring_past_a_bound_exits_three() {
    let pingpong = common::protocol_path("pingpong.caa");
    let out = caa(&["explore", "--max-depth", "1"], &pingpong);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("bound exceeded (max_depth)"));

    let full = caa(&["explore", "--format", "json"], &pingpong);
    assert_eq!(full.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_str(stdout(&full).lines().next().unwrap()).unwrap();
    assert_eq!(summary["states"], 5);
    assert_eq!(summary["traces"], 1);
    assert_eq!(summary["verdict"], "complete");
}

#[test]
fn explore_prints_traces_on_request() {
    let out = caa(
        &["explore", "--traces", "--format", "json"],
        &common::protocol_path("fork.caa"),
    );
    let docs: Vec<serde_json::Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(docs.len(), 1 + docs[0]["traces"].as_u64().unwrap() as usize);
    assert!(docs[1..]
        .iter()
        .all(|d| d["kind"] == "trace" && d["verdict"] == "complete"));
}

#[test]
fn run_is_reproducible_by_seed() {
    let mem4 = common::protocol_path("mem4.caa");
    let a = caa(&["run", "--seed", "42"], &mem4);
    let b = caa(&["run", "--seed", "42"], &mem4);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).starts_with("seed: 42\n"));

    let drawn = caa(&["run", "--format", "json"], &mem4);
    let doc: serde_json::Value = serde_json::from_str(stdout(&drawn).trim()).unwrap();
    let seed = doc["seed"].as_u64().unwrap().to_string();
    let again = caa(&["run", "--format", "json", "--seed", &seed], &mem4);
    assert_eq!(stdout(&drawn), stdout(&again));
}

#[test]
fn races_exit_four_when_found() {
    let fork = caa(&["races", "--format", "json"], &common::protocol_path("fork.caa"));
    assert_eq!(fork.status.code(), Some(4));
    let reports: Vec<serde_json::Value> = stdout(&fork)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["machine"], 0);
    assert_eq!(reports[0]["racing"].as_array().unwrap().len(), 2);

    let pingpong = caa(&["races"], &common::protocol_path("pingpong.caa"));
    assert_eq!(pingpong.status.code(), Some(0));
    assert!(stdout(&pingpong).contains("no races"));

    let bounded = caa(&["races", "--max-depth", "1"], &common::protocol_path("pingpong.caa"));
    assert_eq!(bounded.status.code(), Some(3));
}

#[test]
fn classify_prints_the_tier() {
    let cases = [
        ("pingpong.caa", "StronglyCompatible"),
        ("weak.caa", "WeaklyCompatible"),
        ("lacking.caa", "CommunicationLacking"),
        ("incompatible.caa", "Incompatible"),
    ];
    for (name, tier) in cases {
        let out = caa(&["classify"], &common::protocol_path(name));
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert_eq!(stdout(&out).trim(), tier, "{name}");
    }
    let bounded = caa(&["classify", "--max-states", "2"], &common::protocol_path("mem4.caa"));
    assert_eq!(bounded.status.code(), Some(3));
}

#[test]
fn codegen_creates_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("nested/erl");
    let out = Command::new(env!("CARGO_BIN_EXE_caa"))
        .arg("codegen")
        .arg(common::protocol_path("mem4.caa"))
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    for pid in 0..4 {
        let module = out_dir.join(format!("caa_m{pid}.erl"));
        let source = std::fs::read_to_string(&module).unwrap();
        assert!(source.contains(&format!("\n-module(caa_m{pid}).\n")));
    }
}

#[test]
fn bounds_must_be_positive() {
    let out = caa(&["explore", "--max-depth", "0"], &common::protocol_path("pingpong.caa"));
    assert_eq!(out.status.code(), Some(2));
    let out = caa(&["explore", "--jobs", "0"], &common::protocol_path("pingpong.caa"));
    assert_eq!(out.status.code(), Some(2));
}
