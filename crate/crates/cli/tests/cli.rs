use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chorc"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn parse_prints_canonical_form() {
    let o = run(&["parse", &corpus("fig5b.gc")]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "(A->B:x ; B->C:y)");
}

#[test]
fn syntax_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.gc");
    fs::write(&f, "A->B:x ;").unwrap();
    let o = run(&["parse", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("syntax error"));
}

#[test]
fn missing_files_exit_with_two() {
    let o = run(&["parse", "/nonexistent/x.gc"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn wf_reports_the_missing_dependency() {
    let o = run(&["wf", &corpus("fig5e.gc")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("sequential composition unsound"));

    let o = run(&["wf", &corpus("reflection.gc")]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("well-formed"));
    assert!(out.contains("B active"), "{out}");
}

#[test]
fn wf_json_lists_roles() {
    let o = run(&["wf", "--json", &corpus("choice_abc.gc")]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["defined"], false);
}

#[test]
fn projection_of_the_receiver() {
    let o = run(&["project", &corpus("conc.gc"), "-p", "B", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["states"].as_array().unwrap().len(), 3);
    assert_eq!(v["transitions"].as_array().unwrap().len(), 3);

    let o = run(&["project", &corpus("conc.gc"), "-p", "Z"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn projection_as_dot() {
    let o = run(&["project", &corpus("fig5b.gc"), "--dot"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("digraph"));
}

#[test]
fn language_and_membership() {
    let o = run(&["lang", &corpus("fig5b.gc")]);
    assert!(o.status.success());
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "ε");
    assert_eq!(lines[4], "AB!x AB?x BC!y BC?y");

    let o = run(&["member", &corpus("fig5b.gc"), "AB!x AB?x"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "yes");
    let o = run(&["member", &corpus("fig5b.gc"), "BC!y"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "no");
}

#[test]
fn sim_replays_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("trace");
    fs::write(&t, "AB!x\nAB?x\n").unwrap();
    let o = run(&["sim", &corpus("fig5b.gc"), "--interactive-trace", t.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    let (a, cfg) = lines[0].split_once('\t').unwrap();
    assert_eq!(a, "AB!x");
    let cfg: serde_json::Value = serde_json::from_str(cfg).unwrap();
    assert_eq!(cfg["buffers"]["A>B"], serde_json::json!(["x"]));

    fs::write(&t, "BC!y\n").unwrap();
    let o = run(&["sim", &corpus("fig5b.gc"), "--interactive-trace", t.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not enabled"));
}

#[test]
fn sim_explores_without_deadlock() {
    let o = run(&["sim", &corpus("fork_join.gc"), "--buffer", "bag"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("no deadlock"));
}

#[test]
fn verify_corpus_passes_under_both_policies() {
    let dir = corpus("");
    for buffer in ["fifo", "bag"] {
        let o = run(&["verify", &dir, "--buffer", buffer]);
        assert!(o.status.success(), "{buffer}: {}", stdout(&o));
        assert!(stdout(&o).contains("all checks passed"));
    }
}

#[test]
fn verify_json_is_reproducible_across_thread_counts() {
    let dir = corpus("");
    let a = run_env(&["verify", &dir, "--json", "--no-stats"], &[("CHORC_THREADS", "1")]);
    let b = run_env(&["verify", &dir, "--json", "--no-stats"], &[("CHORC_THREADS", "4")]);
    let c = run_env(&["verify", &dir, "--json", "--no-stats"], &[("CHORC_THREADS", "4")]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(b.stdout, c.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["reports"][0]["stats"].get("millis").is_none());
}

#[test]
fn verify_generated_terms() {
    let args = ["verify", "--random", "8", "--seed", "3", "--size", "3", "--json", "--no-stats"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["reports"].as_array().unwrap().len(), 8);
    assert_eq!(v["reports"][0]["subject"], "random-3-3");
    assert_eq!(v["reports"][7]["subject"], "random-10-3");
}

#[test]
fn sidecar_mismatch_fails_and_bad_sidecar_errors() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("t.gc"), "A->B:x + A->B:y").unwrap();
    fs::write(dir.path().join("t.expect"), "active = B\n").unwrap();
    let o = run(&["verify", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("some checks failed"));

    fs::write(dir.path().join("t.expect"), "colour = red\n").unwrap();
    let o = run(&["verify", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}
