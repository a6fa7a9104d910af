mod common;

use std::process::{Command, Output};

use common::corpus_path;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asyncsub")).args(args).output().expect("spawn")
}

fn corpus(name: &str) -> String {
    corpus_path(name).to_string_lossy().into_owned()
}

fn first_line(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).lines().next().unwrap_or("").to_string()
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    for (sub, sup, token, code) in [
        ("m_r", "m_c", "true", 0),
        ("ex24_m1", "ex24_m2", "false", 1),
        ("ex315_m1", "ex315_m2", "unknown", 2),
    ] {
        let out = bin(&["check", &corpus(sub), &corpus(sup)]);
        assert_eq!(first_line(&out), token, "{sub} ≤ {sup}");
        assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);
        assert_eq!(out.status.code(), Some(code));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn direction_flag_limits_the_runs() {
    let out = bin(&["check", &corpus("ex24_m1"), &corpus("ex24_m2"), "--direction", "dual"]);
    assert_eq!(first_line(&out), "false");
    assert!(String::from_utf8_lossy(&out.stderr).contains("dualized"));
}

#[test]
fn tight_limits_give_unknown() {
    let out = bin(&["check", &corpus("m_r"), &corpus("m_c"), "--max-nodes", "3"]);
    assert_eq!(first_line(&out), "unknown");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn one_file_may_hold_both_machines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pair.fsm");
    let text = std::fs::read_to_string(corpus_path("m_r")).unwrap() + &std::fs::read_to_string(corpus_path("m_c")).unwrap();
    std::fs::write(&path, text).unwrap();
    let out = bin(&["check", path.to_str().unwrap()]);
    assert_eq!(first_line(&out), "true");
}

#[test]
fn input_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.fsm");
    std::fs::write(&bad, "machine x\ninitial q\nq = a r\n").unwrap();
    for args in [
        vec!["check", bad.to_str().unwrap(), bad.to_str().unwrap()],
        vec!["check", "/nonexistent.fsm", "/nonexistent.fsm"],
        vec!["check", &corpus("m_r")],
        vec!["check"],
        vec!["frobnicate"],
        vec!["check", "a", "b", "--direction", "sideways"],
    ] {
        let out = bin(&args);
        assert_eq!(out.status.code(), Some(3), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn viz_writes_dot_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["viz", &corpus("m_r"), &corpus("m_c"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names, ["direct_candidates.dot", "direct_n8_g.dot", "direct_n8_gp.dot", "direct_tree.dot"]);
    let tree = std::fs::read_to_string(dir.path().join("direct_tree.dot")).unwrap();
    assert!(tree.starts_with("digraph simulation {"));
}

#[test]
fn gen_bench_writes_parseable_machines() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["gen-bench", "--n", "2", "--m", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let m1 = dir.path().join("bench_2_3_m1.fsm");
    let m2 = dir.path().join("bench_2_3_m2.fsm");
    let out = bin(&["check", m1.to_str().unwrap(), m2.to_str().unwrap()]);
    assert_eq!(first_line(&out), "true");
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let out = bin(&["bench", "--grid", "n=1..2,m=1", "--reps", "1", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "n,m,verdict,ms_mean,ms_stddev,nodes_peak");
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("1,1,true,") && rows[2].starts_with("2,1,true,"));
    let bad = bin(&["bench", "--grid", "n=0", "--csv", "x.csv"]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn oracle_subcommand_reports_both_oracles() {
    let out = bin(&["oracle", &corpus("m_r"), &corpus("m_c")]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("fifo: no violation"), "{text}");
    assert!(text.contains("sim: none within depth 40"), "{text}");
}
