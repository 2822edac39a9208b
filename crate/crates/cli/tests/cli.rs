use std::path::Path;
use std::process::{Command, Output};

fn coopnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coopnet"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn plan_then_verify_increment() {
    let d = tempfile::tempdir().unwrap();
    let o = coopnet(d.path(), &["plan", "--p", "0.9", "--c", "1.3", "--n", "16", "--out", "plan.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.path().join("plan.json").exists());
    assert!(d.path().join("plan.manifest.json").exists());
    let o = coopnet(d.path(), &["verify", "--gadget", "f1", "--plan", "plan.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("f1: pass"), "{}", stdout(&o));
}

#[test]
fn toy_attractor_from_crude_start() {
    let d = tempfile::tempdir().unwrap();
    let o = coopnet(d.path(), &["build", "--profile", "toy", "--out", "toy.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let layout: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("toy.layout.json")).unwrap()).unwrap();
    let s_plus = layout["s_plus"].as_str().unwrap().to_string();
    let tape_len = layout["layout"]["tape_len"].as_u64().unwrap();
    let init = format!("hex:{s_plus}");
    let o = coopnet(d.path(), &["attractor", "--net", "toy.json", "--init", &init, "--max-steps", "1000000"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("transient,period"));
    let row: Vec<u64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row, vec![0, tape_len * 56]);
}

#[test]
fn stats_are_reproducible_across_jobs() {
    let d = tempfile::tempdir().unwrap();
    for (out, jobs) in [("a.csv", "1"), ("b.csv", "3")] {
        let o = coopnet(
            d.path(),
            &["stats", "--profile", "toy", "--trials", "130", "--seed", "4", "--jobs", jobs, "--out", out],
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let read = |f: &str| std::fs::read(d.path().join(f)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.json"), read("b.json"));
    let csv = String::from_utf8(read("a.csv")).unwrap();
    assert!(csv.starts_with("trial,seed,eventE,eventF,coalesced_t,hit_s_plus,window_pass\n"));
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(coopnet(d.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(coopnet(d.path(), &["plan", "--c", "1.3", "--n", "16"]).status.code(), Some(2));
    let strict = coopnet(d.path(), &["plan", "--n", "16", "--profile", "strict", "--out", "p.json"]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&strict.stderr).contains("infeasible"));
    let bad_init = coopnet(d.path(), &["build", "--profile", "toy", "--out", "t.json"]);
    assert_eq!(bad_init.status.code(), Some(0));
    let o = coopnet(d.path(), &["attractor", "--net", "t.json", "--init", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = coopnet(d.path(), &["attractor", "--net", "t.json", "--max-steps", "10"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn lcm_export_and_trace() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(coopnet(d.path(), &["lcm", "--n", "16", "--out", "l.csv"]).status.code(), Some(0));
    let table = std::fs::read_to_string(d.path().join("l.csv")).unwrap();
    assert!(table.contains("16,4,21840,864,1\n"));
    assert_eq!(coopnet(d.path(), &["build", "--profile", "toy", "--out", "t.json"]).status.code(), Some(0));
    assert_eq!(coopnet(d.path(), &["export", "--net", "t.json", "--out", "t.dot"]).status.code(), Some(0));
    assert!(std::fs::read_to_string(d.path().join("t.dot")).unwrap().starts_with("digraph"));
    let o = coopnet(d.path(), &["simulate", "--net", "t.json", "--horizon", "3", "--blocks", "--seed", "2", "--out", "tr.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let trace = std::fs::read_to_string(d.path().join("tr.csv")).unwrap();
    assert!(trace.starts_with("t,X0,X1,X2,"));
    assert_eq!(trace.lines().count(), 5);
}
