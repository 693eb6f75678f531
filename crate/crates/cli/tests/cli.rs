use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn equid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equid"))
        .args(args)
        .env_remove("EQUID_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(stdout(o).trim()).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write_a_function(dir: &Path) -> String {
    let path = dir.join("ab.json");
    fs::write(
        &path,
        r#"{"name":"ab","functions":[{"poly":[0,1],"rule":{"kind":"complete"}}]}"#,
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn check_a_function() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write_a_function(dir.path());
    let o = equid(&["check", "--system", &sys, "--q", "12"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), r#"{"equidistributed":true}"#);
}

#[test]
fn check_reports_witness() {
    let o = equid(&["check", "--system", "corpus:t_t3", "--q", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["equidistributed"], false);
    assert_eq!(v["witness"]["kind"], "combination");
}

#[test]
fn snf_prints_invariant_factors() {
    let o = equid(&["snf", "--system", "corpus:t_t3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["system"]["invariant_factors"], serde_json::json!(["1", "3"]));
    assert_eq!(v["system"]["C0"], "5");
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(equid(&["bogus"]).status.code(), Some(64));
    assert_eq!(equid(&["check", "--nope"]).status.code(), Some(64));
    assert_eq!(equid(&["check", "--system", "corpus:t_t3"]).status.code(), Some(64));
    assert_eq!(equid(&["--help"]).status.code(), Some(0));
}

#[test]
fn error_kinds_map_to_exit_codes() {
    let pre = equid(&["check", "--system", "corpus:t_t3", "--q", "1"]);
    assert_eq!(pre.status.code(), Some(1));
    let missing = equid(&["check", "--system", "/nonexistent.json", "--q", "5"]);
    assert_eq!(missing.status.code(), Some(1));
    let budget = equid(&["check", "--system", "corpus:tm1_tm1sq", "--q", "30", "--force-slow", "--budget", "10"]);
    assert_eq!(budget.status.code(), Some(2));
    let env_budget = Command::new(env!("CARGO_BIN_EXE_equid"))
        .args(["check", "--system", "corpus:tm1_tm1sq", "--q", "30", "--force-slow", "--budget", "1e9"])
        .env("EQUID_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(env_budget.status.code(), Some(2));
}

#[test]
fn dry_run_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write_a_function(dir.path());
    let cases: Vec<Vec<&str>> = vec![
        vec!["check", "--system", &sys, "--q", "12"],
        vec!["snf", "--system", &sys],
        vec!["charsum", "--system", &sys, "--mod", "7", "--sweep", "weil"],
        vec!["vcount", "--system", &sys, "--q", "7", "--N", "2", "--w", "3"],
        vec!["count", "--system", &sys, "--q", "7", "--x", "1e7"],
        vec!["experiment", "cex6.1", "--q", "11"],
    ];
    for mut args in cases {
        args.push("--dry-run");
        let o = equid(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert_eq!(json(&o)["dry_run"], true);
    }
}

#[test]
fn count_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("counts.csv");
    let o = equid(&[
        "count", "--system", "corpus:t_t3", "--q", "5", "--x", "1e5", "--restrict", "pk:2", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let meta = lines.next().unwrap();
    assert!(meta.starts_with("#x=100000,q=5,restriction=pk:2,total="));
    assert_eq!(lines.next().unwrap(), "b_1,b_2,count");
    let total: u64 = meta.rsplit('=').next().unwrap().parse().unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 25);
    let sum: u64 = rows.iter().map(|r| r.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(sum, total);
    assert_eq!(json(&o)["total"], total);
}

#[test]
fn vcount_methods_agree() {
    let exact = equid(&["vcount", "--system", "corpus:t_t2", "--q", "12", "--N", "3", "--w", "2,5"]);
    let orth = equid(&[
        "vcount", "--system", "corpus:t_t2", "--q", "12", "--N", "3", "--w", "2,5", "--method", "orthogonality",
    ]);
    assert_eq!(json(&exact)["count"], json(&orth)["count"]);
}

#[test]
fn manifest_replay_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cz.csv");
    let manifest = dir.path().join("m.json");
    let o = equid(&[
        "charsum", "--system", "corpus:t_t3", "--mod", "49", "--sweep", "cz", "--out",
        out.to_str().unwrap(), "--manifest-out", manifest.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let first = fs::read(&out).unwrap();
    fs::remove_file(&out).unwrap();
    let replay = equid(&["manifest", manifest.to_str().unwrap()]);
    assert_eq!(replay.status.code(), Some(0));
    assert_eq!(fs::read(&out).unwrap(), first);
    assert_eq!(stdout(&o), stdout(&replay));
}

#[test]
fn experiment_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    fs::write(&g, r#"{"functions":[{"poly":[-1,1],"rule":{"kind":"strong"}}]}"#).unwrap();
    let out = dir.path().join("cex.csv");
    let o = equid(&[
        "experiment", "cex4.1", "--system", g.to_str().unwrap(), "--q", "41", "--x", "2e5", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v["count"].as_u64().unwrap() >= v["prime_lower_bound"].as_u64().unwrap());
    assert!(fs::read_to_string(&out).unwrap().starts_with("#x=200000,q=41,restriction=none,"));

    let bad = equid(&["experiment", "cex4.1", "--system", g.to_str().unwrap(), "--q", "3", "--x", "2e5"]);
    assert_eq!(bad.status.code(), Some(1));
    let wrong = equid(&[
        "experiment", "thm1.4", "--system", "corpus:t_2t_plus_1", "--a", "3", "--q", "29", "--x", "1e5",
    ]);
    assert_eq!(wrong.status.code(), Some(1));
    let t14 = equid(&[
        "experiment", "thm1.4", "--system", "corpus:t_2t_plus_1", "--a", "2", "--b", "0", "--q", "29", "--x", "1e5",
    ]);
    assert_eq!(json(&t14)["b_last"], "3");
}
