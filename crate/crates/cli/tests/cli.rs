use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qsep(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsep"))
        .args(args)
        .current_dir(dir)
        .env("QSEP_OUT_DIR", dir)
        .env_remove("QSEP_CONFIG")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn alpha_curve_rows_and_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["alpha-curve", "--samples", "3200", "--constraint", "convmineig", "--grid", "-2.25:2.75:1000", "--svg"];
    let o = qsep(dir.path(), &args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = dir.path().join("alpha_curve_2q-real.csv");
    let first = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines.len(), 1002);
    assert_eq!(lines[0], "alpha,hs_p,hs_se,hs_ess");
    assert!(fs::read_to_string(dir.path().join("alpha_curve_2q-real.svg")).unwrap().starts_with("<svg"));

    let again = qsep(dir.path(), &[&args[..], &["--workers", "1"]].concat());
    assert_eq!(code(&again), 0);
    assert_eq!(fs::read_to_string(&csv).unwrap(), first);
}

#[test]
fn resumed_run_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["marginal", "--samples", "3200", "--bins", "20", "--out", "m.csv"];
    assert_eq!(code(&qsep(dir.path(), &args)), 0);
    let full = fs::read_to_string(dir.path().join("m.csv")).unwrap();

    // drop the last ten block records, as if interrupted
    let ckpt = dir.path().join("m.csv.ckpt");
    let text = fs::read_to_string(&ckpt).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    fs::write(&ckpt, lines[..lines.len() - 10].join("\n") + "\n").unwrap();
    fs::remove_file(dir.path().join("m.csv")).unwrap();

    let o = qsep(dir.path(), &[&args[..], &["--resume"]].concat());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("resuming with 6/16 blocks"));
    assert_eq!(fs::read_to_string(dir.path().join("m.csv")).unwrap(), full);

    // a checkpoint from a different configuration is refused
    let o = qsep(dir.path(), &[&args[..], &["--resume", "--seed", "9"]].concat());
    assert_eq!(code(&o), 1);
}

#[test]
fn config_file_sections_apply() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.ini"),
        "samples = 1600\n[abs-sep]\nsystem = 2q-real\nout = abs.csv\n",
    )
    .unwrap();
    let o = qsep(dir.path(), &["--config", "run.ini", "abs-sep"]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("abs.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("N4-rank4-beta1,hs,"), "{csv}");

    fs::write(dir.path().join("bad.ini"), "colour = red\n").unwrap();
    assert_eq!(code(&qsep(dir.path(), &["--config", "bad.ini", "abs-sep"])), 1);
}

#[test]
fn esf_pair_writes_bins_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = qsep(dir.path(), &["esf", "--samples", "3200", "--bins", "40", "--out", "e.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("e.csv")).unwrap();
    assert_eq!(csv.lines().count(), 41);
    assert!(csv.lines().next().unwrap().ends_with(",ratio,ratio_se"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("e.csv.report.json")).unwrap()).unwrap();
    assert_eq!(report["jumps"].as_array().unwrap().len(), 2);
    assert!(report.get("ratio").is_some());
}

#[test]
fn oracle_lookups() {
    let dir = tempfile::tempdir().unwrap();
    let o = qsep(dir.path(), &["oracle", "hs_sep_complex"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    let value: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(value, 8.0 / 33.0);

    let all = stdout(&qsep(dir.path(), &["oracle", "all"]));
    assert!(all.lines().count() > 30);

    let o = qsep(dir.path(), &["oracle", "no_such_constant"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("hs_sep_real"));

    let v = stdout(&qsep(dir.path(), &["oracle", "verify"]));
    assert_eq!(v.lines().count(), 3);
    assert!(v.lines().skip(1).all(|l| l.ends_with(",true,36864") || l.contains(",true,")));
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = qsep(dir.path(), &["check", "smoke", "--only", "4,10"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("check_smoke.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["criteria"].as_array().unwrap().len(), 2);
    assert!(summary["criteria"].as_array().unwrap().iter().all(|c| c["samples"] == 0));

    assert_eq!(code(&qsep(dir.path(), &["check", "full", "--samples", "10"])), 1);
    assert_eq!(code(&qsep(dir.path(), &["check", "smoke", "--only", "14"])), 1);
    assert_eq!(code(&qsep(dir.path(), &["check", "medium"])), 1);
    assert_eq!(code(&qsep(dir.path(), &["no-such-command"])), 1);
    assert_eq!(code(&qsep(dir.path(), &["--help"])), 0);
}
