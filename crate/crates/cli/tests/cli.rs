use std::process::{Command, Output};

fn mod2hecke(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mod2hecke"))
        .args(args)
        .env_remove("MOD2HECKE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn cn_gen_csv() {
    let o = mod2hecke(&["cn", "gen", "--max", "5", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,degree,hex");
    assert_eq!(lines[1], "0,-inf,00");
    assert_eq!(lines[6], "5,4,10");
}

#[test]
fn cn_express_reports_supports() {
    let o = mod2hecke(&["cn", "express", "--max", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("C_8 = sum of C_k, k in {3, 5, 6}"));
    assert!(text
        .trim_end()
        .ends_with("PASS cn express: all C_{4m}, 4m<2000, expressed"));
}

#[test]
fn kernel_verify_json() {
    let o = mod2hecke(&["kernel", "verify", "--max-m", "12", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["passed"], true);
    let reports = doc["result"].as_array().unwrap();
    assert_eq!(reports.len(), 13);
    for (m, r) in reports.iter().enumerate() {
        assert_eq!(r["dim"], m + 1);
    }
}

#[test]
fn adapted_build_manifest() {
    let o = mod2hecke(&["adapted", "build", "--grade", "2", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let grid = &doc["result"]["grid"];
    assert_eq!(grid["d"], 2);
    let entries = grid["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 6);
    assert_eq!(
        entries[0],
        serde_json::json!({ "i": 0, "j": 0, "g_hex": "01" })
    );
}

#[test]
fn tp_series_for_x() {
    let o = mod2hecke(&[
        "adapted",
        "tp-series",
        "--p",
        "7",
        "--grade",
        "3",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "a,b\n1,0\n");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["cn", "gen"][..],
        &["cn", "gen", "--max", "0"],
        &["series", "check-u3", "--max", "64", "--precision", "300"],
        &["adapted", "tp-series", "--p", "3", "--grade", "1"],
        &["adapted", "stabilize", "--primes", "5,8"],
        &["kernel", "basis", "--m", "1", "--format", "xml"],
        &["frobnicate"],
    ] {
        let o = mod2hecke(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn output_is_independent_of_jobs() {
    let args = ["verify", "all", "--level", "quick", "--format", "json"];
    let one = mod2hecke(&[&args[..], &["--jobs", "1"]].concat());
    let four = mod2hecke(&[&args[..], &["--jobs", "4"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mod2hecke"))
        .args(["cn", "degree-law", "--max", "500", "--format", "csv"])
        .env("MOD2HECKE_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "PASS cn degree-law: degree law holds for n <= 500\n"
    );
    let written = std::fs::read_to_string(dir.path().join("cn-degree-law.csv")).unwrap();
    assert_eq!(written, "nmax,passed,first_violation\n500,true,\n");
}

#[test]
fn explicit_out_wins() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/report.txt");
    let o = Command::new(env!("CARGO_BIN_EXE_mod2hecke"))
        .args(["series", "check-f", "--precision", "500", "--out"])
        .arg(&path)
        .env("MOD2HECKE_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("F 500 true\nG 500 true\nD 500 true\n"));
    assert!(!dir.path().join("series-check-f.txt").exists());
}

#[test]
fn stabilize_small() {
    let o = mod2hecke(&[
        "adapted",
        "stabilize",
        "--primes",
        "5,7",
        "--samples",
        "1",
        "--precision",
        "256",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("8 cases hold"));
}
