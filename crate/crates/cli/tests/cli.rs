use std::path::Path;
use std::process::{Command, Output};

fn bicons(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bicons"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// The `key=value` field of the status line.
fn field(o: &Output, key: &str) -> String {
    let err = stderr(o);
    let line = err.lines().last().expect("status line");
    let pat = format!("{key}=");
    let rest = &line[line
        .find(&pat)
        .unwrap_or_else(|| panic!("{key} missing in {line}"))
        + pat.len()..];
    rest.split(' ')
        .next()
        .unwrap()
        .trim_matches('"')
        .to_string()
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_thm4_passes_with_solver_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = bicons(&[
        "verify",
        "thm4",
        "--a",
        "2",
        "--H0",
        "0.5",
        "--f0",
        "1",
        "--f0p",
        "2",
        "--grid",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).starts_with("status=pass code=0"));
    let r = report(&out);
    assert_eq!(r["schema"], "bicons.report/1");
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["grid"]["nu"], 9);
    let adm = r["solver"]["admissible"].as_array().unwrap();
    assert!(adm[1].as_f64().unwrap() < 0.5);
}

#[test]
fn product_constraint_violation_is_invalid() {
    let o = bicons(&[
        "verify", "product", "--b1", "1", "--b3", "0.5", "--b2", "0.4",
    ]);
    assert_eq!(code(&o), 2);
    assert_eq!(field(&o, "kind"), "constraint");
    assert!(o.stdout.is_empty());
}

#[test]
fn forced_b4_fails_pmcv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = bicons(&[
        "verify",
        "product",
        "--b1",
        "1",
        "--b3",
        "0.5",
        "--force-b4",
        "0.1",
        "--grid",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let r = report(&out);
    assert_eq!(r["verdict"], "fail");
    assert!(r["solver"].is_null());
    let pmcv = r["entries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["name"] == "pmcv")
        .unwrap();
    assert_eq!(pmcv["passed"], false);
}

#[test]
fn horizontal_user_map_is_degenerate() {
    let o = bicons(&[
        "verify",
        "user-map",
        "--component",
        "0",
        "--component",
        "u",
        "--component",
        "v",
        "--grid",
        "5",
    ]);
    assert_eq!(code(&o), 2);
    assert_eq!(field(&o, "status"), "degenerate");
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["degeneracies"][0]["kind"], "horizontal-slice");
}

#[test]
fn bad_expression_is_invalid() {
    let o = bicons(&[
        "verify",
        "user-map",
        "--component",
        "u +* v",
        "--component",
        "u",
        "--component",
        "v",
    ]);
    assert_eq!(code(&o), 2);
    assert_eq!(field(&o, "kind"), "usage");
}

#[test]
fn h4_scan_default_minimum() {
    let o = bicons(&["scan", "h4"]);
    assert_eq!(code(&o), 0);
    let m: f64 = field(&o, "min_abs_residual").parse().unwrap();
    assert!(m >= 0.0997 && m < 0.101, "{m}");
    assert_eq!(field(&o, "nodes"), "150801");
}

#[test]
fn h4_scan_single_point() {
    let o = bicons(&["scan", "h4", "--theta", "1,1,1", "--tau", "2,2,1"]);
    assert_eq!(code(&o), 0);
    let m: f64 = field(&o, "min_abs_residual").parse().unwrap();
    assert!((m - 4.8598).abs() < 1e-4, "{m}");
}

#[test]
fn empty_scan_range_is_invalid() {
    let o = bicons(&["scan", "h4", "--theta", "0.1,3,0"]);
    assert_eq!(code(&o), 2);
    assert_eq!(field(&o, "kind"), "usage");
}

#[test]
fn slice_scan_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = bicons(&[
        "scan",
        "slice",
        "--theta",
        "-1,1,5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&o, "excluded"), "1");
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "theta,tau,residual,bound");
    assert_eq!(text.lines().count(), 5);
    let flat = bicons(&["scan", "slice", "--c", "0"]);
    assert_eq!(code(&flat), 2);
    assert_eq!(field(&flat, "kind"), "inapplicable");
}

#[test]
fn solve_tables_cover_the_admissible_interval() {
    let o = bicons(&["solve", "f4", "--samples", "5"]);
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout.clone()).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    let adm = field(&o, "admissible");
    let hi: f64 = adm.split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(rows[4][0], hi);
    assert!(field(&o, "forward").starts_with("step-underflow"));

    let s = bicons(&["solve", "sys5", "--samples", "3"]);
    assert_eq!(code(&s), 0);
    let csv = String::from_utf8(s.stdout).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,f,fp,fpp,y,yp");
    assert!(csv
        .lines()
        .nth(2)
        .unwrap()
        .starts_with("0.0000000000000000e0,1.0000000000000000e0"));
}

#[test]
fn outputs_are_bit_identical_across_runs_and_thread_counts() {
    let args = ["verify", "thm5", "--grid", "7"];
    let a = bicons(&args);
    let b = bicons(&args);
    let c = bicons(&[&args[..], &["--threads", "1"]].concat());
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let s1 = bicons(&["solve", "sys5", "--samples", "11"]);
    let s2 = bicons(&["solve", "sys5", "--samples", "11", "--threads", "3"]);
    assert_eq!(s1.stdout, s2.stdout);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[grid]\nsize = 9\n").unwrap();
    let o = bicons(&["--config", cfg.to_str().unwrap(), "scan", "h4"]);
    assert_eq!(code(&o), 2);
    assert_eq!(field(&o, "kind"), "usage");
    assert!(stderr(&o).contains("size"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "[scan]\ntheta = [1.0, 1.0, 1]\ntau = [2.0, 2.0, 1]\n[surface]\nb2 = 0.4\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = bicons(&["--config", c, "scan", "h4"]);
    assert_eq!(field(&from_file, "nodes"), "1");
    let flagged = bicons(&["--config", c, "scan", "h4", "--tau", "0,1,3"]);
    assert_eq!(field(&flagged, "nodes"), "3");
    // The file's broken b2 is replaced by the flag value.
    let broken = bicons(&["--config", c, "verify", "product", "--grid", "5"]);
    assert_eq!(code(&broken), 2);
    let fixed = bicons(&[
        "--config",
        c,
        "verify",
        "product",
        "--grid",
        "5",
        "--b2",
        "0.28867513459481287",
    ]);
    assert_eq!(code(&fixed), 0, "{}", stderr(&fixed));
}

#[test]
fn user_map_warp_comes_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    // Tilted plane t = u/2 in the unit-warp ambient: totally geodesic.
    std::fs::write(
        &cfg,
        "[surface]\ncomponents = [\"0.5*u\", \"u\", \"v\"]\nwarp = { kind = \"constant\", value = 1.0 }\n",
    )
    .unwrap();
    let o = bicons(&[
        "--config",
        cfg.to_str().unwrap(),
        "verify",
        "user-map",
        "--grid",
        "5",
    ]);
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["surface"], "user-map");
    // H = 0: no e4 direction, so the report is degenerate rather than failing.
    assert_ne!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn report_pretty_prints_saved_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let v = bicons(&[
        "verify",
        "product",
        "--grid",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&v), 0);
    let o = bicons(&["report", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("product-e11-s4"));
    assert!(text.contains("PASS  pmcv"));
    assert!(text.contains("PASS  reduced-criterion"));
    assert!(text.ends_with("verdict   pass: 21 entries\n"));

    std::fs::write(&out, "{}").unwrap();
    assert_eq!(code(&bicons(&["report", out.to_str().unwrap()])), 2);
}

#[test]
fn malformed_flags_exit_2() {
    assert_eq!(code(&bicons(&["verify", "thm9"])), 2);
    assert_eq!(code(&bicons(&["scan", "h4", "--theta", "1,2"])), 2);
    assert_eq!(code(&bicons(&["verify", "product", "--u-range", "1"])), 2);
    assert_eq!(code(&bicons(&["scan", "h4", "--threads", "0"])), 2);
}
