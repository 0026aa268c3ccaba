use std::f64::consts::PI;
use std::fs;
use std::process::{Command, Output};

fn pbphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbphase"))
        .args(args)
        .env_remove("PBPHASE_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Value of `key` in a `quantity,value` report.
fn report_value(out: &Output, key: &str) -> f64 {
    stdout(out)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .unwrap_or_else(|| panic!("no {key} in {}", stdout(out)))
        .parse()
        .unwrap()
}

#[test]
fn vacuum_variance_is_pi_squared_over_three() {
    let out = pbphase(&["variance", "--nbar", "0", "--delta-xi", "1.0"]);
    assert!(out.status.success());
    assert!((report_value(&out, "variance") - PI * PI / 3.0).abs() < 1e-12);
}

#[test]
fn nfm_norm_matches_bessel_form() {
    let out = pbphase(&["nfm-norm", "--a1", "0", "--a2-sq", "4"]);
    assert!(out.status.success());
    let i0_2 = 2.279_585_302_336_067_3;
    let expected = 1.0 - (-4.0f64).exp() * i0_2 * i0_2;
    assert!((report_value(&out, "normalization") - expected).abs() < 1e-14);
}

#[test]
fn fig7_cos2_column_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig7.csv");
    let out = pbphase(&[
        "figure",
        "fig7",
        "--grid",
        "21",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());

    let text = fs::read_to_string(&path).unwrap();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let col = reader
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == "cos2")
        .unwrap();
    let rows: Vec<_> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 21);
    for r in rows {
        assert_eq!(r[col].parse::<f64>().unwrap(), 0.5);
    }
}

#[test]
fn identical_arguments_give_identical_bytes() {
    for args in [
        &["figure", "fig2", "--grid", "11"][..],
        &["figure", "fig8", "--grid", "7", "--format", "json"],
        &["dist", "--nbar", "3", "--delta-xi", "0.5", "--grid", "16"],
        &["check"],
    ] {
        let a = pbphase(args);
        let b = pbphase(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn json_output_parses() {
    let out = pbphase(&["fluct-pb", "--nbar", "2", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let f = v["trig_fluct_pb"].as_f64().unwrap();
    let psi = v["psi_pb"].as_f64().unwrap();
    assert!((f - (1.0 - psi * psi)).abs() < 1e-15);

    let out = pbphase(&["figure", "fig5", "--grid", "5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["figure_id"], "fig5");
    assert_eq!(v["columns"]["psi_pb"].as_array().unwrap().len(), 5);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["variance", "--nbar", "-1", "--delta-xi", "0"][..],
        &["variance", "--nbar", "1"],
        &["figure", "fig4"],
        &["frobnicate"],
        &["fluct-sg", "--nbar", "1", "--p0", "0.5"],
        &["sgpd", "--nbar", "1", "--tol", "2"],
    ] {
        let out = pbphase(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn computation_errors_exit_one() {
    let out = pbphase(&["fluct-pb", "--nbar", "1e6"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("truncation failure"), "{err}");
}

#[test]
fn overlays_follow_figure_rules() {
    let dir = tempfile::tempdir().unwrap();
    let gbl = dir.path().join("gbl.csv");
    fs::write(&gbl, "n_bar,value,value_err\n1.0,0.8,0.04\n4.0,0.3,0.02\n").unwrap();
    let gbl = gbl.to_str().unwrap();

    let raw = pbphase(&["figure", "fig6", "--grid", "3", "--overlay", gbl]);
    assert_eq!(raw.status.code(), Some(1));

    let adjusted = pbphase(&[
        "figure",
        "fig6",
        "--grid",
        "3",
        "--overlay",
        gbl,
        "--gbl-adjust",
        "--format",
        "json",
    ]);
    assert!(
        adjusted.status.success(),
        "{}",
        String::from_utf8_lossy(&adjusted.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&adjusted.stdout).unwrap();
    let point = &v["overlays"][0]["points"][0];
    assert_eq!(point["value"].as_f64().unwrap(), 0.4);
    assert!((point["value_err"].as_f64().unwrap() - 0.04 / 2f64.sqrt()).abs() < 1e-16);

    let fig3 = pbphase(&["figure", "fig3", "--grid", "3", "--overlay", gbl]);
    assert!(fig3.status.success());
    assert!(stdout(&fig3).lines().any(|l| l.starts_with("# overlay:")));
}

#[test]
fn tolerance_comes_from_environment() {
    let default = pbphase(&["fluct-pb", "--nbar", "30"]);
    let loose = Command::new(env!("CARGO_BIN_EXE_pbphase"))
        .args(["fluct-pb", "--nbar", "30"])
        .env("PBPHASE_TOL", "1e-3")
        .output()
        .unwrap();
    assert!(loose.status.success());
    assert!(report_value(&loose, "terms_used") < report_value(&default, "terms_used"));

    let bad = Command::new(env!("CARGO_BIN_EXE_pbphase"))
        .args(["fluct-pb", "--nbar", "30"])
        .env("PBPHASE_TOL", "-1")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn check_passes() {
    let out = pbphase(&["check"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.starts_with("module,name,status,margin,detail"));
    assert!(!text.contains(",fail,"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("known deviation"));
}
