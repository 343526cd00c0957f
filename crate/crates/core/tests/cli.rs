use std::f64::consts::PI;

use ghz_lhv::cli::{run, run_with_model, EXIT_FAILURE, EXIT_OK, EXIT_USAGE, VERSION};
use ghz_lhv::lhv::{transform_l, LhvError};
use ghz_lhv::stations::{audit_traffic, load_dump};
use ghz_lhv::{Angle, Model, RelativeSetting};
use serde_json::Value;

fn lab(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ghz-lab").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json_lines(text: &str) -> (Vec<Value>, Value) {
    let mut rows: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let footer = rows.pop().unwrap();
    (rows, footer["footer"].clone())
}

fn keys(v: &Value) -> Vec<String> {
    // serde_json sorts object keys, so compare as sets via sorted vectors
    let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
    k.sort();
    k
}

fn sorted(xs: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = xs.iter().map(|s| s.to_string()).collect();
    v.sort();
    v
}

#[test]
fn csv_headers_are_frozen() {
    let cases: [(&[&str], &str); 6] = [
        (&["sweep", "--delta-grid", "2", "--trials", "10"], "delta,mc,quad,oracle,stderr,n"),
        (&["paradox", "--trials", "10"], "label,alpha,beta,gamma,delta_eff,product_mean,stderr,constant_product,oracle,n"),
        (&["compare", "--grid", "1", "--trials", "10"], "alpha,beta,gamma,delta_eff,model,oracle,discrepancy"),
        (&["sample", "--trials", "2"], "index,omega,eta,alpha,beta,gamma,phi,delta_eff,s_a,s_b,s_c,region"),
        (&["verify", "--delta", "0", "--trials", "10"], "name,passed,value,threshold,detail"),
        (
            &["stations", "--trials", "10", "--composition-samples", "10"],
            "transport,n,delta_a,delta_b,delta_c,single_a,single_b,single_c,pair_ab,pair_bc,pair_ca,\
             triple,triple_stderr,matches_reference,audit_passed,audit_frames,composition_delta1,\
             composition_delta2,composition_agreement,composition_max_gap,composition_triple,\
             composition_reference,composition_gap",
        ),
    ];
    for (args, header) in cases {
        let (code, out, err) = lab(args);
        assert_eq!(code, EXIT_OK, "{args:?}: {err}");
        assert_eq!(out.lines().next().unwrap(), header, "{args:?}");
        assert!(!out.contains('\r'), "CSV must use LF line endings");
        assert!(out.contains(&format!("# ghz-lab {VERSION}\n")));
    }
}

#[test]
fn sweep_json_keys_are_frozen() {
    let (code, out, _) = lab(&["sweep", "--delta-grid", "3", "--trials", "100", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let (rows, footer) = json_lines(&out);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(keys(r), sorted(&["delta", "mc", "quad", "oracle", "stderr", "n"]));
    }
    assert_eq!(footer["version"], VERSION);
    assert_eq!(footer["tool"], "ghz-lab");
}

#[test]
fn footer_echoes_defaults() {
    let (_, out, _) = lab(&["sweep", "--delta-grid", "1", "--method", "quadrature", "--format", "json"]);
    let (_, footer) = json_lines(&out);
    let cfg = &footer["config"];
    assert_eq!(cfg["trials"], 1_000_000);
    assert_eq!(cfg["seed"], 0);
    assert_eq!(cfg["phi"], 0.0);
    assert_eq!(cfg["method"], "quadrature");
    assert_eq!(cfg["command"]["name"], "sweep");
}

#[test]
fn sweep_law_and_pi_row() {
    let (_, out, _) = lab(&["sweep", "--method", "quadrature", "--format", "json"]);
    let (rows, footer) = json_lines(&out);
    assert_eq!(rows.len(), 128);
    assert!(footer["summary"]["max_abs_quad_minus_cos"].as_f64().unwrap() < 1e-9);

    let (_, out, _) = lab(&["sweep", "--delta-grid", "0:180:3", "--degrees", "--trials", "5000", "--format", "json"]);
    let (rows, _) = json_lines(&out);
    let last = &rows[2];
    assert!((last["delta"].as_f64().unwrap() - PI).abs() < 1e-15);
    assert_eq!(last["mc"].as_f64().unwrap(), -1.0);
    assert!((last["quad"].as_f64().unwrap() + 1.0).abs() < 1e-9);
    assert!((last["oracle"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert!((rows[1]["delta"].as_f64().unwrap() - PI / 2.0).abs() < 1e-15);
}

#[test]
fn paradox_rows_and_mermin() {
    let (code, out, _) = lab(&["paradox", "--trials", "1000", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let (rows, footer) = json_lines(&out);
    let products: Vec<i64> = rows.iter().map(|r| r["constant_product"].as_i64().unwrap()).collect();
    assert_eq!(products, [1, -1, -1, -1]);
    assert!(rows.iter().all(|r| r["n"] == 1000));
    assert_eq!(footer["summary"]["mermin_model"], 4.0);
    assert!(footer["summary"]["narrative"].as_str().unwrap().contains("contradict"));

    let (_, out, _) = lab(&["paradox", "--trials", "20000", "--phi", "90", "--degrees", "--format", "json"]);
    let (rows, _) = json_lines(&out);
    assert!(rows[0]["constant_product"].is_null());
    let m = rows[0]["product_mean"].as_f64().unwrap();
    assert!(m.abs() < 5.0 * rows[0]["stderr"].as_f64().unwrap());
}

#[test]
fn compare_reports_max_discrepancy() {
    let (code, out, _) = lab(&["compare", "--trials", "2000"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 1 + 125);
    let line = out.lines().find(|l| l.starts_with("# max_discrepancy ")).unwrap();
    let v: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(v < 1e-9);
}

#[test]
fn stations_at_zero_delta() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("frames.bin");
    let (code, out, err) = lab(&[
        "stations",
        "--trials",
        "10000",
        "--transport",
        "sockets",
        "--format",
        "json",
        "--composition-samples",
        "1000",
        "--traffic-dump",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let (rows, footer) = json_lines(&out);
    assert_eq!(rows[0]["triple"], 1.0);
    assert_eq!(rows[0]["audit_passed"], true);
    assert_eq!(rows[0]["matches_reference"], true);
    assert_eq!(footer["summary"]["audit_violations"].as_array().unwrap().len(), 0);

    let entries = load_dump(&dump).unwrap();
    assert_eq!(entries.len(), 3 + 3 * 10_001 + 3 * 10_001);
    assert!(audit_traffic(&entries, [Angle::ZERO; 3]).passed);
}

#[test]
fn sample_is_reproducible() {
    let args = ["sample", "--trials", "10", "--seed", "42", "--format", "json"];
    let (_, a, _) = lab(&args);
    let (_, b, _) = lab(&args);
    assert_eq!(a, b);
    let (rows, _) = json_lines(&a);
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[9]["index"], 9);
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let args = ["sweep", "--delta-grid", "4", "--trials", "500"];
    let (_, stdout, _) = lab(&args);
    let mut with_out = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    let (code, printed, _) = lab(&with_out);
    assert_eq!(code, EXIT_OK);
    assert!(printed.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    // The echoed config differs only in the out path.
    let strip = |s: &str| s.lines().filter(|l| !l.starts_with("# config")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&written), strip(&stdout));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["frobnicate"][..],
        &["sweep", "--delta-grid", "1:2"],
        &["sweep", "--delta-grid", "0"],
        &["sample", "--trials", "0"],
        &["sweep", "--method", "guess"],
        &["sweep", "--phi", "nan"],
        &["sweep", "--delta-grid", "2", "--out", "/nonexistent-dir/x.csv"],
    ] {
        let (code, _, err) = lab(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(!err.is_empty());
    }
    let (code, out, _) = lab(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("sweep"));
}

#[test]
fn verify_spot_check_at_zero() {
    let (code, out, _) = lab(&["verify", "--delta", "0", "--trials", "100000", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let (rows, _) = json_lines(&out);
    assert_eq!(rows[0]["name"], "spot_check");
    assert_eq!(rows[0]["passed"], true);
    assert!(rows[0]["detail"].as_str().unwrap().starts_with("triple 1 "));
}

// The branch for ω above Δ loses its sign: L still maps the circle onto
// itself piecewise, but no longer carries |sin ω| dω onto itself.
fn corrupted_branch(omega: Angle, delta: RelativeSetting) -> Result<Angle, LhvError> {
    let l = transform_l(omega, delta)?;
    Ok(if delta.value() > 0.0 && omega.value() > delta.value() { -l } else { l })
}

#[test]
fn verify_passes_and_catches_a_corrupted_branch() {
    let (code, out, err) = lab(&["verify", "--trials", "200000"]);
    assert_eq!(code, EXIT_OK, "{out}\n{err}");
    assert!(out.contains("# failed []"));

    let model = Model::with_transform("corrupted-branch", corrupted_branch);
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_with_model(&model, ["ghz-lab", "verify", "--trials", "200000"], &mut out, &mut err);
    let out = String::from_utf8(out).unwrap();
    assert_eq!(code, EXIT_FAILURE);
    assert!(out.contains("correlation_law,false"), "{out}");
    let failed = out.lines().find(|l| l.starts_with("# failed ")).unwrap();
    assert!(failed.contains("\"correlation_law\""));
}
