use serde_json::Value;
use std::process::{Command, Output};

fn zeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeta"))
        .args(args)
        .output()
        .expect("the zeta binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn theta222() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/data/theta222.json").to_string()
}

#[test]
fn ihara_theta_graph_at_one_half() {
    let v = stdout_json(&zeta(&["ihara", "--graph", &theta222(), "--s", "0.5"]));
    let x = (-2.0f64).exp();
    let want = (1.0 - x).powi(2) * (1.0 - 4.0 * x);
    let got = v["value"][0].as_f64().unwrap();
    assert!((got - want).abs() <= 1e-14, "{got} vs {want}");
    assert_eq!(v["value"][1].as_f64().unwrap(), 0.0);
}

#[test]
fn dim_reports_main_term() {
    let v = stdout_json(&zeta(&["dim", "--family", "three-funnel", "--ell", "16"]));
    assert_eq!(v["method"], "det");
    let main = v["main_term"].as_f64().unwrap();
    assert!((main - 4f64.ln() / 16.0).abs() < 1e-12);
    let dim = v["dim"].as_f64().unwrap();
    assert!((dim - main).abs() < 1e-4, "dim {dim}");
}

#[test]
fn selberg_csv_has_stable_header() {
    let out = zeta(&[
        "selberg",
        "--family",
        "three-funnel",
        "--ell",
        "8",
        "--s-grid",
        "0.5:1:2,0:1:3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s_re,s_im,value_re,value_im,tail_bound"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    // row-major with the real part outermost
    assert_eq!((rows[0][0], rows[0][1]), (0.5, 0.0));
    assert_eq!((rows[1][0], rows[1][1]), (0.5, 0.5));
    assert_eq!((rows[3][0], rows[3][1]), (1.0, 0.0));
}

#[test]
fn output_is_identical_across_thread_counts() {
    let args = [
        "scan",
        "--zeta",
        "intermediate",
        "--family",
        "torus",
        "--ell",
        "10",
        "--s-grid",
        "-1:1:5,-2:2:5",
    ];
    let one = zeta(&[&["--threads", "1"][..], &args[..]].concat());
    let four = zeta(&[&["--threads", "4"][..], &args[..]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn family_show_roundtrips_through_a_file() {
    let out = zeta(&["family", "show", "--family", "three-funnel"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["g"], 2);
    let path = std::env::temp_dir().join(format!("zeta-family-{}.json", std::process::id()));
    std::fs::write(&path, &out.stdout).unwrap();
    let again = zeta(&["family", "show", "--family", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn family_validate_three_funnel() {
    let v = stdout_json(&zeta(&["family", "validate", "--family", "three-funnel", "--ell", "8"]));
    assert_eq!(v["valid"], true);
    assert_eq!(v["star"]["k_min"], 2);
}

#[test]
fn symbolic_z0_of_the_three_funnel() {
    let out = zeta(&["intermediate", "--family", "three-funnel", "--M", "0", "--symbolic"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Z_0 = 1 - 6*u1^4 + 9*u1^8 - 4*u1^12"), "{text}");
}

#[test]
fn resonances_repeat_with_the_period() {
    let v = stdout_json(&zeta(&[
        "resonances",
        "--zeta",
        "ihara",
        "--graph",
        &theta222(),
        "--strips",
        "2",
        "--re",
        "-2:2",
        "--start",
        "0.3",
    ]));
    let period = v["period"].as_f64().unwrap();
    // gcd of (h_j + h_k)/2 = 2 for the edge pairs
    assert!((period - std::f64::consts::PI).abs() < 1e-12);
    let strips = v["strips"].as_array().unwrap();
    let a = strips[0]["zeros"]["zeros"].as_array().unwrap();
    let b = strips[1]["zeros"]["zeros"].as_array().unwrap();
    assert_eq!(a.len(), b.len());
    for (za, zb) in a.iter().zip(b) {
        let (ra, ia) = (za["location"][0].as_f64().unwrap(), za["location"][1].as_f64().unwrap());
        let (rb, ib) = (zb["location"][0].as_f64().unwrap(), zb["location"][1].as_f64().unwrap());
        assert!((ra - rb).abs() < 1e-9 && (ib - ia - period).abs() < 1e-9);
    }
}

#[test]
fn errors_are_json_with_exit_codes() {
    let out = zeta(&["family", "show", "--family", "no-such-family"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "validation");
    assert_eq!(err["exit_code"], 2);

    let out = zeta(&[
        "zeros",
        "--zeta",
        "ihara",
        "--graph",
        &theta222(),
        "--region",
        "1:0,0:1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_single_criterion() {
    let out = zeta(&["verify", "--only", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("[PASS]  1"), "{text}");
    assert!(text.contains("1/1 criteria passed"));
}
