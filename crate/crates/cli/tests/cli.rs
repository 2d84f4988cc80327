//! End-to-end tests of the command-line interface: exit codes, document
//! shapes, and byte-level determinism.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bloch-holonomy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn phase_of_gamma_a_reports_angle_and_axis() {
    let out = run(&["phase", "--loop", "gamma_a"]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    let angle = doc["angle"].as_f64().unwrap();
    assert!((angle - (2.0 - 3.0f64.sqrt()) * std::f64::consts::PI).abs() < 1e-6);
    let axis: Vec<f64> = doc["axis"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    // the axis is the loop's starting tangent direction, up to overall sign
    let expect = [0.5, 0.0, 3.0f64.sqrt() / 2.0];
    let dot: f64 = axis.iter().zip(&expect).map(|(a, b)| a * b).sum();
    assert!(dot.abs() > 1.0 - 1e-6, "axis = {axis:?}");
    assert_eq!(doc["segment_factors"].as_array().unwrap().len(), 2);
}

#[test]
fn solid_angle_of_gamma_c_is_quarter_turn() {
    let out = run(&["solid-angle", "--loop", "gamma_c"]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    let omega = doc["generalized_solid_angle"].as_f64().unwrap();
    assert!((omega - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
}

#[test]
fn unliftable_loop_exits_with_code_3_and_lists_kinks() {
    let out = run(&["liftable", "--loop", "fig3c"]);
    assert_eq!(out.status.code(), Some(3));
    let doc = stdout_json(&out);
    assert_eq!(doc["liftable"], serde_json::Value::Bool(false));
    let kinks = doc["kinks"].as_array().unwrap();
    assert_eq!(kinks.len(), 1);
    assert!((kinks[0]["t"].as_f64().unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn phase_of_unliftable_loop_exits_with_code_3() {
    let out = run(&["phase", "--loop", "fig3c"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty(), "no data document on failure");
    assert!(!out.stderr.is_empty(), "diagnostic goes to stderr");
}

#[test]
fn unknown_loop_exits_with_code_2_and_lists_catalog() {
    let out = run(&["phase", "--loop", "gamma_z"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gamma_a") && err.contains("circle(rho,h)"), "{err}");
}

#[test]
fn malformed_spec_reports_position() {
    let out = run(&[
        "zeros",
        "--loop",
        r#"{"type":"piecewise","pieces":[{"kind":"line","from":[0,0,0],"to":[0,0,0.5]},{"kind":"arc","center":[0,0,0],"axis":[0,0,0],"start":[0,0,0.5],"angle":1.0}]}"#,
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("piece 1"), "{err}");
}

#[test]
fn open_samples_with_closed_flag_rejected() {
    let out = run(&[
        "zeros",
        "--loop",
        r#"{"type":"samples","closed":true,"samples":[[0.0,0.1,0,0],[0.3,0.2,0,0],[0.6,0.3,0,0],[1.0,0.4,0,0]]}"#,
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("open"), "{err}");
}

#[test]
fn circle_shorthand_and_json_agree() {
    let a = run(&["phase", "--loop", "circle(0.5,0.5)"]);
    let b = run(&[
        "phase",
        "--loop",
        r#"{"spec_version":1,"type":"builtin","name":"circle","rho":0.5,"h":0.5}"#,
    ]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn identical_runs_are_byte_identical() {
    for args in [
        vec!["phase", "--loop", "gamma_c"],
        vec!["tomography", "--loop", "gamma_c", "--shots", "20000", "--seed", "5", "--steps", "2000"],
        vec!["lift", "--loop", "circle(0.4,0.2)", "--steps", "500", "--format", "csv"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success(), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?} not deterministic");
    }
}

#[test]
fn lift_csv_has_the_documented_columns() {
    let out = run(&["lift", "--loop", "gamma_c", "--steps", "200", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,re_m1,im_m1,re_0,im_0,re_p1,im_p1,s_x,s_y,s_z,r,v_x,v_y,v_z,u_x,u_y,u_z"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 17);
    let t: f64 = first[0].parse().unwrap();
    assert_eq!(t, 0.0);
    // the starting sample sits at the center of the ball
    let s: Vec<f64> = first[7..10].iter().map(|v| v.parse().unwrap()).collect();
    assert!(s.iter().all(|x| x.abs() < 1e-9));
}

#[test]
fn lift_accepts_an_explicit_state() {
    // a center state with symmetry axis x̂ is transverse to gamma_c's
    // outgoing direction ẑ
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let state = format!("[{s},0.0,0.0,0.0,{},0.0]", -s);
    let out = run(&["lift", "--loop", "gamma_c", "--steps", "200", "--state", &state]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn out_flag_writes_the_document_to_a_file() {
    let dir = std::env::temp_dir().join("bloch-holonomy-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("zeros.json");
    let out = run(&["zeros", "--loop", "gamma_a", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let interior = doc["interior"].as_array().unwrap();
    assert_eq!(interior.len(), 1);
    assert!((interior[0].as_f64().unwrap() - 0.5).abs() < 1e-9);
    std::fs::remove_file(&path).ok();
}

#[test]
fn rp2_check_agrees_on_gamma_d() {
    let out = run(&["rp2-check", "--loop", "gamma_d", "--steps", "4000"]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    assert!(doc["frobenius_distance"].as_f64().unwrap() < 1e-6);
}

#[test]
fn loop_file_input_works() {
    let dir = std::env::temp_dir().join("bloch-holonomy-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("loop.json");
    std::fs::write(&path, r#"{"spec_version":1,"type":"builtin","name":"gamma_a"}"#).unwrap();
    let out = run(&["zeros", "--loop-file", path.to_str().unwrap()]);
    assert!(out.status.success());
    std::fs::remove_file(&path).ok();
}

#[test]
fn tolerances_are_overridable() {
    // with a huge kink tolerance even fig3c passes the liftability check
    let out = run(&["liftable", "--loop", "fig3c", "--tol-kink", "3.0"]);
    assert_eq!(out.status.code(), Some(0));
}
