use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn data(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel).display().to_string()
}

fn pgl3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgl3")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("error is JSON")
}

#[test]
fn validate_summarizes_the_sister() {
    let o = pgl3(&["validate", &data("sister/triangulation.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!((v["nu"].as_u64(), v["edges"].as_u64(), v["cusps"].as_u64()), (Some(2), Some(2), Some(1)));
    assert!(v["version"].is_string());
}

#[test]
fn input_errors_exit_two_with_json() {
    let o = pgl3(&["analyze", "--point", "missing.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["kind"], "input");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"name\": \"x\", \"tetrahedra\": 1,").unwrap();
    let o = pgl3(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["error"]["message"].as_str().unwrap().contains("line"));

    for args in [
        &["--rank-tol", "-1", "census", "sister"][..],
        &["--frobnicate", "census", "sister"],
        &["census", "whitehead"],
    ] {
        let o = pgl3(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        stderr_json(&o);
    }
}

#[test]
fn non_solution_is_a_computational_failure() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    let x = "{\"1\":[0.3,0.9],\"2\":[0.3,0.9],\"3\":[0.3,0.9],\"4\":[0.3,0.9]}";
    std::fs::write(&p, format!("{{\"reduced\":[{{\"tet\":1,\"x\":{x}}},{{\"tet\":2,\"x\":{x}}}]}}")).unwrap();
    let o = pgl3(&["analyze", "--point", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"]["kind"], "computation");
}

#[test]
fn equations_render_printed_notation() {
    let o = pgl3(&["equations"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["rows"].as_array().unwrap().len(), 32);
    let faces: Vec<&str> = v["text"]["faces"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert_eq!(faces[0], "z21*z31*z41*w12*w32*w42 = 1");
}

#[test]
fn lattice_report_passes() {
    let o = pgl3(&["lattice-report", "--triangulation", &data("sister/triangulation.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["all_pass"], true);
    assert_eq!(v["dim_im_p_cap_ker_fstar"], 10);
}

#[test]
fn solve_output_round_trips_through_analyze_and_holonomy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sol.json");
    let o = pgl3(&["solve", "--start", "CR+", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let sol: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(sol["convergence"]["residual"].as_f64().unwrap() <= 1e-12);

    let o = pgl3(&["analyze", "--point", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert_eq!(r["dim_unipotent_tangent"], 0);
    assert_eq!(r["transversal"], true);

    let o = pgl3(&["holonomy", "--point", out.to_str().unwrap()]);
    let h = stdout_json(&o);
    assert_eq!(h["cusps"][0]["words"]["A"], "z12*z41*w21^-1*w32^-1");
    assert!(h["cusps"][0]["unipotent_defect"].as_f64().unwrap() < 1e-9);
}

#[test]
fn solve_hits_a_target_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("target.json");
    std::fs::write(&target, r#"{"cusps":[{"A":[1.01,0.005],"Astar":[0.995,-0.01]}]}"#).unwrap();
    let o = pgl3(&["solve", "--start", "geometric", "--target-file", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    let a = &v["holonomy"][0]["A"];
    assert!((a[0].as_f64().unwrap() - 1.01).abs() < 1e-10 && (a[1].as_f64().unwrap() - 0.005).abs() < 1e-10);
    assert_eq!(v["positive"], true);
}

#[test]
fn multi_start_is_deterministic() {
    let args = ["solve", "--starts", "20", "--seed", "9"];
    let (a, b) = (pgl3(&args), pgl3(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(!stdout_json(&a)["solutions"].as_array().unwrap().is_empty());
}

#[test]
fn pinned_solve_recovers_a_degree_eight_point() {
    let o = pgl3(&["solve", "--start", "P-root-2", "--pin", "1:4"]);
    assert_eq!(o.status.code(), Some(0));
    let o = pgl3(&["solve", "--pin", "1:4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn census_verify_all_pass() {
    let o = pgl3(&["census", "sister", "--verify", "--jobs", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["all_pass"], true);
    assert_eq!(v["entries"].as_array().unwrap().len(), 26);
    assert!(v["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn loose_rank_tolerance_warns() {
    let o = pgl3(&["--rank-tol", "1e-2", "census", "sister", "--verify"]);
    let v = stdout_json(&o);
    assert!(!v["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn census_listing_and_pretty_text() {
    let o = pgl3(&["census", "sister"]);
    let v = stdout_json(&o);
    let ids: Vec<&str> = v["entries"].as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"geometric") && ids.contains(&"S2-") && ids.contains(&"Q-root-8"));
    let o = pgl3(&["lattice-report", "--pretty"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("rank_f: 8"));
}
