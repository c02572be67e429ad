use std::path::PathBuf;
use std::process::Command;

use idepsd::cli::{run, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_PARTIAL};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = vec![];
    let mut err = vec![];
    let mut full = vec!["idepsd"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn scratch_dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("idepsd-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn single_node_sits_at_minus_half() {
    let (code, out, _) = call(&["nodes", "--family", "zeros", "--n", "1", "--rho1", "1"]);
    assert_eq!(code, EXIT_OK);
    let lines = data_lines(&out);
    assert_eq!(lines[0], "index,t,weight,theta,mapped_weight");
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells[3], "-0.5");
    assert!(out.starts_with("# {\"command\":\"nodes\""));
}

#[test]
fn extrema_nodes_include_the_origin() {
    let (code, out, _) = call(&["nodes", "--family", "extrema", "--n", "3", "--rho1", "2"]);
    assert_eq!(code, EXIT_OK);
    let lines = data_lines(&out);
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0,0.0,"));
}

#[test]
fn converge_header_and_columns() {
    let (code, out, _) = call(&["converge", "--case", "a1", "--family", "zeros", "--rho1", "1", "--n", "1,5,10"]);
    assert_eq!(code, EXIT_OK);
    let lines = data_lines(&out);
    assert!(lines[0].starts_with("case,family,rho1,rho,quad_mode,N,abs_error,eigfun_error,matched_lambda_re,matched_lambda_im"));
    assert_eq!(lines.len(), 4);
    for l in &lines[1..] {
        let err: f64 = l.split(',').nth(6).unwrap().parse().unwrap();
        assert!(err < 1e-12);
    }
    assert!(out.lines().next().unwrap().contains("\"rho\":1.0"));
}

#[test]
fn configuration_errors_exit_with_two() {
    assert_eq!(call(&["converge", "--case", "zz", "--family", "zeros", "--n", "1"]).0, EXIT_CONFIG);
    assert_eq!(call(&["converge", "--case", "a1", "--family", "zeros", "--n", "5,3"]).0, EXIT_CONFIG);
    assert_eq!(call(&["nodes", "--family", "zeros", "--n", "0", "--rho1", "1"]).0, EXIT_CONFIG);
    assert_eq!(call(&["bifurcate", "--model", "blowflies", "--tau", "2"]).0, EXIT_CONFIG);
    assert_eq!(call(&["nodes", "--family", "hermite", "--n", "1", "--rho1", "1"]).0, EXIT_CONFIG);
    assert_eq!(call(&[]).0, EXIT_CONFIG);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let d = scratch_dir("unknown");
    let p = d.join("run.json");
    std::fs::write(&p, r#"{"command":"nodes","family":"zeros","N":[2],"rho1":1.0,"colour":"red"}"#).unwrap();
    let (code, _, err) = call(&["--config", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("colour"));
}

#[test]
fn config_file_matches_flags() {
    let d = scratch_dir("same");
    let p = d.join("run.json");
    std::fs::write(&p, r#"{"command":"converge","case":"b","family":"extrema","rho1":1.0,"N":[4,8]}"#).unwrap();
    let from_file = call(&["--config", p.to_str().unwrap()]);
    let from_flags = call(&["converge", "--case", "b", "--family", "extrema", "--rho1", "1", "--n", "4,8"]);
    assert_eq!(from_file.0, EXIT_OK);
    assert_eq!(from_file.1, from_flags.1);
}

#[test]
fn resolved_header_reruns_identically() {
    let (_, out, _) = call(&["oracle", "--suite", "bounds", "--mu", "-0.5", "--mu-im", "0.5", "--n", "3,6"]);
    let header = out.lines().next().unwrap().trim_start_matches("# ");
    let d = scratch_dir("rerun");
    let p = d.join("run.json");
    std::fs::write(&p, header).unwrap();
    let (code, again, _) = call(&["--config", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(again, out);
}

#[test]
fn json_output_parses() {
    let (code, out, _) = call(&["--format", "json", "oracle", "--suite", "reduced-spectrum", "--family", "extrema", "--n", "2,3"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["config"]["suite"], "reduced-spectrum");
    assert!(v["rows"][1]["set_distance"].as_f64().unwrap() < 1e-10);
}

#[test]
fn bifurcate_writes_branch_and_points() {
    let d = scratch_dir("bif");
    let prefix = d.join("bf");
    let (code, _, _) = call(&["bifurcate", "--model", "blowflies", "--mu", "2", "--n", "5", "--range", "8:30", "--steps", "20", "-o", prefix.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let points = std::fs::read_to_string(d.join("bf.points.csv")).unwrap();
    let bp = data_lines(&points).iter().find(|l| l.starts_with("BP,")).map(|l| l.to_string()).unwrap();
    let beta: f64 = bp.split(',').nth(1).unwrap().parse().unwrap();
    assert!((beta - 2.0 * 2f64.exp()).abs() < 1e-6);
    let branch = std::fs::read_to_string(d.join("bf.branch.csv")).unwrap();
    assert_eq!(data_lines(&branch)[0], "param,state_head,rightmost_re,rightmost_im,stability");
}

#[test]
fn missing_hopf_in_curve_is_partial() {
    let (code, out, _) = call(&["bifurcate", "--model", "beretta-breda", "--n", "8", "--steps", "20", "--curve", "1,7"]);
    assert_eq!(code, EXIT_PARTIAL);
    let lines = data_lines(&out);
    assert_eq!(lines[1], "1.0,,,no Hopf point found for m = 1");
    assert!(lines[2].starts_with("7.0,0,1.5"));
    assert!(lines[3].starts_with("7.0,1,3."));
}

#[test]
fn leaving_the_equilibrium_domain_is_numerical() {
    // the positive equilibrium ceases to exist near tau = 10.85
    let (code, _, err) = call(&["bifurcate", "--model", "beretta-breda", "--n", "6", "--range", "2:14", "--steps", "10"]);
    assert_eq!(code, EXIT_NUMERICAL, "{err}");
}

#[test]
fn worker_count_does_not_change_output() {
    let exe = env!("CARGO_BIN_EXE_idepsd");
    let args = ["converge", "--case", "d", "--family", "zeros", "--n", "4,8,12,16"];
    let one = Command::new(exe).args(args).env("IDEPSD_WORKERS", "1").output().unwrap();
    let four = Command::new(exe).args(args).env("IDEPSD_WORKERS", "4").output().unwrap();
    assert_eq!(one.status.code(), Some(EXIT_OK));
    assert_eq!(one.stdout, four.stdout);
    let bad = Command::new(exe).args(args).env("IDEPSD_WORKERS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_CONFIG));
}
