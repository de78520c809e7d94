use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str], scenario: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tonebound"))
        .args(args)
        .arg(scenario)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_scenario(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scenario.toml");
    fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const PRODUCT: &str = r#"
name = "h2xr"

[base]
model = "hyperbolic"
k = 2

[total]
kind = "warped"
fiber_dim = 1

[sampling]
verify_points = 30
"#;

#[test]
fn product_scenario_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), PRODUCT);
    let o = run(&["verify"], &path, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let hash = hex::encode(Sha256::digest(fs::read(&path).unwrap()));
    for name in ["busemann", "hessian_sandwich", "laplacian_floor", "submersion"] {
        let v = json(&dir.path().join("verify").join(format!("{name}.json")));
        assert_eq!(v["scenario_sha256"], hash);
        assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(v["result"]["passed"], true, "{name}");
    }
}

#[test]
fn warped_scenario_reports_small_submersion_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify"], &scenario("warped_h2xr.toml"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&dir.path().join("verify/submersion.json"));
    let details = v["result"]["details"].as_object().unwrap();
    for (name, value) in details {
        assert!(value.as_f64().unwrap() < 1e-6, "{name} = {value}");
    }
    assert_eq!(json(&dir.path().join("verify/warping_log_gradient.json"))["result"]["passed"], true);
}

#[test]
fn tight_tolerance_override_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), PRODUCT);
    let o = Command::new(env!("CARGO_BIN_EXE_tonebound"))
        .args(["verify", path.to_str().unwrap(), "--tol", "1e-30", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn negative_warp_derivative_is_a_check_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify"], &scenario("negative_warp.toml"), dir.path());
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("not positive at s ="), "{e}");
}

#[test]
fn syntax_error_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "name = \"bad\"\n[base]\nmodel = = 3\n");
    let o = run(&["verify"], &path, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3, column"), "{}", stderr(&o));
}

#[test]
fn expression_error_reports_its_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "name = \"bad\"\n[base]\nmodel = \"warped_line\"\nwarp = \"s + * 2\"\n");
    let o = run(&["verify"], &path, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4, column 13"), "{}", stderr(&o));
}

#[test]
fn missing_sections_are_configuration_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), PRODUCT);
    assert_eq!(run(&["eigen"], &path, dir.path()).status.code(), Some(2));
    assert_eq!(run(&["bound"], &scenario("h2_curve.toml"), dir.path()).status.code(), Some(2));
    assert_eq!(run(&["verify"], &dir.path().join("absent.toml"), dir.path()).status.code(), Some(2));
}

#[test]
fn flat_disk_matches_bessel_and_declines_the_tone() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["eigen"], &scenario("flat_disk.toml"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("eigen.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    let hash = hex::encode(Sha256::digest(fs::read(scenario("flat_disk.toml")).unwrap()));
    assert!(header.starts_with(&format!("# tonebound {}", env!("CARGO_PKG_VERSION"))));
    assert!(header.contains(&hash));
    assert_eq!(lines.next(), Some("r,grid,lambda1,mesh_parameter,error_estimate,extrapolated"));
    for line in lines {
        let lambda: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((lambda / 5.7832 - 1.0).abs() < 0.01, "{lambda}");
    }
    let tone = json(&dir.path().join("tone.json"));
    assert!(tone["result"]["declined"].as_str().unwrap().contains("1 radius"));
}

#[test]
fn hyperbolic_plane_curve_decreases_above_a_quarter() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["eigen"], &scenario("h2_curve.toml"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("eigen.csv")).unwrap();
    let lambdas: Vec<f64> = csv.lines().skip(2).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(lambdas.len(), 4);
    assert!(lambdas.windows(2).all(|w| w[1] < w[0]));
    assert!(lambdas.iter().all(|&l| l >= 0.25));
}

#[test]
fn product_slice_passes_with_bound_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["bound"], &scenario("h4xr_slice.toml"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&dir.path().join("bound.json"));
    assert_eq!(v["result"]["verdict"], "PASS");
    assert!((v["result"]["bound"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn tight_scenario_passes_with_margin_below_five_hundredths_at_radius_ten() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["report"], &scenario("tight_h2_in_h3.toml"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&dir.path().join("bound.json"));
    assert_eq!(v["result"]["verdict"], "PASS");
    assert!((v["result"]["bound"].as_f64().unwrap() - 0.25).abs() < 1e-9);
    let curve = v["result"]["curve"].as_array().unwrap();
    let at_ten = curve.iter().find(|p| p["r"].as_f64() == Some(10.0)).unwrap();
    let margin = at_ten["margin"].as_f64().unwrap();
    assert!(margin < 0.05, "margin at r = 10 is {margin}");
}

#[test]
fn nonpositive_constant_is_not_applicable() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["report"], &scenario("horosphere.toml"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
    let v = json(&dir.path().join("report.json"));
    assert_eq!(v["result"]["verdict"], "NOT_APPLICABLE");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let o = run(&["report", "--seed", "7", "--samples", "50"], &scenario("warped_line.toml"), d.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let files = ["eigen.csv", "tone.json", "bound.json", "report.json", "verify/busemann.json", "verify/gulliver.json"];
    for f in files {
        let a = fs::read(dirs[0].path().join(f)).unwrap();
        let b = fs::read(dirs[1].path().join(f)).unwrap();
        assert!(a == b, "{f} differs");
    }
    let v = json(&dirs[0].path().join("bound.json"));
    assert_eq!(v["seed"], 7);
    assert_eq!(v["result"]["c"]["samples"], 50);
}
