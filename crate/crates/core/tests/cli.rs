use std::fs;
use std::path::Path;
use std::process::Command;

use l2boost::app::{sha256_file, RunManifest};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_l2boost"))
}

fn write_noiseless_csv(path: &Path) {
    let mut rng = l2boost::RngStream::new(17, 0).rng();
    let mut csv = String::from("a,b,c,d,e,f,target\n");
    for _ in 0..80 {
        let x = rng.normals(6);
        let y = 1.5 + 2.0 * x[0] - 1.0 * x[3] + 0.5 * x[5];
        let cells: Vec<String> = x.iter().map(|v| format!("{v:.12}")).collect();
        csv.push_str(&format!("{},{y:.12}\n", cells.join(",")));
    }
    fs::write(path, csv).unwrap();
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn missing_response_column_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("d.csv");
    write_noiseless_csv(&input);
    let out = bin()
        .args(["fit", input.to_str().unwrap(), "--response", "nope", "--out"])
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing column `nope`"));
}

#[test]
fn noiseless_oba_fit_predicts_holdout_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("d.csv");
    write_noiseless_csv(&input);
    let out_dir = dir.path().join("o");
    let out = bin()
        .args(["fit", input.to_str().unwrap(), "--response", "target", "--method", "oba"])
        .args(["--test-frac", "0.25", "--seed", "3", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let mse: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("test mse "))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(mse < 1e-6, "holdout mse {mse}");
    let coefs = read(&out_dir.join("coefficients.csv"));
    assert!(coefs.starts_with("name,coefficient\nintercept,1.4999"), "{coefs}");
}

#[test]
fn cv_lasso_fit_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("d.csv");
    write_noiseless_csv(&input);
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = bin()
            .args(["fit", input.to_str().unwrap(), "--response", "target"])
            .args(["--method", "lasso", "--penalty", "cv", "--folds", "5", "--seed", "9", "--out"])
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(out.status.success());
        let stdout = String::from_utf8(out.stdout).unwrap();
        let summary: Vec<String> = stdout.lines().filter(|l| !l.starts_with("wrote")).map(String::from).collect();
        (summary, read(&out_dir.join("coefficients.csv")), read(&out_dir.join("predictions.csv")))
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn manifest_digests_match_emitted_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("d.csv");
    write_noiseless_csv(&input);
    let out_dir = dir.path().join("o");
    let status = bin()
        .args(["fit", input.to_str().unwrap(), "--response", "target", "--method", "post-ba", "--out"])
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = RunManifest::read(&out_dir.join("manifest.json")).unwrap();
    assert_eq!(manifest.subcommand, "fit");
    assert_eq!(manifest.inputs.len(), 1);
    assert_eq!(manifest.inputs[0].sha256, sha256_file(&input).unwrap());
    let names: Vec<&str> = manifest.outputs.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(names, ["coefficients.csv", "predictions.csv", "path.csv"]);
    for f in &manifest.outputs {
        assert_eq!(f.sha256, sha256_file(&out_dir.join(&f.path)).unwrap());
    }
    assert!(manifest.verify(&out_dir).unwrap());
}

#[test]
fn simulate_preset_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out_dir = dir.path().join(name);
        let out = bin()
            .args(["simulate", "--preset", "table3", "--reps", "3", "--seed", "5", "--workers", workers, "--out"])
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        read(&out_dir.join("table_wide.csv"))
    };
    let wide = run("a", "1");
    let lines: Vec<&str> = wide.lines().collect();
    assert_eq!(lines.len(), 7, "{wide}");
    assert_eq!(lines[0].split(',').filter(|h| h.ends_with("-oracle")).count(), 3);
    for line in &lines[1..] {
        for cell in line.split(',') {
            let v: f64 = cell.parse().unwrap();
            assert!(v.is_finite());
        }
    }
    assert_eq!(wide, run("b", "2"));
}

#[test]
fn simulate_reads_toml_and_reports_bad_json_position() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = dir.path().join("exp.toml");
    fs::write(
        &toml_path,
        r#"
repetitions = 2
master_seed = 1

[[dgps]]
n = 40
p = 20
s = 3
beta_design = "sparse"
x_design = "iid"
noise_sd = 1.0
holdout = 20

[[methods]]
estimator = "ba"
stop = { kind = "ks", k = 2, s = 3 }

[[methods]]
estimator = "lasso"
penalty = "plug_in"
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("o");
    let out = bin().arg("simulate").arg(&toml_path).arg("--out").arg(&out_dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = read(&out_dir.join("table.csv"));
    assert_eq!(table.lines().count(), 3);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"repetitions\": 2,\n  \"methods\": oops\n}").unwrap();
    let out = bin().arg("simulate").arg(&bad).arg("--out").arg(dir.path().join("x")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn theory_default_grid_first_row() {
    let out = bin().arg("theory").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], 0.0);
    assert!((row[3] - 1.19).abs() < 0.01, "zeta* {}", row[3]);
    assert_eq!(text.lines().count(), 16);
}

#[test]
fn theory_rejects_c_outside_unit_interval() {
    let out = bin().args(["theory", "--grid", "1.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eigen_on_orthonormal_design_has_zero_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["eigen", "--orthonormal", "16,6", "--s-max", "3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = read(&dir.path().join("eigen.csv"));
    for line in csv.lines().skip(1) {
        let c: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(c.abs() < 1e-12, "{line}");
    }
}

#[test]
fn pga_on_orthonormal_design_labels_every_step_r() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["pga-analyze", "--orthonormal", "16,8", "--beta", "3,-2,1,0.5", "--s-max", "8", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = read(&dir.path().join("path.csv"));
    let labels: Vec<&str> = path.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(labels, ["R"; 4]);
    assert!(read(&dir.path().join("bounds.csv")).lines().count() > 1);
}

#[test]
fn curve_is_seed_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = bin()
            .args(["curve", "--n", "20", "--reps", "5", "--max-steps", "20", "--seed", "2", "--out"])
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        read(&out_dir.join("curve.csv"))
    };
    let a = run("a");
    assert_eq!(a.lines().count(), 22);
    assert_eq!(a, run("b"));
}
