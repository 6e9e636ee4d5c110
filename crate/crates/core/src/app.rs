//! End-to-end workflows behind the command-line tool: fitting a CSV data
//! set, simulations, step curves, theory tables, eigen scans and PGA
//! analyses. Every workflow writes its artifacts plus a `manifest.json`
//! listing the resolved configuration and SHA-256 digests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boost::{post_refit, run, BoostConfig, BoostPath, Variant};
use crate::data::{read_csv, Dataset, RawData};
use crate::error::{Error, Result};
use crate::lasso::{fit_with_penalty, post_lasso, LassoConfig, PenaltyMode};
use crate::linalg::Matrix;
use crate::rng::RngStream;
use crate::sim::curve::{step_curve, CurveSpec, CurveTable};
use crate::sim::experiment::{run_experiment, ExperimentSpec, ResultTable};
use crate::sim::presets::preset;
use crate::stopping::StoppingRule;
use crate::synthetic::{gaussian_dataset, hadamard_design};
use crate::theory::bounds::{check_bounds, reports_to_csv, run_pga, BoundConfig, BoundReport};
use crate::theory::constants::{theory_grid, zeta_star_unsquared, TheoryConstants};
use crate::theory::eigen::{restricted_eigen_scan, EigenReport, EigenScanConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to every run's artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub master_seed: u64,
    pub version: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    fn new(subcommand: &str, config: &impl Serialize, master_seed: u64) -> Result<Self> {
        Ok(Self {
            subcommand: subcommand.into(),
            config: serde_json::to_value(config).map_err(|e| Error::Serialization(e.to_string()))?,
            master_seed,
            version: VERSION.into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    /// Verifies every listed output against its recorded digest.
    pub fn verify(&self, dir: &Path) -> Result<bool> {
        for f in self.outputs.iter().chain(&self.inputs) {
            let path = if Path::new(&f.path).is_absolute() {
                PathBuf::from(&f.path)
            } else {
                dir.join(&f.path)
            };
            if sha256_file(&path)? != f.sha256 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Serialization(e.to_string()))
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Collects artifacts written into one output directory.
struct Outputs {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Outputs {
    fn new(dir: &Path, manifest: RunManifest) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
        })
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        let abs = fs::canonicalize(path).map_err(|e| Error::io(path, e))?;
        self.manifest.inputs.push(FileDigest {
            path: abs.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.manifest.outputs.push(FileDigest {
            path: name.into(),
            sha256: sha256_file(&path)?,
        });
        Ok(())
    }

    fn finish(self) -> Result<RunManifest> {
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self.manifest).map_err(|e| Error::Serialization(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(self.manifest)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    Ba,
    PostBa,
    Oba,
    Lasso,
    PostLasso,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub input: PathBuf,
    pub response: String,
    pub method: FitMethod,
    pub stop: StoppingRule,
    pub shrinkage: f64,
    pub max_steps: usize,
    pub lasso: LassoConfig,
    /// Share of rows held out for testing (0 = no split).
    pub test_frac: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub n_train: usize,
    pub n_test: usize,
    pub intercept: f64,
    pub coefficients: Vec<(String, f64)>,
    pub stop_step: Option<usize>,
    pub train_mse: f64,
    pub test_mse: Option<f64>,
    pub manifest: RunManifest,
}

fn split_rows(raw: &RawData, test_frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = raw.response.len();
    if !(0.0..1.0).contains(&test_frac) {
        return Err(Error::InvalidConfig(format!("test fraction must lie in [0, 1), got {test_frac}")));
    }
    let n_test = (test_frac * n as f64).round() as usize;
    if n - n_test < 2 {
        return Err(Error::InvalidConfig("fewer than two training rows remain after the split".into()));
    }
    let test = RngStream::new(seed, 0x7370_6c69).rng().subset(n, n_test);
    let train = (0..n).filter(|i| test.binary_search(i).is_err()).collect();
    Ok((train, test))
}

/// Fits one estimator to a CSV data set and writes `coefficients.csv`,
/// `predictions.csv`, `path.csv` (boosting only) and `manifest.json`.
pub fn fit(opts: &FitOptions) -> Result<FitReport> {
    let raw = read_csv(&opts.input, &opts.response)?;
    let (train_idx, test_idx) = split_rows(&raw, opts.test_frac, opts.seed)?;
    let pick = |idx: &[usize]| -> (Matrix, Vec<f64>) {
        (raw.predictors.select_rows(idx), idx.iter().map(|&i| raw.response[i]).collect())
    };
    let (xt, yt) = pick(&train_idx);
    let train = Dataset::standardize(&xt, &yt, true)?;

    let mut out = Outputs::new(&opts.out_dir, RunManifest::new("fit", opts, opts.seed)?)?;
    out.input(&opts.input)?;

    let mut path: Option<BoostPath> = None;
    let beta = match opts.method {
        FitMethod::Ba | FitMethod::PostBa | FitMethod::Oba => {
            let variant = if opts.method == FitMethod::Oba { Variant::Oba } else { Variant::Ba };
            let cfg = BoostConfig {
                shrinkage: opts.shrinkage,
                max_steps: opts.max_steps,
                variant,
            };
            let p = run(&train, &cfg, &opts.stop)?;
            let beta = if opts.method == FitMethod::PostBa {
                post_refit(&train, &p)?
            } else {
                p.stopped_beta.clone()
            };
            path = Some(p);
            beta
        }
        FitMethod::Lasso | FitMethod::PostLasso => {
            let lfit = fit_with_penalty(&train, &opts.lasso, RngStream::new(opts.seed, 0x6c61_7373))?;
            if opts.method == FitMethod::PostLasso {
                post_lasso(&train, &lfit.beta)?
            } else {
                lfit.beta
            }
        }
    };
    let (intercept, slopes) = train.beta_to_raw(&beta);
    let predict = |x: &Matrix| -> Vec<f64> { x.mul_vec(&slopes).into_iter().map(|v| v + intercept).collect() };
    let mse = |y: &[f64], f: &[f64]| y.iter().zip(f).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64;

    let mut coef_csv = String::from("name,coefficient\nintercept,");
    coef_csv.push_str(&format!("{intercept}\n"));
    for (name, b) in raw.predictor_names.iter().zip(&slopes) {
        coef_csv.push_str(&format!("{name},{b}\n"));
    }
    out.write("coefficients.csv", &coef_csv)?;

    let train_fit = predict(&xt);
    let train_mse = mse(&yt, &train_fit);
    let mut pred_csv = String::from("set,row,actual,predicted\n");
    for (k, &i) in train_idx.iter().enumerate() {
        pred_csv.push_str(&format!("train,{i},{},{}\n", yt[k], train_fit[k]));
    }
    let test_mse = if test_idx.is_empty() {
        None
    } else {
        let (xs, ys) = pick(&test_idx);
        let f = predict(&xs);
        for (k, &i) in test_idx.iter().enumerate() {
            pred_csv.push_str(&format!("test,{i},{},{}\n", ys[k], f[k]));
        }
        Some(mse(&ys, &f))
    };
    out.write("predictions.csv", &pred_csv)?;
    if let Some(p) = &path {
        let mut buf = Vec::new();
        p.write_csv(&mut buf).map_err(|e| Error::io(opts.out_dir.join("path.csv"), e))?;
        out.write("path.csv", &String::from_utf8(buf).expect("ascii csv"))?;
    }
    Ok(FitReport {
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        intercept,
        coefficients: raw.predictor_names.iter().cloned().zip(slopes).collect(),
        stop_step: path.as_ref().map(|p| p.stop_step),
        train_mse,
        test_mse,
        manifest: out.finish()?,
    })
}

/// Parses an experiment file, JSON or TOML by extension.
pub fn load_experiment(path: &Path) -> Result<ExperimentSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_toml = path.extension().is_some_and(|e| e == "toml");
    let spec: ExperimentSpec = if is_toml {
        toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?
    } else {
        serde_json::from_str(&text).map_err(|e| {
            Error::InvalidConfig(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
        })?
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateOptions {
    pub spec_file: Option<PathBuf>,
    pub preset: Option<String>,
    pub repetitions: Option<usize>,
    pub seed: Option<u64>,
    pub workers: usize,
    pub out_dir: PathBuf,
}

/// Resolves the experiment from a file or preset plus overrides.
pub fn resolve_experiment(opts: &SimulateOptions) -> Result<ExperimentSpec> {
    let mut spec = match (&opts.spec_file, &opts.preset) {
        (Some(f), None) => load_experiment(f)?,
        (None, Some(p)) => preset(p, crate::sim::presets::DEFAULT_REPETITIONS, 0)?,
        _ => return Err(Error::InvalidConfig("give exactly one of a spec file or a preset".into())),
    };
    if let Some(r) = opts.repetitions {
        spec.repetitions = r;
    }
    if let Some(s) = opts.seed {
        spec.master_seed = s;
    }
    spec.validate()?;
    Ok(spec)
}

/// Runs an experiment and writes `table.csv`, `table_wide.csv`,
/// `experiment.json` and `manifest.json`.
pub fn simulate(opts: &SimulateOptions) -> Result<(ResultTable, RunManifest)> {
    let spec = resolve_experiment(opts)?;
    let table = run_experiment(&spec, opts.workers)?;
    let mut out = Outputs::new(&opts.out_dir, RunManifest::new("simulate", &spec, spec.master_seed)?)?;
    if let Some(f) = &opts.spec_file {
        out.input(f)?;
    }
    out.write("table.csv", &table.to_csv())?;
    out.write("table_wide.csv", &table.to_wide_csv())?;
    let json = serde_json::to_string_pretty(&spec).map_err(|e| Error::Serialization(e.to_string()))?;
    out.write("experiment.json", &(json + "\n"))?;
    Ok((table, out.finish()?))
}

/// Step curve with `curve.csv`, a JSON summary and `manifest.json`.
pub fn curve(spec: &CurveSpec, out_dir: &Path) -> Result<(CurveTable, RunManifest)> {
    let table = step_curve(spec)?;
    let mut out = Outputs::new(out_dir, RunManifest::new("curve", spec, spec.master_seed)?)?;
    out.write("curve.csv", &table.to_csv())?;
    let summary = serde_json::json!({
        "argmin": table.argmin(),
        "min_mse_out": table.min_mse_out(),
        "u_shaped": table.is_u_shaped(),
        "ols_ref": table.ols_ref,
        "lasso_ref": table.lasso_ref,
        "lasso_cv_ref": table.lasso_cv_ref,
        "ratio_stop_mean": table.ratio_stop_mean,
        "ratio_stop_mse": table.ratio_stop_mse,
    });
    out.write("curve_summary.json", &(summary.to_string() + "\n"))?;
    Ok((table, out.finish()?))
}

/// `c,mu_a,mu_e,zeta_star,lambda_star,rate` for every `c` in `grid`.
pub fn theory_csv(grid: &[f64]) -> Result<String> {
    let rows = theory_grid(grid)?;
    Ok(format_theory(&rows))
}

fn format_theory(rows: &[TheoryConstants]) -> String {
    let mut s = String::from("c,mu_a,mu_e,zeta_star,lambda_star,rate\n");
    for k in rows {
        s.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            k.c, k.mu_a, k.mu_e, k.zeta_star, k.lambda_star, k.rate
        ));
    }
    s
}

/// Same table computed with the unsquared revisit constant.
pub fn theory_csv_unsquared(grid: &[f64]) -> Result<String> {
    let rows: Vec<TheoryConstants> = grid.iter().map(|&c| zeta_star_unsquared(c)).collect::<Result<_>>()?;
    Ok(format_theory(&rows))
}

/// Design used by the `eigen` and `pga-analyze` workflows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignSource {
    /// Columns of a Sylvester-Hadamard matrix (`n` a power of two, `p < n`).
    Orthonormal { n: usize, p: usize },
    /// Standardized iid Gaussian design.
    Gaussian { n: usize, p: usize, seed: u64 },
    /// Predictors of a CSV file (standardized); the response column is dropped.
    Csv { path: PathBuf, response: String },
}

impl DesignSource {
    pub fn design(&self) -> Result<Matrix> {
        match self {
            DesignSource::Orthonormal { n, p } => {
                if !n.is_power_of_two() || p >= n || *p == 0 {
                    return Err(Error::InvalidConfig(format!(
                        "orthonormal design needs n a power of two and 1 <= p < n (n={n}, p={p})"
                    )));
                }
                Ok(hadamard_design(*n, *p))
            }
            DesignSource::Gaussian { n, p, seed } => {
                Ok(gaussian_dataset(*n, &vec![0.0; *p], 0.0, RngStream::new(*seed, 0))?.x().clone())
            }
            DesignSource::Csv { path, response } => {
                let raw = read_csv(path, response)?;
                Ok(Dataset::standardize(&raw.predictors, &raw.response, true)?.x().clone())
            }
        }
    }
}

/// Restricted eigenvalue scan written as `eigen.csv`.
pub fn eigen(source: &DesignSource, cfg: &EigenScanConfig, out_dir: &Path) -> Result<(EigenReport, RunManifest)> {
    let x = source.design()?;
    let report = restricted_eigen_scan(&x, cfg)?;
    let config = serde_json::json!({ "design": source, "scan": cfg });
    let mut out = Outputs::new(out_dir, RunManifest::new("eigen", &config, cfg.seed)?)?;
    if let DesignSource::Csv { path, .. } = source {
        out.input(path)?;
    }
    out.write("eigen.csv", &report.to_csv())?;
    Ok((report, out.finish()?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgaOptions {
    pub design: DesignSource,
    /// True coefficients; shorter vectors are padded with zeros.
    pub beta: Vec<f64>,
    pub max_steps: usize,
    pub scan: EigenScanConfig,
    pub bounds: BoundConfig,
}

/// Noise-free run plus bound checks: `path.csv`, `bounds.csv`, `eigen.csv`.
pub fn pga_analyze(opts: &PgaOptions, out_dir: &Path) -> Result<(BoostPath, Vec<BoundReport>, RunManifest)> {
    let x = opts.design.design()?;
    if opts.beta.len() > x.cols() {
        return Err(Error::InvalidConfig(format!(
            "{} coefficients for a design with {} columns",
            opts.beta.len(),
            x.cols()
        )));
    }
    let mut beta = opts.beta.clone();
    beta.resize(x.cols(), 0.0);
    let path = run_pga(&beta, &x, opts.max_steps)?;
    let report = restricted_eigen_scan(&x, &opts.scan)?;
    let bounds = check_bounds(&path, &report, &opts.bounds)?;
    let mut out = Outputs::new(out_dir, RunManifest::new("pga-analyze", opts, opts.scan.seed)?)?;
    if let DesignSource::Csv { path, .. } = &opts.design {
        out.input(path)?;
    }
    let mut buf = Vec::new();
    path.write_csv(&mut buf).map_err(|e| Error::io(out_dir.join("path.csv"), e))?;
    out.write("path.csv", &String::from_utf8(buf).expect("ascii csv"))?;
    out.write("bounds.csv", &reports_to_csv(&bounds))?;
    out.write("eigen.csv", &report.to_csv())?;
    Ok((path, bounds, out.finish()?))
}

/// Default LASSO settings for a penalty mode.
pub fn lasso_config(penalty: PenaltyMode, alpha: f64, folds: usize) -> LassoConfig {
    LassoConfig {
        penalty,
        alpha,
        folds,
        ..LassoConfig::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theory_table_has_header_and_rows() {
        let csv = theory_csv(&[0.0, 0.1]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "c,mu_a,mu_e,zeta_star,lambda_star,rate");
        assert!(lines[1].starts_with("0,0.500000,0.632121,1.18"));
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn manifest_digests_match_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let (_, manifest) = eigen(
            &DesignSource::Orthonormal { n: 8, p: 4 },
            &EigenScanConfig { s_max: 2, budget: 100, seed: 0 },
            dir.path(),
        )
        .unwrap();
        assert!(manifest.verify(dir.path()).unwrap());
        fs::write(dir.path().join("eigen.csv"), "tampered").unwrap();
        assert!(!manifest.verify(dir.path()).unwrap());
    }
}
