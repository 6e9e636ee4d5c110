//! LASSO by cyclic coordinate descent, with plug-in and cross-validated
//! penalties and the post-LASSO refit.
//!
//! The objective is `(1/(2n)) ||y - X beta||^2 + lambda ||beta||_1`, so
//! penalty levels are on the `sqrt(log p / n)` scale and are not comparable
//! with solvers that drop the `1/n` factor.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::boost::refit_on_support;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm_sq_n};
use crate::rng::RngStream;

/// Multiplier of the plug-in penalty.
pub const PLUGIN_CONSTANT: f64 = 1.1;
/// Iterations of the fit-then-reestimate loop for the plug-in noise level.
pub const PLUGIN_ITERATIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyMode {
    PlugIn,
    CrossValidation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LassoConfig {
    pub penalty: PenaltyMode,
    /// Level of the plug-in rule.
    pub alpha: f64,
    pub folds: usize,
    pub grid_size: usize,
    /// Largest coefficient change per sweep at convergence.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            penalty: PenaltyMode::PlugIn,
            alpha: 0.05,
            folds: 10,
            grid_size: 50,
            tol: 1e-10,
            max_sweeps: 100_000,
        }
    }
}

impl LassoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidConfig(format!("folds must be >= 2, got {}", self.folds)));
        }
        if self.grid_size < 10 {
            return Err(Error::InvalidConfig(format!(
                "grid_size must be >= 10, got {}",
                self.grid_size
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("convergence tolerance must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub beta: Vec<f64>,
    pub lambda: f64,
    pub sweeps: usize,
    /// False when `max_sweeps` ran out; `beta` is then the last iterate.
    pub converged: bool,
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// `(1/(2n)) ||y - X beta||^2 + lambda ||beta||_1`.
pub fn objective(ds: &Dataset, beta: &[f64], lambda: f64) -> f64 {
    0.5 * ds.residual_sq(beta) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

pub fn lasso_fit(ds: &Dataset, lambda: f64, cfg: &LassoConfig) -> Result<LassoFit> {
    lasso_fit_from(ds, lambda, cfg, None)
}

/// Coordinate descent started from `init` (zeros when `None`).
pub fn lasso_fit_from(ds: &Dataset, lambda: f64, cfg: &LassoConfig, init: Option<&[f64]>) -> Result<LassoFit> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be a finite value >= 0, got {lambda}")));
    }
    if !(cfg.tol > 0.0) || cfg.max_sweeps == 0 {
        return Err(Error::InvalidConfig("tol and max_sweeps must be positive".into()));
    }
    let x = ds.x();
    let (n, p) = (ds.n(), ds.p());
    let nf = n as f64;
    let col_sq: Vec<f64> = (0..p).map(|j| dot(x.col(j), x.col(j)) / nf).collect();
    let mut beta = match init {
        Some(b) if b.len() == p => b.to_vec(),
        Some(b) => {
            return Err(Error::LengthMismatch {
                expected: p,
                got: b.len(),
            })
        }
        None => vec![0.0; p],
    };
    let mut r = ds.residual(&beta);
    for sweep in 1..=cfg.max_sweeps {
        let mut max_change = 0.0f64;
        for j in 0..p {
            if col_sq[j] <= 0.0 {
                continue;
            }
            let rho = dot(x.col(j), &r) / nf + col_sq[j] * beta[j];
            let new = soft_threshold(rho, lambda) / col_sq[j];
            let diff = new - beta[j];
            if diff != 0.0 {
                axpy(-diff, x.col(j), &mut r);
                beta[j] = new;
                max_change = max_change.max(diff.abs());
            }
        }
        if max_change < cfg.tol {
            return Ok(LassoFit {
                beta,
                lambda,
                sweeps: sweep,
                converged: true,
            });
        }
    }
    Ok(LassoFit {
        beta,
        lambda,
        sweeps: cfg.max_sweeps,
        converged: false,
    })
}

/// Largest violation of the optimality conditions: `|g_j - lambda sign(b_j)|`
/// on the active set and `(|g_j| - lambda)_+` elsewhere, with
/// `g_j = <x_j, y - X beta>_n`.
pub fn kkt_violation(ds: &Dataset, beta: &[f64], lambda: f64) -> f64 {
    let r = ds.residual(beta);
    let n = ds.n() as f64;
    (0..ds.p())
        .map(|j| {
            let g = dot(ds.x().col(j), &r) / n;
            if beta[j] != 0.0 {
                (g - lambda * beta[j].signum()).abs()
            } else {
                (g.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Smallest penalty with an all-zero solution: `max_j |<x_j, y>_n|`.
pub fn lambda_max(ds: &Dataset) -> f64 {
    let n = ds.n() as f64;
    (0..ds.p())
        .map(|j| (dot(ds.x().col(j), ds.y()) / n).abs())
        .fold(0.0, f64::max)
}

/// `1.1 sigma_hat Phi^{-1}(1 - alpha/(2p)) / sqrt(n)`.
pub fn plugin_lambda(n: usize, p: usize, alpha: f64, sigma_hat: f64) -> Result<f64> {
    if !(sigma_hat > 0.0) || !sigma_hat.is_finite() {
        return Err(Error::Domain(format!("sigma_hat must be positive, got {sigma_hat}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) || n == 0 || p == 0 {
        return Err(Error::Domain(format!(
            "plug-in penalty needs alpha in (0,1), n, p >= 1 (alpha={alpha}, n={n}, p={p})"
        )));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let q = normal.inverse_cdf(1.0 - alpha / (2.0 * p as f64));
    Ok(PLUGIN_CONSTANT * sigma_hat * q / (n as f64).sqrt())
}

/// Regressors used for the starting noise estimate of the plug-in penalty.
pub const PLUGIN_START_REGRESSORS: usize = 5;

/// Plug-in penalty with the noise level re-estimated from the fitted
/// post-LASSO residuals (at most [`PLUGIN_ITERATIONS`] rounds). The first estimate comes
/// from OLS on the [`PLUGIN_START_REGRESSORS`] regressors most correlated
/// with `y`. Returns the final fit.
pub fn plugin_penalty(ds: &Dataset, cfg: &LassoConfig) -> Result<LassoFit> {
    cfg.validate()?;
    let (n, p) = (ds.n(), ds.p());
    let mut sigma = initial_sigma(ds)?;
    let mut fit = lasso_fit(ds, plugin_lambda(n, p, cfg.alpha, sigma)?, cfg)?;
    for _ in 1..PLUGIN_ITERATIONS {
        let df = fit.beta.iter().filter(|b| **b != 0.0).count();
        let dof = n.saturating_sub(df).max(1) as f64;
        let refit = post_lasso(ds, &fit.beta).unwrap_or_else(|_| fit.beta.clone());
        let next = (ds.residual_sq(&refit) * n as f64 / dof).sqrt();
        if !(next > 0.0) || (next - sigma).abs() <= 1e-6 * sigma {
            break;
        }
        sigma = next;
        fit = lasso_fit_from(ds, plugin_lambda(n, p, cfg.alpha, sigma)?, cfg, Some(&fit.beta))?;
    }
    Ok(fit)
}

fn initial_sigma(ds: &Dataset) -> Result<f64> {
    let n = ds.n();
    let k = PLUGIN_START_REGRESSORS.min(ds.p()).min(n.saturating_sub(2));
    let mut score: Vec<(f64, usize)> = (0..ds.p())
        .map(|j| (-(dot(ds.x().col(j), ds.y())).abs(), j))
        .collect();
    score.sort_by(|a, b| a.partial_cmp(b).expect("finite correlations"));
    let mut support: Vec<usize> = score[..k].iter().map(|&(_, j)| j).collect();
    support.sort_unstable();
    let beta = refit_on_support(ds, &support).or_else(|_| refit_on_support(ds, &[]))?;
    let resid = ds.residual(&beta);
    let mean = resid.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = resid.iter().map(|v| v - mean).collect();
    let sigma = (norm_sq_n(&centred) * n as f64 / (n - k).max(1) as f64).sqrt();
    if !(sigma > 0.0) {
        return Err(Error::ZeroResidual);
    }
    Ok(sigma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub lambda: f64,
    /// Descending penalty grid.
    pub grid: Vec<f64>,
    /// Mean held-out squared error per grid point.
    pub cv_error: Vec<f64>,
}

/// Log-spaced grid from `lambda_max` down to `lambda_max / 1000`.
pub fn penalty_grid(lambda_max: f64, size: usize) -> Vec<f64> {
    (0..size)
        .map(|i| lambda_max * 1e-3f64.powf(i as f64 / (size - 1) as f64))
        .collect()
}

/// K-fold cross-validation over [`penalty_grid`]; fold membership is a
/// random permutation drawn from `stream`.
pub fn cv_lambda(ds: &Dataset, cfg: &LassoConfig, stream: RngStream) -> Result<CvResult> {
    cfg.validate()?;
    let n = ds.n();
    if cfg.folds > n {
        return Err(Error::InvalidConfig(format!("{} folds exceed n = {n}", cfg.folds)));
    }
    let lmax = lambda_max(ds);
    let grid = if lmax > 0.0 {
        penalty_grid(lmax, cfg.grid_size)
    } else {
        vec![0.0; cfg.grid_size]
    };
    let mut order: Vec<usize> = (0..n).collect();
    stream.rng().shuffle(&mut order);
    let mut fold_of = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % cfg.folds;
    }

    let per_fold: Vec<Vec<f64>> = (0..cfg.folds)
        .into_par_iter()
        .map(|k| -> Result<Vec<f64>> {
            let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != k).collect();
            let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == k).collect();
            let tr = Dataset::new(
                ds.x().select_rows(&train),
                train.iter().map(|&i| ds.y()[i]).collect(),
            )?;
            let xt = ds.x().select_rows(&test);
            let yt: Vec<f64> = test.iter().map(|&i| ds.y()[i]).collect();
            let mut warm: Option<Vec<f64>> = None;
            let mut sse = Vec::with_capacity(grid.len());
            for &lambda in &grid {
                let fit = lasso_fit_from(&tr, lambda, cfg, warm.as_deref())?;
                let pred = xt.mul_vec(&fit.beta);
                sse.push(yt.iter().zip(&pred).map(|(a, b)| (a - b) * (a - b)).sum());
                warm = Some(fit.beta);
            }
            Ok(sse)
        })
        .collect::<Result<_>>()?;

    let cv_error: Vec<f64> = (0..grid.len())
        .map(|g| per_fold.iter().map(|f| f[g]).sum::<f64>() / n as f64)
        .collect();
    // earliest (largest-penalty) minimiser
    let best = cv_error
        .iter()
        .enumerate()
        .fold(0, |b, (i, &e)| if e < cv_error[b] { i } else { b });
    Ok(CvResult {
        lambda: grid[best],
        grid,
        cv_error,
    })
}

/// LASSO with the penalty chosen by `cfg.penalty`.
pub fn fit_with_penalty(ds: &Dataset, cfg: &LassoConfig, stream: RngStream) -> Result<LassoFit> {
    match cfg.penalty {
        PenaltyMode::PlugIn => plugin_penalty(ds, cfg),
        PenaltyMode::CrossValidation => {
            let cv = cv_lambda(ds, cfg, stream)?;
            lasso_fit(ds, cv.lambda, cfg)
        }
    }
}

/// OLS on the support of `beta_hat`.
pub fn post_lasso(ds: &Dataset, beta_hat: &[f64]) -> Result<Vec<f64>> {
    let support: Vec<usize> = beta_hat
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| j)
        .collect();
    refit_on_support(ds, &support)
}
