//! Data-generating processes for the Monte-Carlo lab.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::RngStream;

/// Correlation factor of the correlated design: `Sigma_jk = TOEPLITZ_RHO^|j-k|`.
pub const TOEPLITZ_RHO: f64 = -0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaDesign {
    /// First `s` coefficients equal one, the rest zero.
    Sparse,
    /// `beta_j = 1/j` for every `j`.
    Polynomial,
    /// `(5, 2, 1, 0, ..., 0)`.
    Illustrative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XDesign {
    /// Independent standard normal entries.
    Iid,
    /// Gaussian rows with covariance `Sigma_jk = (-0.5)^|j-k|`.
    Toeplitz,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub beta_design: BetaDesign,
    pub x_design: XDesign,
    pub noise_sd: f64,
    /// Holdout size `n_1`.
    pub holdout: usize,
}

impl DgpSpec {
    pub fn sparse(n: usize, p: usize, s: usize, x_design: XDesign) -> Self {
        Self {
            n,
            p,
            s,
            beta_design: BetaDesign::Sparse,
            x_design,
            noise_sd: 1.0,
            holdout: 50,
        }
    }

    pub fn polynomial(n: usize, p: usize, s: usize, x_design: XDesign) -> Self {
        Self {
            beta_design: BetaDesign::Polynomial,
            ..Self::sparse(n, p, s, x_design)
        }
    }

    /// `y = 5 x_1 + 2 x_2 + x_3 + eps`, ten iid regressors, noise sd 2.
    pub fn illustrative(n: usize) -> Self {
        Self {
            n,
            p: 10,
            s: 3,
            beta_design: BetaDesign::Illustrative,
            x_design: XDesign::Iid,
            noise_sd: 2.0,
            holdout: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Domain(m));
        if self.n < 2 || self.p < 1 {
            return bad(format!("need n >= 2 and p >= 1 (n={}, p={})", self.n, self.p));
        }
        if self.s > self.p {
            return bad(format!("s = {} exceeds p = {}", self.s, self.p));
        }
        if self.holdout < 1 {
            return bad("holdout size must be at least 1".into());
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return bad(format!("noise sd must be >= 0, got {}", self.noise_sd));
        }
        if self.beta_design == BetaDesign::Illustrative && self.p < 3 {
            return bad("illustrative coefficients need p >= 3".into());
        }
        Ok(())
    }

    /// True coefficients on the original (unstandardized) scale.
    pub fn true_beta(&self) -> Vec<f64> {
        match self.beta_design {
            BetaDesign::Sparse => (0..self.p).map(|j| if j < self.s { 1.0 } else { 0.0 }).collect(),
            BetaDesign::Polynomial => (1..=self.p).map(|j| 1.0 / j as f64).collect(),
            BetaDesign::Illustrative => {
                let mut b = vec![0.0; self.p];
                b[..3].copy_from_slice(&[5.0, 2.0, 1.0]);
                b
            }
        }
    }

    /// Population covariance of one row.
    pub fn covariance(&self) -> Matrix {
        match self.x_design {
            XDesign::Iid => Matrix::identity(self.p),
            XDesign::Toeplitz => Matrix::from_fn(self.p, self.p, |j, k| {
                TOEPLITZ_RHO.powi((j as i32 - k as i32).abs())
            }),
        }
    }
}

/// One simulated training set and its holdout, both in the training
/// standardization and carrying the true coefficients in that basis.
#[derive(Debug, Clone)]
pub struct SimData {
    pub train: Dataset,
    pub holdout: Dataset,
}

/// `rows x p` draws of the design. The correlated design uses the closed-form
/// Cholesky factor of the Toeplitz covariance, i.e. the recursion
/// `x_1 = z_1`, `x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j`.
pub fn draw_design(spec: &DgpSpec, rows: usize, stream: RngStream) -> Matrix {
    let p = spec.p;
    let z = stream.rng().normals(rows * p);
    match spec.x_design {
        XDesign::Iid => Matrix::from_fn(rows, p, |i, j| z[i * p + j]),
        XDesign::Toeplitz => {
            let rho = TOEPLITZ_RHO;
            let tail = (1.0 - rho * rho).sqrt();
            let mut x = Matrix::zeros(rows, p);
            for i in 0..rows {
                let mut prev = 0.0;
                for j in 0..p {
                    let v = if j == 0 { z[i * p] } else { rho * prev + tail * z[i * p + j] };
                    x[(i, j)] = v;
                    prev = v;
                }
            }
            x
        }
    }
}

/// Draws a training set (standardized, `y` centred) and an independent
/// holdout transformed with the training statistics.
pub fn generate(spec: &DgpSpec, stream: RngStream) -> Result<SimData> {
    spec.validate()?;
    let beta = spec.true_beta();
    let respond = |x: &Matrix, eps_stream: RngStream| -> Vec<f64> {
        let mut y = x.mul_vec(&beta);
        if spec.noise_sd > 0.0 {
            let eps = eps_stream.rng().normals(x.rows());
            for (yi, e) in y.iter_mut().zip(eps) {
                *yi += spec.noise_sd * e;
            }
        }
        y
    };
    let x_train = draw_design(spec, spec.n, stream.child(0));
    let y_train = respond(&x_train, stream.child(1));
    let train = Dataset::standardize(&x_train, &y_train, true)?;
    let std_beta = train.beta_to_standardized(&beta);
    let train = train.with_true_beta(std_beta.clone())?;

    let x_hold = draw_design(spec, spec.holdout, stream.child(2));
    let y_hold = respond(&x_hold, stream.child(3));
    let holdout = train.transform(&x_hold, &y_hold)?.with_true_beta(std_beta)?;
    Ok(SimData { train, holdout })
}

/// `1/n_1 sum_i (x_i'(beta - beta_hat))^2` over the holdout rows, both
/// coefficient vectors in the standardized basis.
pub fn mse_out(beta_hat: &[f64], holdout: &Dataset) -> Result<f64> {
    let truth = holdout.true_beta().ok_or(Error::OracleUnavailable)?;
    if beta_hat.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            got: beta_hat.len(),
        });
    }
    let diff: Vec<f64> = truth.iter().zip(beta_hat).map(|(a, b)| a - b).collect();
    let f = holdout.x().mul_vec(&diff);
    Ok(f.iter().map(|v| v * v).sum::<f64>() / f.len() as f64)
}
