//! Datasets, standardization and CSV ingestion.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_sq_n, Matrix};

/// Columns whose 1/n variance falls below this are rejected as constant.
pub const MIN_COLUMN_VARIANCE: f64 = 1e-14;

/// Design matrix, response and (optionally) the true coefficients, all in
/// the standardized basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    x: Matrix,
    y: Vec<f64>,
    true_beta: Option<Vec<f64>>,
    column_means: Vec<f64>,
    column_scales: Vec<f64>,
    y_mean: f64,
}

impl Dataset {
    /// Wraps an already prepared design without transforming it.
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::LengthMismatch {
                expected: x.rows(),
                got: y.len(),
            });
        }
        if x.rows() < 2 || x.cols() < 1 {
            return Err(Error::InvalidConfig(format!(
                "dataset needs n >= 2 and p >= 1, got n={}, p={}",
                x.rows(),
                x.cols()
            )));
        }
        let p = x.cols();
        Ok(Self {
            x,
            y,
            true_beta: None,
            column_means: vec![0.0; p],
            column_scales: vec![1.0; p],
            y_mean: 0.0,
        })
    }

    /// Centers every column and scales it to unit 1/n variance; optionally
    /// de-means `y`.
    pub fn standardize(raw: &Matrix, y: &[f64], center_y: bool) -> Result<Self> {
        let (n, p) = (raw.rows(), raw.cols());
        if y.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if n < 2 || p < 1 {
            return Err(Error::InvalidConfig(format!(
                "dataset needs n >= 2 and p >= 1, got n={n}, p={p}"
            )));
        }
        let nf = n as f64;
        let mut x = Matrix::zeros(n, p);
        let mut means = Vec::with_capacity(p);
        let mut scales = Vec::with_capacity(p);
        for j in 0..p {
            let col = raw.col(j);
            let mean = col.iter().sum::<f64>() / nf;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
            if !(var >= MIN_COLUMN_VARIANCE) {
                return Err(Error::ConstantColumn(j));
            }
            let scale = var.sqrt();
            for (dst, v) in x.col_mut(j).iter_mut().zip(col) {
                *dst = (v - mean) / scale;
            }
            means.push(mean);
            scales.push(scale);
        }
        let y_mean = if center_y {
            y.iter().sum::<f64>() / nf
        } else {
            0.0
        };
        Ok(Self {
            x,
            y: y.iter().map(|v| v - y_mean).collect(),
            true_beta: None,
            column_means: means,
            column_scales: scales,
            y_mean,
        })
    }

    /// Applies this dataset's standardization (means, scales, response
    /// centering) to new observations, e.g. a holdout sample.
    pub fn transform(&self, raw: &Matrix, y: &[f64]) -> Result<Self> {
        if raw.cols() != self.p() {
            return Err(Error::LengthMismatch {
                expected: self.p(),
                got: raw.cols(),
            });
        }
        if y.len() != raw.rows() {
            return Err(Error::LengthMismatch {
                expected: raw.rows(),
                got: y.len(),
            });
        }
        let mut x = Matrix::zeros(raw.rows(), raw.cols());
        for j in 0..raw.cols() {
            let (m, s) = (self.column_means[j], self.column_scales[j]);
            for (dst, v) in x.col_mut(j).iter_mut().zip(raw.col(j)) {
                *dst = (v - m) / s;
            }
        }
        Ok(Self {
            x,
            y: y.iter().map(|v| v - self.y_mean).collect(),
            true_beta: self.true_beta.clone(),
            column_means: self.column_means.clone(),
            column_scales: self.column_scales.clone(),
            y_mean: self.y_mean,
        })
    }

    /// Attaches true coefficients expressed in the standardized basis.
    pub fn with_true_beta(mut self, beta: Vec<f64>) -> Result<Self> {
        if beta.len() != self.p() {
            return Err(Error::LengthMismatch {
                expected: self.p(),
                got: beta.len(),
            });
        }
        self.true_beta = Some(beta);
        Ok(self)
    }

    /// Converts coefficients on the raw scale into the standardized basis.
    pub fn beta_to_standardized(&self, raw_beta: &[f64]) -> Vec<f64> {
        raw_beta
            .iter()
            .zip(&self.column_scales)
            .map(|(b, s)| b * s)
            .collect()
    }

    /// Converts standardized coefficients back to the raw scale, returning
    /// `(intercept, slopes)`.
    pub fn beta_to_raw(&self, beta: &[f64]) -> (f64, Vec<f64>) {
        let slopes: Vec<f64> = beta
            .iter()
            .zip(&self.column_scales)
            .map(|(b, s)| b / s)
            .collect();
        let intercept = self.y_mean - dot(&slopes, &self.column_means);
        (intercept, slopes)
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn true_beta(&self) -> Option<&[f64]> {
        self.true_beta.as_deref()
    }

    pub fn column_means(&self) -> &[f64] {
        &self.column_means
    }

    pub fn column_scales(&self) -> &[f64] {
        &self.column_scales
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    /// Indices of the nonzero true coefficients.
    pub fn true_support(&self) -> Option<Vec<usize>> {
        self.true_beta.as_ref().map(|b| {
            b.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, _)| j)
                .collect()
        })
    }

    /// `y - X beta_true`, the noise realisation when the truth is known.
    pub fn noise(&self) -> Option<Vec<f64>> {
        self.true_beta.as_ref().map(|b| {
            let fit = self.x.mul_vec(b);
            self.y.iter().zip(fit).map(|(y, f)| y - f).collect()
        })
    }

    /// `y - X beta`.
    pub fn residual(&self, beta: &[f64]) -> Vec<f64> {
        let fit = self.x.mul_vec(beta);
        self.y.iter().zip(fit).map(|(y, f)| y - f).collect()
    }

    pub fn residual_sq(&self, beta: &[f64]) -> f64 {
        norm_sq_n(&self.residual(beta))
    }

    /// Largest deviation from zero mean / unit 1/n variance over all columns.
    pub fn standardization_error(&self) -> f64 {
        let n = self.n() as f64;
        (0..self.p())
            .map(|j| {
                let c = self.x.col(j);
                let mean = c.iter().sum::<f64>() / n;
                let ms = dot(c, c) / n;
                mean.abs().max((ms - 1.0).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Predictors and response parsed from a CSV file.
#[derive(Debug, Clone)]
pub struct RawData {
    pub predictors: Matrix,
    pub response: Vec<f64>,
    pub predictor_names: Vec<String>,
    pub response_name: String,
}

/// Reads a header-row numeric CSV and splits off the named response column.
///
/// Parse errors report the 1-based file line and 1-based column.
pub fn read_csv(path: impl AsRef<Path>, response_column: &str) -> Result<RawData> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(file, response_column)
}

pub fn read_csv_from(reader: impl std::io::Read, response_column: &str) -> Result<RawData> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .quoting(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::ParseError {
            row: 1,
            col: 0,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_owned)
        .collect();
    let resp_idx = headers
        .iter()
        .position(|h| h == response_column)
        .ok_or_else(|| Error::MissingColumn(response_column.to_owned()))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut response = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::ParseError {
            row: line,
            col: 0,
            message: e.to_string(),
        })?;
        if rec.len() != headers.len() {
            return Err(Error::ParseError {
                row: line,
                col: rec.len().min(headers.len()) + 1,
                message: format!("expected {} fields, found {}", headers.len(), rec.len()),
            });
        }
        let mut row = Vec::with_capacity(headers.len() - 1);
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::ParseError {
                row: line,
                col: c + 1,
                message: format!("`{field}` is not a number"),
            })?;
            if c == resp_idx {
                response.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(Error::ParseError {
            row: rows.len() + 2,
            col: 0,
            message: "need at least two data rows".into(),
        });
    }
    let predictor_names = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != resp_idx)
        .map(|(_, h)| h.clone())
        .collect();
    Ok(RawData {
        predictors: Matrix::from_rows(&rows)?,
        response,
        predictor_names,
        response_name: response_column.to_owned(),
    })
}
