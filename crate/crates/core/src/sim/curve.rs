//! Mean in-sample and holdout MSE as a function of the boosting step.

use serde::{Deserialize, Serialize};

use crate::boost::{run_ba, BoostConfig};
use crate::error::{Error, Result};
use crate::lasso::{fit_with_penalty, LassoConfig, PenaltyMode};
use crate::linalg::{axpy, ols_solve};
use crate::rng::RngStream;
use crate::sim::dgp::{generate, mse_out, DgpSpec};
use crate::sim::experiment::post_curve;
use crate::stopping::StoppingRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMethod {
    Ba,
    PostBa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub dgp: DgpSpec,
    pub method: CurveMethod,
    pub repetitions: usize,
    pub max_steps: usize,
    pub master_seed: u64,
    /// Constant of the variance-ratio stop whose location is reported.
    pub ratio_constant: f64,
    #[serde(default)]
    pub lasso: LassoConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub m: usize,
    pub mse_in: f64,
    pub mse_out: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
    /// Holdout MSE of OLS on all regressors (only when `p < n`).
    pub ols_ref: Option<f64>,
    /// Holdout MSE of the plug-in LASSO.
    pub lasso_ref: f64,
    /// Holdout MSE of the cross-validated LASSO.
    pub lasso_cv_ref: f64,
    /// Mean step at which the variance-ratio rule returns its model.
    pub ratio_stop_mean: f64,
    /// Mean holdout MSE of the model the variance-ratio rule returns.
    pub ratio_stop_mse: f64,
}

impl CurveTable {
    /// Step with the smallest mean holdout MSE.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, r) in self.rows.iter().enumerate() {
            if r.mse_out < self.rows[best].mse_out {
                best = i;
            }
        }
        self.rows[best].m
    }

    pub fn min_mse_out(&self) -> f64 {
        self.rows.iter().map(|r| r.mse_out).fold(f64::INFINITY, f64::min)
    }

    /// Interior minimum strictly below both end points.
    pub fn is_u_shaped(&self) -> bool {
        let k = self.argmin();
        let (first, last) = (self.rows[0].mse_out, self.rows[self.rows.len() - 1].mse_out);
        k > 0 && k + 1 < self.rows.len() && self.min_mse_out() < first && self.min_mse_out() < last
    }

    /// `m,mse_in,mse_out,ols_ref,lasso_ref`; the reference columns repeat the
    /// constant levels on every row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,mse_in,mse_out,ols_ref,lasso_ref\n");
        let ols = self.ols_ref.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{},{}\n", r.m, r.mse_in, r.mse_out, ols, self.lasso_ref));
        }
        s
    }
}

/// Averages the per-step MSE over `repetitions` simulated data sets. Paths
/// that end early (exact fit) keep their last value for the remaining steps.
pub fn step_curve(spec: &CurveSpec) -> Result<CurveTable> {
    if spec.repetitions == 0 {
        return Err(Error::InvalidConfig("repetitions must be at least 1".into()));
    }
    spec.dgp.validate()?;
    let steps = spec.max_steps;
    let mut sum_in = vec![0.0; steps + 1];
    let mut sum_out = vec![0.0; steps + 1];
    let (mut ols_sum, mut lasso_sum, mut cv_sum) = (0.0, 0.0, 0.0);
    let (mut stop_sum, mut stop_mse_sum) = (0.0, 0.0);
    let has_ols = spec.dgp.p < spec.dgp.n;
    let rule = StoppingRule::ratio(spec.ratio_constant);
    let reps: Vec<_> = (0..spec.repetitions)
        .map(|r| RngStream::new(spec.master_seed, r as u64))
        .collect();
    let results: Vec<Result<_>> = {
        use rayon::prelude::*;
        reps.par_iter()
            .map(|&stream| curve_repetition(spec, &rule, stream, has_ols))
            .collect()
    };
    for res in results {
        let rep = res?;
        for m in 0..=steps {
            sum_in[m] += rep.mse_in[m];
            sum_out[m] += rep.mse_out[m];
        }
        ols_sum += rep.ols.unwrap_or(0.0);
        lasso_sum += rep.lasso;
        cv_sum += rep.lasso_cv;
        stop_sum += rep.stop as f64;
        stop_mse_sum += rep.mse_out[rep.stop.min(steps)];
    }
    let r = spec.repetitions as f64;
    Ok(CurveTable {
        rows: (0..=steps)
            .map(|m| CurveRow {
                m,
                mse_in: sum_in[m] / r,
                mse_out: sum_out[m] / r,
            })
            .collect(),
        ols_ref: has_ols.then_some(ols_sum / r),
        lasso_ref: lasso_sum / r,
        lasso_cv_ref: cv_sum / r,
        ratio_stop_mean: stop_sum / r,
        ratio_stop_mse: stop_mse_sum / r,
    })
}

struct CurveRep {
    mse_in: Vec<f64>,
    mse_out: Vec<f64>,
    ols: Option<f64>,
    lasso: f64,
    lasso_cv: f64,
    stop: usize,
}

fn pad(mut v: Vec<f64>, len: usize) -> Vec<f64> {
    let last = *v.last().expect("non-empty curve");
    v.resize(len, last);
    v.truncate(len);
    v
}

fn curve_repetition(spec: &CurveSpec, rule: &StoppingRule, stream: RngStream, has_ols: bool) -> Result<CurveRep> {
    let data = generate(&spec.dgp, stream)?;
    let (train, hold) = (&data.train, &data.holdout);
    let steps = spec.max_steps;
    let path = if steps == 0 {
        run_ba(train, &BoostConfig::ba(1), &StoppingRule::FixedSteps { steps: 0 })?
    } else {
        run_ba(train, &BoostConfig::ba(steps), &StoppingRule::FixedSteps { steps })?
    };
    let (in_curve, out_curve) = match spec.method {
        CurveMethod::Ba => {
            let truth = hold.true_beta().ok_or(Error::OracleUnavailable)?;
            let mut f = hold.x().mul_vec(truth);
            let n1 = f.len() as f64;
            let mut out = vec![f.iter().map(|v| v * v).sum::<f64>() / n1];
            for s in &path.steps {
                axpy(-s.gamma, hold.x().col(s.selected), &mut f);
                out.push(f.iter().map(|v| v * v).sum::<f64>() / n1);
            }
            (path.pred_sq_seq().ok_or(Error::OracleUnavailable)?, out)
        }
        CurveMethod::PostBa => {
            let out = post_curve(&path, train, hold)?;
            let out: Vec<f64> = out.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
            let mut ins = Vec::with_capacity(path.len() + 1);
            for m in 0..=path.len() {
                let beta = crate::boost::refit_on_support(train, &path.support_at(m))
                    .unwrap_or_else(|_| vec![f64::NAN; train.p()]);
                ins.push(crate::linalg::norm_sq_n(&train.x().mul_vec(
                    &train
                        .true_beta()
                        .unwrap()
                        .iter()
                        .zip(&beta)
                        .map(|(a, b)| a - b)
                        .collect::<Vec<_>>(),
                )));
            }
            (ins, out)
        }
    };
    let stop = path.with_view(|v| rule.select_on_path(v, train.n(), train.p()))?;
    let ols = if has_ols {
        Some(mse_out(&ols_solve(train.x(), train.y())?, hold)?)
    } else {
        None
    };
    let plug = fit_with_penalty(train, &LassoConfig { penalty: PenaltyMode::PlugIn, ..spec.lasso }, stream.child(10))?;
    let cv = fit_with_penalty(
        train,
        &LassoConfig {
            penalty: PenaltyMode::CrossValidation,
            ..spec.lasso
        },
        stream.child(10),
    )?;
    Ok(CurveRep {
        mse_in: pad(in_curve, steps + 1),
        mse_out: pad(out_curve, steps + 1),
        ols,
        lasso: mse_out(&plug.beta, hold)?,
        lasso_cv: mse_out(&cv.beta, hold)?,
        stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dgp: DgpSpec, reps: usize, steps: usize) -> CurveSpec {
        CurveSpec {
            dgp,
            method: CurveMethod::Ba,
            repetitions: reps,
            max_steps: steps,
            master_seed: 3,
            ratio_constant: 4.5,
            lasso: LassoConfig::default(),
        }
    }

    #[test]
    fn zero_steps_gives_null_model_row() {
        let t = step_curve(&spec(DgpSpec::illustrative(20), 3, 0)).unwrap();
        assert_eq!(t.rows.len(), 1);
        let mut null = 0.0;
        for r in 0..3 {
            let d = generate(&DgpSpec::illustrative(20), RngStream::new(3, r)).unwrap();
            null += mse_out(&[0.0; 10], &d.holdout).unwrap();
        }
        assert!((t.rows[0].mse_out - null / 3.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_curve_is_monotone() {
        let dgp = DgpSpec {
            noise_sd: 0.0,
            ..DgpSpec::illustrative(20)
        };
        let t = step_curve(&spec(dgp, 5, 60)).unwrap();
        assert!(t.rows.windows(2).all(|w| w[1].mse_out <= w[0].mse_out + 1e-9));
    }

    #[test]
    fn csv_shape() {
        let t = step_curve(&spec(DgpSpec::illustrative(20), 2, 5)).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("m,mse_in,mse_out,ols_ref,lasso_ref\n"));
        assert_eq!(csv.lines().count(), 7);
    }
}
