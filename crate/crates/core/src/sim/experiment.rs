//! Monte-Carlo experiments: every method is run on the same simulated data
//! in each repetition and scored by holdout MSE.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boost::{run, BoostConfig, BoostPath, NestedLeastSquares, Variant};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::lasso::{fit_with_penalty, post_lasso, LassoConfig, LassoFit, PenaltyMode};
use crate::rng::RngStream;
use crate::sim::dgp::{generate, mse_out, DgpSpec, SimData};
use crate::stopping::StoppingRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Ba,
    PostBa,
    Oba,
    Lasso,
    PostLasso,
}

impl Estimator {
    pub fn is_boosting(self) -> bool {
        matches!(self, Estimator::Ba | Estimator::PostBa | Estimator::Oba)
    }
}

/// An estimator with its stopping rule (boosting) or penalty (LASSO).
///
/// A `Ks` rule with `s = 0` takes `s` from the data-generating process.
/// The oracle rule picks the step with the smallest holdout MSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub estimator: Estimator,
    #[serde(default)]
    pub stop: StoppingRule,
    #[serde(default = "default_penalty")]
    pub penalty: PenaltyMode,
}

fn default_penalty() -> PenaltyMode {
    PenaltyMode::PlugIn
}

impl MethodSpec {
    pub fn boosting(estimator: Estimator, stop: StoppingRule) -> Self {
        Self {
            estimator,
            stop,
            penalty: PenaltyMode::PlugIn,
        }
    }

    pub fn lasso(estimator: Estimator, penalty: PenaltyMode) -> Self {
        Self {
            estimator,
            stop: StoppingRule::default(),
            penalty,
        }
    }

    /// Column label such as `BA-oracle`, `p-BA-our`, `oBA-Ks`, `LASSO` or
    /// `p-Lasso-CV`.
    pub fn label(&self) -> String {
        match self.estimator {
            Estimator::Ba => format!("BA-{}", self.stop.label()),
            Estimator::PostBa => format!("p-BA-{}", self.stop.label()),
            Estimator::Oba => format!("oBA-{}", self.stop.label()),
            Estimator::Lasso => match self.penalty {
                PenaltyMode::PlugIn => "LASSO".into(),
                PenaltyMode::CrossValidation => "Lasso-CV".into(),
            },
            Estimator::PostLasso => match self.penalty {
                PenaltyMode::PlugIn => "p-LASSO".into(),
                PenaltyMode::CrossValidation => "p-Lasso-CV".into(),
            },
        }
    }

    fn resolved_rule(&self, dgp: &DgpSpec) -> StoppingRule {
        match self.stop {
            StoppingRule::Ks { k, s: 0 } => StoppingRule::Ks { k, s: dgp.s.max(1) },
            ref r => r.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub dgps: Vec<DgpSpec>,
    pub methods: Vec<MethodSpec>,
    pub repetitions: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub lasso: LassoConfig,
    /// Boosting step cap (combined with `2n` and, for oBA, `min(n, p)`).
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_max_steps() -> usize {
    1000
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("repetitions must be at least 1".into()));
        }
        if self.methods.is_empty() || self.dgps.is_empty() {
            return Err(Error::InvalidConfig("need at least one dgp and one method".into()));
        }
        for d in &self.dgps {
            d.validate().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        }
        for m in &self.methods {
            if m.estimator.is_boosting() {
                m.resolved_rule(&self.dgps[0]).validate()?;
            }
        }
        self.lasso.validate()?;
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one method on one repetition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub mse: f64,
    pub stop_step: Option<usize>,
    pub support_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dgp_index: usize,
    pub dgp: DgpSpec,
    pub method: String,
    pub mse_mean: f64,
    pub mse_std_error: f64,
    pub mean_stop_step: Option<f64>,
    pub mean_support_size: f64,
    pub successes: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn get(&self, dgp_index: usize, method: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.dgp_index == dgp_index && r.method == method)
    }

    pub fn methods(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.method) {
                out.push(r.method.clone());
            }
        }
        out
    }

    /// Long format: one row per (dgp, method).
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "dgp,n,p,s,beta,x,method,mse_mean,mse_se,mean_stop_step,mean_support_size,successes,excluded\n",
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.dgp_index,
                r.dgp.n,
                r.dgp.p,
                r.dgp.s,
                snake(&r.dgp.beta_design),
                snake(&r.dgp.x_design),
                r.method,
                r.mse_mean,
                r.mse_std_error,
                r.mean_stop_step.map(|v| v.to_string()).unwrap_or_default(),
                r.mean_support_size,
                r.successes,
                r.excluded
            ));
        }
        s
    }

    /// Wide format: one row per dgp with `n, p` and one MSE column per method.
    pub fn to_wide_csv(&self) -> String {
        let methods = self.methods();
        let mut s = String::from("n,p");
        for m in &methods {
            s.push(',');
            s.push_str(m);
        }
        s.push('\n');
        let mut dgps: Vec<(usize, DgpSpec)> = Vec::new();
        for r in &self.rows {
            if !dgps.iter().any(|(i, _)| *i == r.dgp_index) {
                dgps.push((r.dgp_index, r.dgp));
            }
        }
        for (i, d) in dgps {
            s.push_str(&format!("{},{}", d.n, d.p));
            for m in &methods {
                let v = self.get(i, m).map(|r| format!("{:.4}", r.mse_mean)).unwrap_or_default();
                s.push(',');
                s.push_str(&v);
            }
            s.push('\n');
        }
        s
    }
}

fn snake<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// Holdout MSE of `beta^m` for every step of a BA path, updated in `O(n_1)`
/// per step.
fn ba_curve(path: &BoostPath, holdout: &Dataset) -> Result<Vec<f64>> {
    let truth = holdout.true_beta().ok_or(Error::OracleUnavailable)?;
    let mut f = holdout.x().mul_vec(truth);
    let n1 = f.len() as f64;
    let msq = |f: &[f64]| f.iter().map(|v| v * v).sum::<f64>() / n1;
    let mut out = Vec::with_capacity(path.len() + 1);
    out.push(msq(&f));
    for s in &path.steps {
        crate::linalg::axpy(-s.gamma, holdout.x().col(s.selected), &mut f);
        out.push(msq(&f));
    }
    Ok(out)
}

/// Holdout MSE of the OLS refit on the support of every prefix of `path`.
/// Entries are `None` once the nested refit becomes singular.
pub fn post_curve(path: &BoostPath, train: &Dataset, holdout: &Dataset) -> Result<Vec<Option<f64>>> {
    let zero = mse_out(&vec![0.0; train.p()], holdout)?;
    let mut by_size = vec![Some(zero)];
    let mut ls = NestedLeastSquares::new();
    let mut seen = vec![false; train.p()];
    let mut broken = false;
    for s in &path.steps {
        if seen[s.selected] {
            continue;
        }
        seen[s.selected] = true;
        if !broken && ls.push(train, s.selected).is_ok() {
            by_size.push(Some(mse_out(&ls.beta(train.p()), holdout)?));
        } else {
            broken = true;
            by_size.push(None);
        }
    }
    Ok(path.distinct_seq().into_iter().map(|d| by_size[d]).collect())
}

fn oba_curve(path: &BoostPath, holdout: &Dataset) -> Result<Vec<f64>> {
    (0..=path.len()).map(|m| mse_out(&path.beta_at(m), holdout)).collect()
}

fn argmin_some(v: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, x) in v.iter().enumerate() {
        if let Some(x) = *x {
            if best.is_none_or(|(_, b)| x < b) {
                best = Some((i, x));
            }
        }
    }
    best.map(|(i, _)| i)
}

struct RepCache {
    paths: HashMap<Variant, BoostPath>,
    ba_mse: Option<Vec<f64>>,
    post_mse: Option<Vec<Option<f64>>>,
    oba_mse: Option<Vec<f64>>,
    lasso: HashMap<PenaltyMode, LassoFit>,
}

/// Runs every method on one simulated data set.
fn run_repetition(
    spec: &ExperimentSpec,
    dgp: &DgpSpec,
    data: &SimData,
    stream: RngStream,
) -> Vec<Result<MethodOutcome>> {
    let mut cache = RepCache {
        paths: HashMap::new(),
        ba_mse: None,
        post_mse: None,
        oba_mse: None,
        lasso: HashMap::new(),
    };
    spec.methods
        .iter()
        .map(|m| evaluate_method(spec, dgp, data, m, &mut cache, stream))
        .collect()
}

fn path_for<'a>(
    cache: &'a mut RepCache,
    spec: &ExperimentSpec,
    data: &SimData,
    variant: Variant,
) -> Result<&'a BoostPath> {
    if !cache.paths.contains_key(&variant) {
        let n = data.train.n();
        let cap = spec.max_steps.min(2 * n);
        let cfg = BoostConfig {
            shrinkage: 1.0,
            max_steps: cap,
            variant,
        };
        let path = run(&data.train, &cfg, &StoppingRule::FixedSteps { steps: cap })?;
        cache.paths.insert(variant, path);
    }
    Ok(&cache.paths[&variant])
}

fn evaluate_method(
    spec: &ExperimentSpec,
    dgp: &DgpSpec,
    data: &SimData,
    method: &MethodSpec,
    cache: &mut RepCache,
    stream: RngStream,
) -> Result<MethodOutcome> {
    let (n, p) = (data.train.n(), data.train.p());
    match method.estimator {
        Estimator::Ba | Estimator::PostBa | Estimator::Oba => {
            let variant = if method.estimator == Estimator::Oba {
                Variant::Oba
            } else {
                Variant::Ba
            };
            let rule = method.resolved_rule(dgp);
            let path = path_for(cache, spec, data, variant)?.clone();
            let curve: Vec<Option<f64>> = match method.estimator {
                Estimator::Ba => {
                    if cache.ba_mse.is_none() {
                        cache.ba_mse = Some(ba_curve(&path, &data.holdout)?);
                    }
                    cache.ba_mse.as_ref().unwrap().iter().map(|v| Some(*v)).collect()
                }
                Estimator::PostBa => {
                    if cache.post_mse.is_none() {
                        cache.post_mse = Some(post_curve(&path, &data.train, &data.holdout)?);
                    }
                    cache.post_mse.clone().unwrap()
                }
                _ => {
                    if cache.oba_mse.is_none() {
                        cache.oba_mse = Some(oba_curve(&path, &data.holdout)?);
                    }
                    cache.oba_mse.as_ref().unwrap().iter().map(|v| Some(*v)).collect()
                }
            };
            let step = match rule {
                StoppingRule::Oracle => argmin_some(&curve).ok_or(Error::SingularGram {
                    position: 0,
                    ratio: 0.0,
                })?,
                _ => path.with_view(|v| rule.select_on_path(v, n, p))?,
            };
            let mse = curve[step].ok_or(Error::SingularGram {
                position: path.support_at(step).len(),
                ratio: 0.0,
            })?;
            Ok(MethodOutcome {
                mse,
                stop_step: Some(step),
                support_size: path.support_at(step).len(),
            })
        }
        Estimator::Lasso | Estimator::PostLasso => {
            if !cache.lasso.contains_key(&method.penalty) {
                let cfg = LassoConfig {
                    penalty: method.penalty,
                    ..spec.lasso
                };
                let fit = fit_with_penalty(&data.train, &cfg, stream.child(10))?;
                cache.lasso.insert(method.penalty, fit);
            }
            let fit = &cache.lasso[&method.penalty];
            let beta = if method.estimator == Estimator::PostLasso {
                post_lasso(&data.train, &fit.beta)?
            } else {
                fit.beta.clone()
            };
            Ok(MethodOutcome {
                mse: mse_out(&beta, &data.holdout)?,
                stop_step: None,
                support_size: fit.beta.iter().filter(|b| **b != 0.0).count(),
            })
        }
    }
}

/// Per-repetition outcomes, indexed `[dgp][repetition][method]`.
pub type Outcomes = Vec<Vec<Vec<Result<MethodOutcome>>>>;

/// Stream of repetition `r` on dgp `d`.
pub fn repetition_stream(master_seed: u64, dgp_index: usize, r: usize) -> RngStream {
    RngStream::new(master_seed, r as u64).child(dgp_index as u64)
}

/// Raw outcomes of every repetition. Repetitions run in parallel and are
/// collected in index order.
pub fn run_outcomes(spec: &ExperimentSpec) -> Result<Outcomes> {
    spec.validate()?;
    spec.dgps
        .iter()
        .enumerate()
        .map(|(d, dgp)| {
            (0..spec.repetitions)
                .into_par_iter()
                .map(|r| -> Result<Vec<Result<MethodOutcome>>> {
                    let stream = repetition_stream(spec.master_seed, d, r);
                    let data = generate(dgp, stream)?;
                    Ok(run_repetition(spec, dgp, &data, stream))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

/// Runs the experiment on `workers` threads (0 = rayon default). The table
/// is bit-identical for any worker count.
pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<ResultTable> {
    let outcomes = if workers == 0 {
        run_outcomes(spec)?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| run_outcomes(spec))?
    };
    Ok(aggregate(spec, &outcomes))
}

pub fn aggregate(spec: &ExperimentSpec, outcomes: &Outcomes) -> ResultTable {
    let mut rows = Vec::new();
    for (d, dgp) in spec.dgps.iter().enumerate() {
        for (k, method) in spec.methods.iter().enumerate() {
            let ok: Vec<&MethodOutcome> = outcomes[d]
                .iter()
                .filter_map(|rep| rep[k].as_ref().ok())
                .collect();
            let count = ok.len();
            let mean = |f: &dyn Fn(&MethodOutcome) -> f64| ok.iter().map(|o| f(o)).sum::<f64>() / count as f64;
            let (mse_mean, se, stop, support) = if count == 0 {
                (f64::NAN, f64::NAN, None, f64::NAN)
            } else {
                let mse_mean = mean(&|o| o.mse);
                let se = if count > 1 {
                    let var = ok.iter().map(|o| (o.mse - mse_mean).powi(2)).sum::<f64>() / (count - 1) as f64;
                    (var / count as f64).sqrt()
                } else {
                    0.0
                };
                let stop = method
                    .estimator
                    .is_boosting()
                    .then(|| mean(&|o| o.stop_step.unwrap_or(0) as f64));
                (mse_mean, se, stop, mean(&|o| o.support_size as f64))
            };
            rows.push(ResultRow {
                dgp_index: d,
                dgp: *dgp,
                method: method.label(),
                mse_mean,
                mse_std_error: se,
                mean_stop_step: stop,
                mean_support_size: support,
                successes: count,
                excluded: spec.repetitions - count,
            });
        }
    }
    ResultTable { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::dgp::XDesign;

    fn small_spec(methods: Vec<MethodSpec>, reps: usize) -> ExperimentSpec {
        ExperimentSpec {
            dgps: vec![DgpSpec::sparse(60, 30, 3, XDesign::Iid)],
            methods,
            repetitions: reps,
            master_seed: 17,
            lasso: LassoConfig::default(),
            max_steps: 1000,
        }
    }

    #[test]
    fn zero_step_method_scores_null_model() {
        let spec = small_spec(
            vec![MethodSpec::boosting(Estimator::Ba, StoppingRule::FixedSteps { steps: 0 })],
            1,
        );
        let table = run_experiment(&spec, 1).unwrap();
        let data = generate(&spec.dgps[0], repetition_stream(17, 0, 0)).unwrap();
        let null = mse_out(&[0.0; 30], &data.holdout).unwrap();
        assert_eq!(table.rows[0].mse_mean, null);
    }

    #[test]
    fn identical_methods_give_identical_columns() {
        let m = MethodSpec::boosting(Estimator::PostBa, StoppingRule::default());
        let spec = small_spec(vec![m.clone(), m], 4);
        let t = run_experiment(&spec, 1).unwrap();
        assert_eq!(t.rows[0].mse_mean, t.rows[1].mse_mean);
    }

    #[test]
    fn oracle_never_worse_within_a_repetition() {
        let methods = vec![
            MethodSpec::boosting(Estimator::Ba, StoppingRule::Oracle),
            MethodSpec::boosting(Estimator::Ba, StoppingRule::default()),
            MethodSpec::boosting(Estimator::Ba, StoppingRule::Ks { k: 2, s: 0 }),
            MethodSpec::boosting(Estimator::PostBa, StoppingRule::Oracle),
            MethodSpec::boosting(Estimator::PostBa, StoppingRule::default()),
            MethodSpec::boosting(Estimator::Oba, StoppingRule::Oracle),
            MethodSpec::boosting(Estimator::Oba, StoppingRule::Ks { k: 2, s: 0 }),
        ];
        let spec = small_spec(methods, 5);
        let out = run_outcomes(&spec).unwrap();
        for rep in &out[0] {
            let mse: Vec<f64> = rep.iter().map(|o| o.as_ref().unwrap().mse).collect();
            assert!(mse[0] <= mse[1] && mse[0] <= mse[2]);
            assert!(mse[3] <= mse[4]);
            assert!(mse[5] <= mse[6]);
            assert_eq!(rep[2].as_ref().unwrap().stop_step, Some(6));
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let methods = vec![
            MethodSpec::boosting(Estimator::Ba, StoppingRule::Oracle),
            MethodSpec::lasso(Estimator::PostLasso, PenaltyMode::CrossValidation),
        ];
        let spec = small_spec(methods, 6);
        let a = run_experiment(&spec, 1).unwrap();
        let b = run_experiment(&spec, 3).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn labels() {
        assert_eq!(MethodSpec::boosting(Estimator::PostBa, StoppingRule::Oracle).label(), "p-BA-oracle");
        assert_eq!(MethodSpec::boosting(Estimator::Oba, StoppingRule::default()).label(), "oBA-our");
        assert_eq!(MethodSpec::lasso(Estimator::PostLasso, PenaltyMode::CrossValidation).label(), "p-Lasso-CV");
    }

    #[test]
    fn invalid_experiment() {
        let mut spec = small_spec(vec![], 1);
        assert!(spec.validate().is_err());
        spec.methods.push(MethodSpec::boosting(Estimator::Ba, StoppingRule::Oracle));
        spec.repetitions = 0;
        assert!(spec.validate().is_err());
    }
}
