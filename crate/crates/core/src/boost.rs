//! L2Boosting with componentwise least squares, its orthogonal variant and
//! the post-selection refit.
//!
//! A run records one [`BoostStep`] per iteration: the selected column, the
//! step coefficient, `||U^{m+1}||^2_{2,n}` and, when the true coefficients are
//! known, `||V^{m+1}||^2_{2,n}` together with the revisit label of the step.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm_sq_n, ols_solve, GrowingCholesky, Matrix};
use crate::stopping::{Decision, PathView, StoppingRule};

/// `||U^m||^2_{2,n}` below this counts as an exact fit.
pub const ZERO_RESIDUAL_SQ: f64 = 1e-14;

/// Relative correlation under which no predictor can reduce the residual.
const NO_CORRELATION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Componentwise L2Boosting.
    #[serde(rename = "ba")]
    Ba,
    /// Orthogonal L2Boosting: refit on all selected columns after each step.
    #[serde(rename = "oba")]
    Oba,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    /// Step shrinkage `nu` in `(0, 1]`; ignored by the orthogonal variant.
    pub shrinkage: f64,
    pub max_steps: usize,
    pub variant: Variant,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            shrinkage: 1.0,
            max_steps: 1000,
            variant: Variant::Ba,
        }
    }
}

impl BoostConfig {
    pub fn ba(max_steps: usize) -> Self {
        Self {
            max_steps,
            ..Self::default()
        }
    }

    pub fn oba(max_steps: usize) -> Self {
        Self {
            max_steps,
            variant: Variant::Oba,
            ..Self::default()
        }
    }

    pub fn with_shrinkage(mut self, nu: f64) -> Self {
        self.shrinkage = nu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "step shrinkage must lie in (0, 1], got {}",
                self.shrinkage
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Whether the selected index was already in `T^m` (true support plus
/// earlier selections).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RevisitLabel {
    R,
    N,
}

impl fmt::Display for RevisitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RevisitLabel::R => "R",
            RevisitLabel::N => "N",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostStep {
    /// Zero-based step index; this step moves the fit from `m` to `m + 1`.
    pub m: usize,
    pub selected: usize,
    /// Signed step coefficient (already multiplied by the shrinkage).
    pub gamma: f64,
    /// `||U^{m+1}||^2_{2,n}`.
    pub residual_sq: f64,
    /// `||V^{m+1}||^2_{2,n}`, only with known true coefficients.
    pub pred_sq: Option<f64>,
    pub label: RevisitLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// The stopping rule fired.
    Rule,
    MaxSteps,
    ZeroResidual,
    /// No remaining predictor is correlated with the residual.
    NoCorrelation,
    /// The next selected column is collinear with the selected ones.
    SingularGram,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Rule => "rule",
            StopReason::MaxSteps => "max_steps",
            StopReason::ZeroResidual => "zero_residual",
            StopReason::NoCorrelation => "no_correlation",
            StopReason::SingularGram => "singular_gram",
        })
    }
}

/// Full trace of a boosting run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoostPath {
    pub variant: Variant,
    pub shrinkage: f64,
    pub steps: Vec<BoostStep>,
    /// Coefficients after the last recorded step.
    pub beta: Vec<f64>,
    /// Sorted union of all selected indices.
    pub selected_set: Vec<usize>,
    pub initial_residual_sq: f64,
    pub initial_pred_sq: Option<f64>,
    /// `||y - X beta_true||^2_{2,n}` when the truth is known.
    pub noise_sq: Option<f64>,
    pub true_support: Option<Vec<usize>>,
    /// Number of steps of the model the stopping rule returns.
    pub stop_step: usize,
    pub stop_reason: StopReason,
    /// Coefficients of the returned model (`beta^{stop_step}`).
    pub stopped_beta: Vec<f64>,
    /// oBA only: coefficients on the first `k + 1` selected columns.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    refits: Vec<Vec<f64>>,
}

impl BoostPath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    /// `||U^m||^2_{2,n}` for `m = 0..=len()`.
    pub fn residual_sq_at(&self, m: usize) -> f64 {
        if m == 0 {
            self.initial_residual_sq
        } else {
            self.steps[m - 1].residual_sq
        }
    }

    pub fn residual_sq_seq(&self) -> Vec<f64> {
        (0..=self.len()).map(|m| self.residual_sq_at(m)).collect()
    }

    /// `||V^m||^2_{2,n}` for `m = 0..=len()`, when the truth is known.
    pub fn pred_sq_seq(&self) -> Option<Vec<f64>> {
        let first = self.initial_pred_sq?;
        let mut v = Vec::with_capacity(self.len() + 1);
        v.push(first);
        for s in &self.steps {
            v.push(s.pred_sq?);
        }
        Some(v)
    }

    /// Selected indices in order of selection (with repeats for BA).
    pub fn selection_order(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.selected).collect()
    }

    /// Number of distinct selected variables after each prefix, `m = 0..=len()`.
    pub fn distinct_seq(&self) -> Vec<usize> {
        let mut seen = vec![false; self.p()];
        let mut count = 0;
        let mut out = Vec::with_capacity(self.len() + 1);
        out.push(0);
        for s in &self.steps {
            if !seen[s.selected] {
                seen[s.selected] = true;
                count += 1;
            }
            out.push(count);
        }
        out
    }

    /// Sorted distinct indices selected during the first `m` steps.
    pub fn support_at(&self, m: usize) -> Vec<usize> {
        let set: BTreeSet<usize> = self.steps[..m.min(self.len())]
            .iter()
            .map(|s| s.selected)
            .collect();
        set.into_iter().collect()
    }

    /// Coefficient vector after `m` steps.
    pub fn beta_at(&self, m: usize) -> Vec<f64> {
        let m = m.min(self.len());
        let mut beta = vec![0.0; self.p()];
        match self.variant {
            Variant::Ba => {
                for s in &self.steps[..m] {
                    beta[s.selected] += s.gamma;
                }
            }
            Variant::Oba => {
                if m > 0 {
                    for (s, c) in self.steps[..m].iter().zip(&self.refits[m - 1]) {
                        beta[s.selected] = *c;
                    }
                }
            }
        }
        beta
    }

    /// Stopping-rule view of the whole path.
    pub fn with_view<R>(&self, f: impl FnOnce(&PathView<'_>) -> R) -> R {
        let res = self.residual_sq_seq();
        let pred = self.pred_sq_seq();
        let distinct = self.distinct_seq();
        let view = PathView {
            residual_sq: &res,
            pred_sq: pred.as_deref(),
            distinct: &distinct,
            variant: self.variant,
        };
        f(&view)
    }

    /// Writes one CSV row per step: `m,j,gamma,residual_sq,pred_sq,label`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "m,j,gamma,residual_sq,pred_sq,label")?;
        for s in &self.steps {
            let pred = s.pred_sq.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{}",
                s.m, s.selected, s.gamma, s.residual_sq, pred, s.label
            )?;
        }
        Ok(())
    }
}

struct Tracker {
    in_t: Vec<bool>,
    chosen: Vec<bool>,
    res_hist: Vec<f64>,
    pred_hist: Option<Vec<f64>>,
    distinct_hist: Vec<usize>,
}

impl Tracker {
    fn new(ds: &Dataset, u0: &[f64], eps: Option<&[f64]>) -> Self {
        let mut in_t = vec![false; ds.p()];
        if let Some(t) = ds.true_support() {
            for j in t {
                in_t[j] = true;
            }
        }
        Self {
            in_t,
            chosen: vec![false; ds.p()],
            res_hist: vec![norm_sq_n(u0)],
            pred_hist: eps.map(|e| vec![pred_sq(u0, e)]),
            distinct_hist: vec![0],
        }
    }

    fn view(&self, variant: Variant) -> PathView<'_> {
        PathView {
            residual_sq: &self.res_hist,
            pred_sq: self.pred_hist.as_deref(),
            distinct: &self.distinct_hist,
            variant,
        }
    }

    fn record(&mut self, j: usize, u: &[f64], eps: Option<&[f64]>) -> (RevisitLabel, f64, Option<f64>) {
        let label = if self.in_t[j] {
            RevisitLabel::R
        } else {
            RevisitLabel::N
        };
        self.in_t[j] = true;
        let d = *self.distinct_hist.last().unwrap() + usize::from(!self.chosen[j]);
        self.chosen[j] = true;
        self.distinct_hist.push(d);
        let r = norm_sq_n(u);
        self.res_hist.push(r);
        let v = eps.map(|e| pred_sq(u, e));
        if let (Some(h), Some(v)) = (self.pred_hist.as_mut(), v) {
            h.push(v);
        }
        (label, r, v)
    }
}

/// `||U - eps||^2_{2,n}`, i.e. `||V||^2` given the noise realisation.
fn pred_sq(u: &[f64], eps: &[f64]) -> f64 {
    u.iter()
        .zip(eps)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / u.len() as f64
}

fn column_sq(x: &Matrix) -> Vec<f64> {
    let n = x.rows() as f64;
    (0..x.cols()).map(|j| dot(x.col(j), x.col(j)) / n).collect()
}

/// Column maximising `|corr(u, x_j)|` among columns not in `skip`; ties go
/// to the smallest index. Returns `(j, <u, x_j>_n)`.
fn most_correlated(x: &Matrix, u: &[f64], col_sq: &[f64], skip: Option<&[bool]>) -> Option<(usize, f64)> {
    let n = x.rows() as f64;
    let mut best: Option<(usize, f64, f64)> = None;
    for j in 0..x.cols() {
        if skip.is_some_and(|s| s[j]) || col_sq[j] <= 0.0 {
            continue;
        }
        let ip = dot(u, x.col(j)) / n;
        let score = ip.abs() / col_sq[j].sqrt();
        if best.is_none_or(|(_, _, b)| score > b) {
            best = Some((j, ip, score));
        }
    }
    best.map(|(j, ip, _)| (j, ip))
}

fn check_variant(cfg: &BoostConfig, want: Variant) -> Result<()> {
    cfg.validate()?;
    if cfg.variant != want {
        return Err(Error::InvalidConfig(format!(
            "expected a {want:?} configuration, got {:?}",
            cfg.variant
        )));
    }
    Ok(())
}

fn step_cap(ds: &Dataset, cfg: &BoostConfig, stop: &StoppingRule) -> usize {
    match stop {
        // An explicit step count is honoured up to max_steps.
        StoppingRule::FixedSteps { .. } => cfg.max_steps,
        _ => cfg.max_steps.min(2 * ds.n()),
    }
}

/// One componentwise boosting step from `beta_m`.
///
/// The returned step has `m = 0`; its label is relative to the true support
/// plus the current support of `beta_m`.
pub fn ba_step(ds: &Dataset, beta_m: &[f64], nu: f64) -> Result<BoostStep> {
    if beta_m.len() != ds.p() {
        return Err(Error::LengthMismatch {
            expected: ds.p(),
            got: beta_m.len(),
        });
    }
    BoostConfig::ba(1).with_shrinkage(nu).validate()?;
    let mut u = ds.residual(beta_m);
    if norm_sq_n(&u) < ZERO_RESIDUAL_SQ {
        return Err(Error::ZeroResidual);
    }
    let col_sq = column_sq(ds.x());
    let (j, ip) = most_correlated(ds.x(), &u, &col_sq, None).ok_or(Error::ZeroResidual)?;
    let gamma = nu * ip / col_sq[j];
    axpy(-gamma, ds.x().col(j), &mut u);
    let in_t = beta_m[j] != 0.0 || ds.true_support().is_some_and(|t| t.contains(&j));
    let eps = ds.noise();
    Ok(BoostStep {
        m: 0,
        selected: j,
        gamma,
        residual_sq: norm_sq_n(&u),
        pred_sq: eps.as_deref().map(|e| pred_sq(&u, e)),
        label: if in_t { RevisitLabel::R } else { RevisitLabel::N },
    })
}

/// Componentwise L2Boosting until `stop` fires or the step cap is reached.
///
/// The cap is `min(2n, max_steps)` for data-driven rules and `max_steps`
/// for [`StoppingRule::FixedSteps`].
pub fn run_ba(ds: &Dataset, cfg: &BoostConfig, stop: &StoppingRule) -> Result<BoostPath> {
    check_variant(cfg, Variant::Ba)?;
    stop.validate()?;
    let eps = ds.noise();
    if stop.needs_truth() && eps.is_none() {
        return Err(Error::OracleUnavailable);
    }
    let x = ds.x();
    let (n, p) = (ds.n(), ds.p());
    let col_sq = column_sq(x);
    let cap = step_cap(ds, cfg, stop);

    let mut u = ds.y().to_vec();
    let mut beta = vec![0.0; p];
    let mut tracker = Tracker::new(ds, &u, eps.as_deref());
    let mut steps = Vec::new();

    let (stop_step, reason) = loop {
        let view = tracker.view(Variant::Ba);
        if let Decision::StopReturning(k) = stop.should_stop(&view, n, p)? {
            break (k, StopReason::Rule);
        }
        let m = steps.len();
        let res = tracker.res_hist[m];
        let ended = if m >= cap {
            Some(StopReason::MaxSteps)
        } else if res < ZERO_RESIDUAL_SQ {
            Some(StopReason::ZeroResidual)
        } else {
            None
        };
        if let Some(reason) = ended {
            break (stop.resolve_at_end(&view)?, reason);
        }
        let Some((j, ip)) = most_correlated(x, &u, &col_sq, None) else {
            break (stop.resolve_at_end(&view)?, StopReason::NoCorrelation);
        };
        if ip.abs() / col_sq[j].sqrt() <= NO_CORRELATION * res.sqrt() {
            break (stop.resolve_at_end(&view)?, StopReason::NoCorrelation);
        }
        let gamma = cfg.shrinkage * ip / col_sq[j];
        beta[j] += gamma;
        axpy(-gamma, x.col(j), &mut u);
        let (label, residual_sq, pred) = tracker.record(j, &u, eps.as_deref());
        steps.push(BoostStep {
            m,
            selected: j,
            gamma,
            residual_sq,
            pred_sq: pred,
            label,
        });
    };

    Ok(finish(ds, Variant::Ba, cfg.shrinkage, steps, beta, Vec::new(), tracker, stop_step, reason, eps.as_deref()))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    ds: &Dataset,
    variant: Variant,
    shrinkage: f64,
    steps: Vec<BoostStep>,
    beta: Vec<f64>,
    refits: Vec<Vec<f64>>,
    tracker: Tracker,
    stop_step: usize,
    stop_reason: StopReason,
    eps: Option<&[f64]>,
) -> BoostPath {
    let selected_set: BTreeSet<usize> = steps.iter().map(|s| s.selected).collect();
    let mut path = BoostPath {
        variant,
        shrinkage,
        steps,
        beta,
        selected_set: selected_set.into_iter().collect(),
        initial_residual_sq: tracker.res_hist[0],
        initial_pred_sq: tracker.pred_hist.as_ref().map(|h| h[0]),
        noise_sq: eps.map(norm_sq_n),
        true_support: ds.true_support(),
        stop_step,
        stop_reason,
        stopped_beta: Vec::new(),
        refits,
    };
    path.stopped_beta = path.beta_at(stop_step);
    path
}

/// Least squares on a growing, nested set of columns.
#[derive(Debug, Clone, Default)]
pub struct NestedLeastSquares {
    columns: Vec<usize>,
    chol: GrowingCholesky,
    rhs: Vec<f64>,
}

impl NestedLeastSquares {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    /// Adds column `j` of `ds`; fails with `SingularGram` if it is collinear
    /// with the columns already present (the state is left unchanged).
    pub fn push(&mut self, ds: &Dataset, j: usize) -> Result<()> {
        let x = ds.x();
        let n = ds.n() as f64;
        let xj = x.col(j);
        let cross: Vec<f64> = self.columns.iter().map(|&k| dot(xj, x.col(k)) / n).collect();
        self.chol.push(&cross, dot(xj, xj) / n)?;
        self.columns.push(j);
        self.rhs.push(dot(xj, ds.y()) / n);
        Ok(())
    }

    /// Coefficients in the order columns were added.
    pub fn coefficients(&self) -> Vec<f64> {
        self.chol.solve(&self.rhs)
    }

    /// Full-length coefficient vector with zeros off the active set.
    pub fn beta(&self, p: usize) -> Vec<f64> {
        let mut beta = vec![0.0; p];
        for (&j, c) in self.columns.iter().zip(self.coefficients()) {
            beta[j] = c;
        }
        beta
    }
}

/// Orthogonal L2Boosting: after each greedy selection the response is
/// projected on all selected columns, so no column is selected twice.
pub fn run_oba(ds: &Dataset, cfg: &BoostConfig, stop: &StoppingRule) -> Result<BoostPath> {
    check_variant(cfg, Variant::Oba)?;
    stop.validate()?;
    let eps = ds.noise();
    if stop.needs_truth() && eps.is_none() {
        return Err(Error::OracleUnavailable);
    }
    let x = ds.x();
    let (n, p) = (ds.n(), ds.p());
    let col_sq = column_sq(x);
    let cap = step_cap(ds, cfg, stop).min(n).min(p);

    let mut u = ds.y().to_vec();
    let mut ls = NestedLeastSquares::new();
    let mut refits = Vec::new();
    let mut tracker = Tracker::new(ds, &u, eps.as_deref());
    let mut steps = Vec::new();

    let (stop_step, reason) = loop {
        let view = tracker.view(Variant::Oba);
        if let Decision::StopReturning(k) = stop.should_stop(&view, n, p)? {
            break (k, StopReason::Rule);
        }
        let m = steps.len();
        let res = tracker.res_hist[m];
        let ended = if m >= cap {
            Some(StopReason::MaxSteps)
        } else if res < ZERO_RESIDUAL_SQ {
            Some(StopReason::ZeroResidual)
        } else {
            None
        };
        if let Some(reason) = ended {
            break (stop.resolve_at_end(&view)?, reason);
        }
        let Some((j, ip)) = most_correlated(x, &u, &col_sq, Some(&tracker.chosen)) else {
            break (stop.resolve_at_end(&view)?, StopReason::NoCorrelation);
        };
        if ip.abs() / col_sq[j].sqrt() <= NO_CORRELATION * res.sqrt() {
            break (stop.resolve_at_end(&view)?, StopReason::NoCorrelation);
        }
        if ls.push(ds, j).is_err() {
            break (stop.resolve_at_end(&view)?, StopReason::SingularGram);
        }
        let coefs = ls.coefficients();
        u.copy_from_slice(ds.y());
        for (&k, c) in ls.columns().iter().zip(&coefs) {
            axpy(-c, x.col(k), &mut u);
        }
        refits.push(coefs);
        let (label, residual_sq, pred) = tracker.record(j, &u, eps.as_deref());
        steps.push(BoostStep {
            m,
            selected: j,
            gamma: ip / col_sq[j],
            residual_sq,
            pred_sq: pred,
            label,
        });
    };

    let beta = ls.beta(p);
    Ok(finish(ds, Variant::Oba, 1.0, steps, beta, refits, tracker, stop_step, reason, eps.as_deref()))
}

/// Runs the variant named in `cfg`.
pub fn run(ds: &Dataset, cfg: &BoostConfig, stop: &StoppingRule) -> Result<BoostPath> {
    match cfg.variant {
        Variant::Ba => run_ba(ds, cfg, stop),
        Variant::Oba => run_oba(ds, cfg, stop),
    }
}

/// OLS on the columns in `support`, zeros elsewhere.
pub fn refit_on_support(ds: &Dataset, support: &[usize]) -> Result<Vec<f64>> {
    let mut beta = vec![0.0; ds.p()];
    if support.is_empty() {
        return Ok(beta);
    }
    let coefs = ols_solve(&ds.x().select_cols(support), ds.y())?;
    for (&j, c) in support.iter().zip(coefs) {
        beta[j] = c;
    }
    Ok(beta)
}

/// Post-L2Boosting: OLS restricted to the variables the path selected up to
/// its stopping step.
pub fn post_refit(ds: &Dataset, path: &BoostPath) -> Result<Vec<f64>> {
    refit_on_support(ds, &path.support_at(path.stop_step))
}

/// Revisit bookkeeping of a path against a given true support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevisitSummary {
    /// Label of step `m` (0-based), i.e. `A_{m+1}`.
    pub labels: Vec<RevisitLabel>,
    /// `|R(m)|` for `m = 0..=M`.
    pub r_count: Vec<usize>,
    /// `|N(m)|` for `m = 0..=M`.
    pub n_count: Vec<usize>,
    /// `q(m) = |T^m|` for `m = 0..=M`, computed as `|T| + |N(m)|`.
    pub q: Vec<usize>,
    /// Whether `q(m)` agrees with a direct count of `T^m` at every `m`.
    pub consistent: bool,
}

impl RevisitSummary {
    /// Longest run of consecutive `N` labels.
    pub fn longest_n_run(&self) -> usize {
        let mut best = 0;
        let mut cur = 0;
        for l in &self.labels {
            if *l == RevisitLabel::N {
                cur += 1;
                best = best.max(cur);
            } else {
                cur = 0;
            }
        }
        best
    }
}

pub fn revisit_analysis(path: &BoostPath, true_support: &[usize]) -> RevisitSummary {
    let t: BTreeSet<usize> = true_support.iter().copied().collect();
    let mut t_m = t.clone();
    let q0 = t.len();
    let mut labels = Vec::with_capacity(path.len());
    let mut r_count = vec![0];
    let mut n_count = vec![0];
    let mut q = vec![q0];
    let mut consistent = true;
    for s in &path.steps {
        let label = if t_m.contains(&s.selected) {
            RevisitLabel::R
        } else {
            RevisitLabel::N
        };
        t_m.insert(s.selected);
        labels.push(label);
        let (r, nn) = (*r_count.last().unwrap(), *n_count.last().unwrap());
        match label {
            RevisitLabel::R => {
                r_count.push(r + 1);
                n_count.push(nn);
            }
            RevisitLabel::N => {
                r_count.push(r);
                n_count.push(nn + 1);
            }
        }
        let qm = q0 + n_count.last().unwrap();
        consistent &= qm == t_m.len();
        q.push(qm);
    }
    RevisitSummary {
        labels,
        r_count,
        n_count,
        q,
        consistent,
    }
}

/// Noise-variance estimate `||U^{m*}||^2_{2,n}` at the stopping step.
pub fn variance_estimate(path: &BoostPath) -> f64 {
    path.residual_sq_at(path.stop_step.min(path.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{hadamard_design, random_dataset};
    use approx::assert_relative_eq;

    fn orthonormal(beta: &[f64]) -> Dataset {
        let x = hadamard_design(8, beta.len());
        let y = x.mul_vec(beta);
        Dataset::new(x, y).unwrap().with_true_beta(beta.to_vec()).unwrap()
    }

    #[test]
    fn single_column_exact_fit() {
        let x = Matrix::from_columns(&[vec![1.0, -1.0, 1.0, -1.0]]).unwrap();
        let y: Vec<f64> = x.col(0).iter().map(|v| 2.0 * v).collect();
        let ds = Dataset::new(x, y).unwrap();
        let step = ba_step(&ds, &[0.0], 1.0).unwrap();
        assert_eq!(step.selected, 0);
        assert_relative_eq!(step.gamma, 2.0, epsilon = 1e-14);
        assert!(step.residual_sq < 1e-28);
    }

    #[test]
    fn orthonormal_first_step_picks_largest_coefficient() {
        let ds = orthonormal(&[3.0, 1.0, 0.0]);
        let step = ba_step(&ds, &[0.0; 3], 1.0).unwrap();
        assert_eq!(step.selected, 0);
        assert_relative_eq!(step.gamma, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn shrunken_step_residual() {
        let ds = orthonormal(&[3.0, 1.0, 0.0]);
        assert_relative_eq!(norm_sq_n(ds.y()), 10.0, epsilon = 1e-12);
        let step = ba_step(&ds, &[0.0; 3], 0.1).unwrap();
        assert_relative_eq!(step.gamma, 0.3, epsilon = 1e-12);
        // direct recomputation: ||(3 - 0.3) x0 + x1||^2 = 2.7^2 + 1
        let direct = ds.residual_sq(&[0.3, 0.0, 0.0]);
        assert_relative_eq!(direct, 8.29, epsilon = 1e-12);
        assert_relative_eq!(step.residual_sq, 8.29, epsilon = 1e-12);
    }

    #[test]
    fn zero_residual_step_is_an_error() {
        let ds = orthonormal(&[1.0, 0.0, 0.0]);
        assert!(matches!(
            ba_step(&ds, &[1.0, 0.0, 0.0], 1.0),
            Err(Error::ZeroResidual)
        ));
    }

    #[test]
    fn zero_max_steps_rejected() {
        let ds = orthonormal(&[1.0, 0.0, 0.0]);
        let cfg = BoostConfig::ba(0);
        assert!(matches!(
            run_ba(&ds, &cfg, &StoppingRule::FixedSteps { steps: 3 }),
            Err(Error::InvalidConfig(_))
        ));
        assert!(BoostConfig::ba(1).with_shrinkage(0.0).validate().is_err());
        assert!(BoostConfig::ba(1).with_shrinkage(1.5).validate().is_err());
    }

    #[test]
    fn noiseless_orthonormal_run_uses_s_steps() {
        let ds = orthonormal(&[2.0, 0.0, -1.5, 0.5, 0.0]);
        let path = run_ba(&ds, &BoostConfig::ba(50), &StoppingRule::FixedSteps { steps: 50 }).unwrap();
        assert_eq!(path.len(), 3);
        assert_eq!(path.stop_reason, StopReason::ZeroResidual);
        assert!(path.steps.iter().all(|s| s.label == RevisitLabel::R));
        assert!(path.steps.last().unwrap().residual_sq < ZERO_RESIDUAL_SQ);
        assert_eq!(path.selection_order(), vec![0, 2, 3]);
    }

    #[test]
    fn oba_matches_ba_on_orthonormal_design() {
        let ds = orthonormal(&[2.0, 0.0, -1.5, 0.5, 0.0]);
        let stop = StoppingRule::FixedSteps { steps: 50 };
        let ba = run_ba(&ds, &BoostConfig::ba(50), &stop).unwrap();
        let oba = run_oba(&ds, &BoostConfig::oba(50), &stop).unwrap();
        assert_eq!(ba.selection_order(), oba.selection_order());
        assert!(oba.steps.last().unwrap().residual_sq < ZERO_RESIDUAL_SQ);
    }

    #[test]
    fn oba_orthogonal_response_gives_empty_path() {
        let x = hadamard_design(8, 3);
        let y = hadamard_design(8, 7).col(5).to_vec();
        let ds = Dataset::new(x, y).unwrap();
        let path = run_oba(&ds, &BoostConfig::oba(10), &StoppingRule::FixedSteps { steps: 10 }).unwrap();
        assert!(path.is_empty());
        assert_eq!(path.stop_reason, StopReason::NoCorrelation);
    }

    #[test]
    fn oba_two_correlated_columns() {
        // brute force over the two candidates: y = x1 has |corr| 1 with column 0
        let raw = Matrix::from_columns(&[
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            vec![1.0, 3.0, 2.0, 5.0, 4.0, 6.0],
        ])
        .unwrap();
        let ds0 = Dataset::standardize(&raw, &[0.0; 6], false).unwrap();
        let y = ds0.x().col(0).to_vec();
        let ds = Dataset::new(ds0.x().clone(), y.clone()).unwrap();
        let n = 6.0;
        let corr: Vec<f64> = (0..2).map(|j| dot(&y, ds.x().col(j)).abs() / n).collect();
        assert!(corr[0] > corr[1]);
        let path = run_oba(&ds, &BoostConfig::oba(10), &StoppingRule::FixedSteps { steps: 10 }).unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(path.steps[0].selected, 0);
        assert!(path.steps[0].residual_sq < ZERO_RESIDUAL_SQ);
    }

    #[test]
    fn post_refit_cases() {
        let ds = random_dataset(60, 8, &[1.5, -2.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0], 0.0, 11);
        let path = run_ba(&ds, &BoostConfig::ba(40), &StoppingRule::FixedSteps { steps: 40 }).unwrap();
        let truth = ds.true_beta().unwrap().to_vec();
        let support = path.support_at(path.stop_step);
        assert!([0, 1, 3].iter().all(|j| support.contains(j)));
        let refit = post_refit(&ds, &path).unwrap();
        for (a, b) in refit.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-8);
        }

        let empty = run_ba(&ds, &BoostConfig::ba(5), &StoppingRule::FixedSteps { steps: 0 }).unwrap();
        assert_eq!(post_refit(&ds, &empty).unwrap(), vec![0.0; 8]);

        let noisy = random_dataset(60, 4, &[1.0, 0.5, 0.0, -0.5], 1.0, 12);
        let path = run_ba(&noisy, &BoostConfig::ba(500), &StoppingRule::FixedSteps { steps: 500 }).unwrap();
        assert_eq!(path.selected_set, vec![0, 1, 2, 3]);
        let ols = ols_solve(noisy.x(), noisy.y()).unwrap();
        for (a, b) in post_refit(&noisy, &path).unwrap().iter().zip(&ols) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn revisit_summary_counts() {
        let ds = orthonormal(&[1.0, 0.5, 0.25, 0.0]);
        let path = run_ba(&ds, &BoostConfig::ba(10), &StoppingRule::FixedSteps { steps: 10 }).unwrap();
        let summary = revisit_analysis(&path, &[0, 1, 2]);
        assert!(summary.consistent);
        for m in 0..=path.len() {
            assert_eq!(summary.r_count[m], m);
        }

        // empty true support: every fresh index is N
        let fresh = revisit_analysis(&path, &[]);
        for m in 0..=path.len() {
            assert_eq!(fresh.n_count[m], m);
        }
        assert!(fresh.q.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1));
    }

    #[test]
    fn variance_estimate_cases() {
        let ds = orthonormal(&[1.0, 0.5, 0.0]);
        let path = run_ba(&ds, &BoostConfig::ba(10), &StoppingRule::FixedSteps { steps: 10 }).unwrap();
        assert!(variance_estimate(&path) < ZERO_RESIDUAL_SQ);
        let none = run_ba(&ds, &BoostConfig::ba(10), &StoppingRule::FixedSteps { steps: 0 }).unwrap();
        assert_relative_eq!(variance_estimate(&none), norm_sq_n(ds.y()), epsilon = 1e-15);
    }

    #[test]
    fn csv_export_shape() {
        let ds = orthonormal(&[1.0, 0.5, 0.0]);
        let path = run_ba(&ds, &BoostConfig::ba(10), &StoppingRule::FixedSteps { steps: 10 }).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "m,j,gamma,residual_sq,pred_sq,label");
        assert_eq!(lines.len(), path.len() + 1);
        assert!(lines[1].starts_with("0,0,1,"));
        assert!(lines[1].ends_with(",R"));
    }
}
