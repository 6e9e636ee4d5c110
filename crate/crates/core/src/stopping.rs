//! Early-stopping rules for boosting paths.
//!
//! Every rule looks only at the prefix of a path, so applying a rule to a
//! long recorded path gives the same answer as running with the rule online
//! (up to the common step cap).

use serde::{Deserialize, Serialize};

use crate::boost::Variant;
use crate::error::{Error, Result};

/// Default constant for the variance-ratio rule (must exceed 4 in theory mode).
pub const DEFAULT_RATIO_CONSTANT: f64 = 4.5;

/// Strategy deciding when a boosting run halts and which step's model it
/// returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoppingRule {
    /// Stop at the first step `m` with `||U^m||^2 / ||U^{m-1}||^2 > 1 - c log(p) / n`
    /// and return the model of step `m - 1`.
    VarianceRatio {
        constant: f64,
        /// Enforce `constant > 4`.
        #[serde(default)]
        theory_mode: bool,
    },
    /// Stop once `k * s` selections were made (steps for BA, distinct
    /// variables for oBA).
    Ks { k: usize, s: usize },
    /// Return the step minimising the true in-sample prediction error.
    Oracle,
    FixedSteps { steps: usize },
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self::VarianceRatio {
            constant: DEFAULT_RATIO_CONSTANT,
            theory_mode: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Continue,
    /// Halt and return the model after `model_step` steps.
    StopReturning(usize),
}

/// What a stopping rule may inspect about a (partial) path.
#[derive(Debug, Clone, Copy)]
pub struct PathView<'a> {
    /// `||U^m||^2_{2,n}` for `m = 0..=M`.
    pub residual_sq: &'a [f64],
    /// `||V^m||^2_{2,n}` for `m = 0..=M`, when the truth is known.
    pub pred_sq: Option<&'a [f64]>,
    /// Distinct variables selected in each prefix, `m = 0..=M`.
    pub distinct: &'a [usize],
    pub variant: Variant,
}

impl PathView<'_> {
    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.residual_sq.len().saturating_sub(1)
    }
}

impl StoppingRule {
    pub fn ratio(constant: f64) -> Self {
        Self::VarianceRatio {
            constant,
            theory_mode: false,
        }
    }

    pub fn ratio_theory(constant: f64) -> Result<Self> {
        let rule = Self::VarianceRatio {
            constant,
            theory_mode: true,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::VarianceRatio {
                constant,
                theory_mode,
            } => {
                if !(constant.is_finite() && constant > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "variance-ratio constant must be finite and positive, got {constant}"
                    )));
                }
                if theory_mode && constant <= 4.0 {
                    return Err(Error::InvalidConfig(format!(
                        "theory mode requires c_u > 4, got {constant}"
                    )));
                }
            }
            Self::Ks { k, s } => {
                if k == 0 || s == 0 {
                    return Err(Error::InvalidConfig("Ks rule needs K >= 1 and s >= 1".into()));
                }
            }
            Self::Oracle | Self::FixedSteps { .. } => {}
        }
        Ok(())
    }

    pub fn needs_truth(&self) -> bool {
        matches!(self, Self::Oracle)
    }

    /// Short label used in tables ("our", "Ks", "oracle", "fixed").
    pub fn label(&self) -> &'static str {
        match self {
            Self::VarianceRatio { .. } => "our",
            Self::Ks { .. } => "Ks",
            Self::Oracle => "oracle",
            Self::FixedSteps { .. } => "fixed",
        }
    }

    /// Online decision after the latest step of `path`.
    pub fn should_stop(&self, path: &PathView<'_>, n: usize, p: usize) -> Result<Decision> {
        let m = path.steps();
        match *self {
            Self::VarianceRatio { constant, .. } => {
                let threshold = ratio_threshold(constant, n, p)?;
                if m >= 1 && ratio_exceeds(path.residual_sq[m - 1], path.residual_sq[m], threshold)
                {
                    return Ok(Decision::StopReturning(m - 1));
                }
                Ok(Decision::Continue)
            }
            Self::Ks { k, s } => {
                let count = match path.variant {
                    Variant::Ba => m,
                    Variant::Oba => path.distinct[m],
                };
                if count >= k * s {
                    Ok(Decision::StopReturning(m))
                } else {
                    Ok(Decision::Continue)
                }
            }
            Self::Oracle => {
                if path.pred_sq.is_none() {
                    return Err(Error::OracleUnavailable);
                }
                Ok(Decision::Continue)
            }
            Self::FixedSteps { steps } => {
                if m >= steps {
                    Ok(Decision::StopReturning(steps))
                } else {
                    Ok(Decision::Continue)
                }
            }
        }
    }

    /// Model step returned when the path ended without the rule firing
    /// (step cap, exact fit, ...).
    pub fn resolve_at_end(&self, path: &PathView<'_>) -> Result<usize> {
        match self {
            Self::Oracle => {
                let pred = path.pred_sq.ok_or(Error::OracleUnavailable)?;
                Ok(oracle_step(pred))
            }
            _ => Ok(path.steps()),
        }
    }

    /// Applies the rule to a completed path, as if it had been run online.
    pub fn select_on_path(&self, path: &PathView<'_>, n: usize, p: usize) -> Result<usize> {
        let total = path.steps();
        if let Self::Oracle = self {
            return self.resolve_at_end(path);
        }
        for m in 0..=total {
            let prefix = PathView {
                residual_sq: &path.residual_sq[..=m],
                pred_sq: path.pred_sq.map(|v| &v[..=m]),
                distinct: &path.distinct[..=m],
                variant: path.variant,
            };
            if let Decision::StopReturning(k) = self.should_stop(&prefix, n, p)? {
                return Ok(k);
            }
        }
        self.resolve_at_end(path)
    }
}

/// `1 - c log(p) / n`.
pub fn ratio_threshold(constant: f64, n: usize, p: usize) -> Result<f64> {
    let t = 1.0 - constant * (p as f64).ln() / n as f64;
    if !(t > 0.0) {
        return Err(Error::InvalidThreshold(t));
    }
    Ok(t)
}

fn ratio_exceeds(prev: f64, cur: f64, threshold: f64) -> bool {
    if prev <= 0.0 {
        return true;
    }
    cur / prev > threshold
}

/// Index of the smallest value; earliest index on ties.
pub fn oracle_step(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Infeasible theory rule: first `m` with `||V^m|| <= eta sqrt(m+s) lambda_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VBoundRule {
    pub eta: f64,
    pub lambda_n: f64,
    pub s: usize,
}

impl VBoundRule {
    /// Checks `eta > 3 / sqrt(1 - c)`, the floor under which `||V^m||` is not
    /// guaranteed to decrease.
    pub fn new(eta: f64, lambda_n: f64, s: usize, c: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&c) {
            return Err(Error::Domain(format!("c must lie in [0, 1), got {c}")));
        }
        let floor = 3.0 / (1.0 - c).sqrt();
        if !(eta > floor) {
            return Err(Error::InvalidConfig(format!(
                "eta must exceed 3/sqrt(1-c) = {floor}, got {eta}"
            )));
        }
        if !(lambda_n >= 0.0) {
            return Err(Error::Domain(format!("lambda_n must be >= 0, got {lambda_n}")));
        }
        Ok(Self { eta, lambda_n, s })
    }

    /// Default `eta = 2 * 3 / sqrt(1 - c)`.
    pub fn with_default_eta(lambda_n: f64, s: usize, c: f64) -> Result<Self> {
        Self::new(6.0 / (1.0 - c).sqrt(), lambda_n, s, c)
    }

    /// First step at which the bound is met, given `||V^m||_{2,n}` for `m = 0..`.
    pub fn first_hit(&self, pred_norm: &[f64]) -> Option<usize> {
        pred_norm
            .iter()
            .enumerate()
            .find(|(m, v)| **v <= self.eta * ((m + self.s) as f64).sqrt() * self.lambda_n)
            .map(|(m, _)| m)
    }
}

/// Applies the infeasible `||V^m||` rule to a path with known truth.
pub fn theory_stop_vbound(path: &PathView<'_>, rule: &VBoundRule) -> Result<Decision> {
    let pred = path.pred_sq.ok_or(Error::OracleUnavailable)?;
    let norms: Vec<f64> = pred.iter().map(|v| v.max(0.0).sqrt()).collect();
    Ok(match rule.first_hit(&norms) {
        Some(m) => Decision::StopReturning(m),
        None => Decision::Continue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view<'a>(res: &'a [f64], pred: Option<&'a [f64]>, distinct: &'a [usize]) -> PathView<'a> {
        PathView {
            residual_sq: res,
            pred_sq: pred,
            distinct,
            variant: Variant::Ba,
        }
    }

    #[test]
    fn ratio_rule_example() {
        // c chosen so that 1 - c log(p)/n = 0.9
        let (n, p) = (10usize, 100usize);
        let c = 0.1 * n as f64 / (p as f64).ln();
        assert!((ratio_threshold(c, n, p).unwrap() - 0.9).abs() < 1e-12);
        let rule = StoppingRule::ratio(c);
        let res = [1.0, 0.5, 0.49];
        let distinct = [0, 1, 2];
        let v1 = view(&res[..2], None, &distinct[..2]);
        assert_eq!(rule.should_stop(&v1, n, p).unwrap(), Decision::Continue);
        let v = view(&res, None, &distinct);
        assert_eq!(
            rule.should_stop(&v, n, p).unwrap(),
            Decision::StopReturning(1)
        );
        assert_eq!(rule.select_on_path(&v, n, p).unwrap(), 1);
    }

    #[test]
    fn ks_rule_example() {
        let res: Vec<f64> = (0..=25).map(|m| 1.0 / (m + 1) as f64).collect();
        let distinct: Vec<usize> = (0..=25).collect();
        let rule = StoppingRule::Ks { k: 2, s: 10 };
        assert_eq!(
            rule.select_on_path(&view(&res, None, &distinct), 100, 100)
                .unwrap(),
            20
        );
    }

    #[test]
    fn oracle_example() {
        let pred = [4.0, 1.0, 0.5, 0.7, 0.9];
        let res = [5.0, 2.0, 1.5, 1.4, 1.3];
        let distinct = [0, 1, 2, 3, 4];
        let v = view(&res, Some(&pred), &distinct);
        assert_eq!(StoppingRule::Oracle.select_on_path(&v, 10, 10).unwrap(), 2);
        assert_eq!(oracle_step(&pred), 2);
    }

    #[test]
    fn oracle_without_truth_fails() {
        let res = [1.0, 0.5];
        let distinct = [0, 1];
        assert!(matches!(
            StoppingRule::Oracle.should_stop(&view(&res, None, &distinct), 10, 10),
            Err(Error::OracleUnavailable)
        ));
    }

    #[test]
    fn invalid_threshold() {
        assert!(matches!(
            ratio_threshold(4.5, 10, 100),
            Err(Error::InvalidThreshold(_))
        ));
    }

    #[test]
    fn theory_mode_requires_cu_above_four() {
        assert!(StoppingRule::ratio_theory(4.0).is_err());
        assert!(StoppingRule::ratio_theory(4.5).is_ok());
        assert!(StoppingRule::ratio(1.0).validate().is_ok());
    }

    #[test]
    fn vbound_examples() {
        // thresholds eta sqrt(m+s) lambda_n = 0.35 sqrt(m+2) ~ (0.49, 0.61, 0.7)
        let rule = VBoundRule {
            eta: 0.35,
            lambda_n: 1.0,
            s: 2,
        };
        assert_eq!(rule.first_hit(&[3.0, 1.0, 0.1]), Some(2));

        let noiseless = VBoundRule {
            eta: 10.0,
            lambda_n: 0.0,
            s: 3,
        };
        assert_eq!(noiseless.first_hit(&[1.0, 1e-9, 0.0]), Some(2));
        assert_eq!(noiseless.first_hit(&[1.0, 1e-9]), None);

        assert!(VBoundRule::new(2.9, 0.1, 3, 0.0).is_err());
        assert!(VBoundRule::new(3.1, 0.1, 3, 0.0).is_ok());
        assert!(VBoundRule::new(3.1, 0.1, 3, 0.2).is_err());
        let d = VBoundRule::with_default_eta(0.1, 3, 0.36).unwrap();
        assert!((d.eta - 7.5).abs() < 1e-12);
    }
}
