//! Ready-made experiment grids.
//!
//! Each grid crosses `n in {100, 200, 400}` with `p in {100, 200}` at
//! `s = 10`, unit noise and 50 holdout rows. Names are
//! `<beta>-<x>-<methods>` with beta `sparse|poly`, x `iid|toeplitz` and
//! methods `boosting|lasso|all`. The numbered aliases `table3` ... `table10`
//! walk through sparse/poly x iid/toeplitz, boosting before lasso.

use crate::error::{Error, Result};
use crate::lasso::{LassoConfig, PenaltyMode};
use crate::sim::dgp::{BetaDesign, DgpSpec, XDesign};
use crate::sim::experiment::{Estimator, ExperimentSpec, MethodSpec};
use crate::stopping::StoppingRule;

pub const DEFAULT_REPETITIONS: usize = 500;

/// The six `(n, p)` settings for one coefficient and design choice.
pub fn grid(beta: BetaDesign, x: XDesign) -> Vec<DgpSpec> {
    let mut out = Vec::new();
    for n in [100, 200, 400] {
        for p in [100, 200] {
            let base = DgpSpec::sparse(n, p, 10, x);
            out.push(DgpSpec { beta_design: beta, ..base });
        }
    }
    out
}

/// BA, post-BA and oBA, each with the oracle, `K s` (K = 2) and
/// variance-ratio rules.
pub fn boosting_methods() -> Vec<MethodSpec> {
    let rules = [
        StoppingRule::Oracle,
        StoppingRule::Ks { k: 2, s: 0 },
        StoppingRule::default(),
    ];
    [Estimator::Ba, Estimator::PostBa, Estimator::Oba]
        .into_iter()
        .flat_map(|e| rules.iter().map(move |r| MethodSpec::boosting(e, r.clone())))
        .collect()
}

/// LASSO and post-LASSO with plug-in and cross-validated penalties.
pub fn lasso_methods() -> Vec<MethodSpec> {
    vec![
        MethodSpec::lasso(Estimator::Lasso, PenaltyMode::PlugIn),
        MethodSpec::lasso(Estimator::PostLasso, PenaltyMode::PlugIn),
        MethodSpec::lasso(Estimator::Lasso, PenaltyMode::CrossValidation),
        MethodSpec::lasso(Estimator::PostLasso, PenaltyMode::CrossValidation),
    ]
}

pub fn preset_names() -> Vec<String> {
    let mut v = Vec::new();
    for b in ["sparse", "poly"] {
        for x in ["iid", "toeplitz"] {
            for m in ["boosting", "lasso", "all"] {
                v.push(format!("{b}-{x}-{m}"));
            }
        }
    }
    v.extend((3..=10).map(|i| format!("table{i}")));
    v
}

fn canonical(name: &str) -> Option<&'static str> {
    Some(match name {
        "table3" => "sparse-iid-boosting",
        "table4" => "sparse-iid-lasso",
        "table5" => "sparse-toeplitz-boosting",
        "table6" => "sparse-toeplitz-lasso",
        "table7" => "poly-iid-boosting",
        "table8" => "poly-iid-lasso",
        "table9" => "poly-toeplitz-boosting",
        "table10" => "poly-toeplitz-lasso",
        _ => return None,
    })
}

/// Experiment for a preset name with the given repetitions and seed.
pub fn preset(name: &str, repetitions: usize, master_seed: u64) -> Result<ExperimentSpec> {
    let full = canonical(name).unwrap_or(name);
    let parts: Vec<&str> = full.split('-').collect();
    let unknown = || Error::InvalidConfig(format!("unknown preset `{name}`; known: {}", preset_names().join(", ")));
    if parts.len() != 3 {
        return Err(unknown());
    }
    let beta = match parts[0] {
        "sparse" => BetaDesign::Sparse,
        "poly" => BetaDesign::Polynomial,
        _ => return Err(unknown()),
    };
    let x = match parts[1] {
        "iid" => XDesign::Iid,
        "toeplitz" => XDesign::Toeplitz,
        _ => return Err(unknown()),
    };
    let methods = match parts[2] {
        "boosting" => boosting_methods(),
        "lasso" => lasso_methods(),
        "all" => boosting_methods().into_iter().chain(lasso_methods()).collect(),
        _ => return Err(unknown()),
    };
    Ok(ExperimentSpec {
        dgps: grid(beta, x),
        methods,
        repetitions,
        master_seed,
        lasso: LassoConfig::default(),
        max_steps: 1000,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alias_and_name_agree() {
        assert_eq!(preset("table3", 5, 1).unwrap(), preset("sparse-iid-boosting", 5, 1).unwrap());
        let spec = preset("table3", 5, 1).unwrap();
        assert_eq!(spec.dgps.len(), 6);
        assert_eq!(spec.methods.len(), 9);
        assert!(preset("table11", 5, 1).is_err());
        for name in preset_names() {
            preset(&name, 1, 0).unwrap().validate().unwrap();
        }
    }
}
