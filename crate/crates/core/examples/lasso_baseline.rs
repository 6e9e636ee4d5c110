// Plug-in and cross-validated LASSO with their least-squares refits.

use l2boost::lasso::{fit_with_penalty, kkt_violation, post_lasso, LassoConfig, PenaltyMode};
use l2boost::sim::dgp::{generate, mse_out, DgpSpec, XDesign};
use l2boost::{Result, RngStream};

fn run_example() -> Result<()> {
    let spec = DgpSpec::sparse(100, 200, 10, XDesign::Iid);
    let data = generate(&spec, RngStream::new(5, 0))?;
    for penalty in [PenaltyMode::PlugIn, PenaltyMode::CrossValidation] {
        let cfg = LassoConfig {
            penalty,
            folds: 5,
            grid_size: 30,
            ..LassoConfig::default()
        };
        let fit = fit_with_penalty(&data.train, &cfg, RngStream::new(5, 1))?;
        let post = post_lasso(&data.train, &fit.beta)?;
        let active = fit.beta.iter().filter(|b| **b != 0.0).count();
        println!(
            "{penalty:?}: lambda {:.4}, {active} active, kkt {:.1e}, mse {:.4}, post mse {:.4}",
            fit.lambda,
            kkt_violation(&data.train, &fit.beta, fit.lambda),
            mse_out(&fit.beta, &data.holdout)?,
            mse_out(&post, &data.holdout)?
        );
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
