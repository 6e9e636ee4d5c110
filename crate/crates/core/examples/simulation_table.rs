// A small Monte-Carlo comparison of boosting and LASSO variants.

use l2boost::sim::experiment::{run_experiment, ExperimentSpec};
use l2boost::sim::presets::{boosting_methods, lasso_methods};
use l2boost::sim::dgp::{DgpSpec, XDesign};
use l2boost::lasso::LassoConfig;
use l2boost::Result;

fn run_example() -> Result<()> {
    let mut methods = boosting_methods();
    methods.extend(lasso_methods());
    let spec = ExperimentSpec {
        dgps: vec![DgpSpec::sparse(100, 100, 5, XDesign::Iid)],
        methods,
        repetitions: 10,
        master_seed: 2024,
        lasso: LassoConfig {
            folds: 5,
            grid_size: 20,
            ..LassoConfig::default()
        },
        max_steps: 300,
    };
    let table = run_experiment(&spec, 0)?;
    for row in &table.rows {
        println!(
            "{:<12} mse {:.4} (se {:.4})  stop {:>6}  support {:>5.1}",
            row.method, row.mse_mean, row.mse_std_error, row.mean_stop_step.map_or("-".into(), |m| format!("{m:.1}")),
            row.mean_support_size
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
