// In-sample and holdout error as boosting proceeds, with references.

use l2boost::sim::curve::{step_curve, CurveMethod, CurveSpec};
use l2boost::sim::dgp::DgpSpec;
use l2boost::Result;

fn run_example() -> Result<()> {
    let spec = CurveSpec {
        dgp: DgpSpec::illustrative(20),
        method: CurveMethod::Ba,
        repetitions: 50,
        max_steps: 60,
        master_seed: 9,
        ratio_constant: 4.5,
        lasso: Default::default(),
    };
    let t = step_curve(&spec)?;
    for row in t.rows.iter().step_by(5) {
        println!("m {:>3}  in {:.3}  out {:.3}", row.m, row.mse_in, row.mse_out);
    }
    println!("best step {} (mse {:.3})", t.argmin(), t.min_mse_out());
    println!("ratio rule stops at {:.1} on average (mse {:.3})", t.ratio_stop_mean, t.ratio_stop_mse);
    if let Some(o) = t.ols_ref {
        println!("OLS {o:.3}");
    }
    println!("LASSO {:.3}", t.lasso_ref);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
