// Boosting followed by least squares on the selected variables, for two
// constants of the variance-ratio rule.

use l2boost::boost::{post_refit, run, BoostConfig};
use l2boost::sim::dgp::{generate, mse_out, DgpSpec, XDesign};
use l2boost::{Result, RngStream, StoppingRule};

fn run_example() -> Result<()> {
    let spec = DgpSpec::sparse(200, 100, 10, XDesign::Iid);
    let data = generate(&spec, RngStream::new(3, 0))?;
    for c in [4.5, 2.0] {
        let path = run(&data.train, &BoostConfig::ba(400), &StoppingRule::ratio(c))?;
        let post = post_refit(&data.train, &path)?;
        println!(
            "C = {c}: stop at {:>3} with {:>2} variables, BA mse {:.4}, p-BA mse {:.4}",
            path.stop_step,
            path.support_at(path.stop_step).len(),
            mse_out(&path.stopped_beta, &data.holdout)?,
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
