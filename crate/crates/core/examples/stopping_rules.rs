// One recorded path, four stopping rules.

use l2boost::boost::{run, BoostConfig};
use l2boost::synthetic::gaussian_dataset;
use l2boost::{Result, RngStream, StoppingRule};

fn run_example() -> Result<()> {
    let (n, p) = (200, 100);
    let mut beta = vec![0.0; p];
    beta[..5].fill(1.0);
    let ds = gaussian_dataset(n, &beta, 1.0, RngStream::new(11, 0))?;
    let path = run(&ds, &BoostConfig::ba(400), &StoppingRule::FixedSteps { steps: 400 })?;

    let rules = [
        StoppingRule::ratio(4.5),
        StoppingRule::ratio(2.0),
        StoppingRule::Ks { k: 2, s: 5 },
        StoppingRule::Oracle,
        StoppingRule::FixedSteps { steps: 30 },
    ];
    for rule in &rules {
        let m = path.with_view(|v| rule.select_on_path(v, n, p))?;
        let err = ds.residual_sq(&path.beta_at(m));
        println!("{:<55} step {m:>3}  in-sample mse {err:.4}", format!("{rule:?}"));
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
