// Componentwise boosting and its orthogonal variant on a sparse Gaussian
// design, printing the first selections and the residual decay.

use l2boost::boost::{revisit_analysis, run, BoostConfig};
use l2boost::synthetic::gaussian_dataset;
use l2boost::{Result, RngStream, StoppingRule};

fn run_example() -> Result<()> {
    let mut beta = vec![0.0; 40];
    beta[..4].copy_from_slice(&[3.0, -2.0, 1.5, 1.0]);
    let ds = gaussian_dataset(120, &beta, 1.0, RngStream::new(7, 0))?;

    for cfg in [BoostConfig::ba(60), BoostConfig::oba(60)] {
        let path = run(&ds, &cfg, &StoppingRule::FixedSteps { steps: 12 })?;
        println!("{:?}: {} steps", cfg.variant, path.len());
        println!("  order    {:?}", path.selection_order());
        let rss: Vec<String> = path.residual_sq_seq().iter().map(|v| format!("{v:.3}")).collect();
        println!("  ||U||^2  {}", rss.join(" "));
        let rev = revisit_analysis(&path, &ds.true_support().unwrap_or_default());
        println!("  |R| {}, |N| {}, longest N run {}", rev.r_count.last().unwrap_or(&0), rev.n_count.last().unwrap_or(&0), rev.longest_n_run());
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
