// Noise-free boosting on a small design, checked step by step against the
// deterministic bounds.

use l2boost::synthetic::gaussian_dataset;
use l2boost::theory::{check_bounds, restricted_eigen_scan, run_pga, BoundConfig, EigenScanConfig};
use l2boost::{Result, RngStream};

fn run_example() -> Result<()> {
    let beta = [2.0, -1.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let x = gaussian_dataset(60, &[0.0; 10], 0.0, RngStream::new(21, 0))?.x().clone();
    let path = run_pga(&beta, &x, 25)?;
    let scan = restricted_eigen_scan(&x, &EigenScanConfig { s_max: 10, budget: 5000, seed: 0 })?;
    println!("c(s) = {:?}", scan.c);
    for r in check_bounds(&path, &scan, &BoundConfig::default())? {
        let slack = r.min_slack().map_or("-".into(), |v| format!("{v:.3e}"));
        println!("{:<18} violated={:<5} min slack {slack} {}", r.name, r.violated, r.note);
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
