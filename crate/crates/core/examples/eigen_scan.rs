// Smallest and largest restricted eigenvalues of a correlated design.

use l2boost::sim::dgp::{generate, DgpSpec, XDesign};
use l2boost::theory::{restricted_eigen_scan, EigenScanConfig};
use l2boost::{Result, RngStream};

fn run_example() -> Result<()> {
    let spec = DgpSpec::sparse(100, 30, 5, XDesign::Toeplitz);
    let data = generate(&spec, RngStream::new(1, 0))?;
    let report = restricted_eigen_scan(
        data.train.x(),
        &EigenScanConfig {
            s_max: 4,
            budget: 5000,
            seed: 1,
        },
    )?;
    print!("{}", report.to_csv());
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
