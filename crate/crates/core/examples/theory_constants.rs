// Convergence-rate constants over a grid of restricted-eigenvalue gaps,
// plus the noise level at which the analysis is calibrated.

use l2boost::theory::constants::{default_grid, theory_grid};
use l2boost::theory::lambda_n;
use l2boost::Result;

fn run_example() -> Result<()> {
    println!("{:>5} {:>8} {:>8} {:>8} {:>10}", "c", "mu_a", "mu_e", "zeta*", "lambda*");
    for k in theory_grid(&default_grid())? {
        println!(
            "{:>5.2} {:>8.4} {:>8.4} {:>8.4} {:>10.3}",
            k.c, k.mu_a, k.mu_e, k.zeta_star, k.lambda_star
        );
    }
    println!("lambda_n(sigma=1, p=100, n=100, alpha=0.05) = {:.6}", lambda_n(1.0, 100, 100, 0.05)?);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
