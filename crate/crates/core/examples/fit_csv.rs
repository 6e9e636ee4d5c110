// Fit boosting to a CSV file with a held-out test split and inspect the
// written artifacts and manifest.

use std::io::Write;

use l2boost::app::{fit, lasso_config, FitMethod, FitOptions};
use l2boost::lasso::PenaltyMode;
use l2boost::{Result, RngStream, StoppingRule};

fn run_example() -> Result<()> {
    let dir = std::env::temp_dir().join(format!("l2boost-fit-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| l2boost::Error::Io { path: dir.clone(), source: e })?;
    let input = dir.join("data.csv");

    let mut rng = RngStream::new(4, 0).rng();
    let mut csv = String::from("x1,x2,x3,x4,x5,y\n");
    for _ in 0..150 {
        let x: Vec<f64> = rng.normals(5);
        let y = 10.0 + 3.0 * x[0] - 2.0 * x[2] + rng.standard_normal();
        let cells: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
        csv.push_str(&format!("{},{y:.6}\n", cells.join(",")));
    }
    std::fs::File::create(&input)
        .and_then(|mut f| f.write_all(csv.as_bytes()))
        .map_err(|e| l2boost::Error::Io { path: input.clone(), source: e })?;

    for method in [FitMethod::Ba, FitMethod::PostBa, FitMethod::PostLasso] {
        let report = fit(&FitOptions {
            input: input.clone(),
            response: "y".into(),
            method,
            stop: StoppingRule::default(),
            shrinkage: 1.0,
            max_steps: 300,
            lasso: lasso_config(PenaltyMode::PlugIn, 0.05, 10),
            test_frac: 0.2,
            seed: 1,
            out_dir: dir.join(format!("{method:?}")),
        })?;
        let coefs: Vec<String> = report.coefficients.iter().map(|(n, b)| format!("{n}={b:.3}")).collect();
        println!(
            "{method:?}: intercept {:.3}, {}, test mse {:.4}, {} outputs",
            report.intercept,
            coefs.join(" "),
            report.test_mse.unwrap_or(f64::NAN),
            report.manifest.outputs.len()
        );
    }
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
