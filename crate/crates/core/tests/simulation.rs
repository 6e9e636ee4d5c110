use l2boost::boost::{run, variance_estimate, BoostConfig};
use l2boost::sim::dgp::{generate, DgpSpec, XDesign};
use l2boost::sim::experiment::{run_experiment, Estimator, ExperimentSpec, MethodSpec};
use l2boost::{RngStream, StoppingRule};

#[test]
fn residual_variance_at_ratio_stop_is_consistent() {
    let spec = DgpSpec::sparse(400, 100, 10, XDesign::Iid);
    let reps = 200;
    let inside = (0..reps)
        .filter(|&r| {
            let data = generate(&spec, RngStream::new(77, r as u64)).unwrap();
            let path = run(&data.train, &BoostConfig::ba(800), &StoppingRule::default()).unwrap();
            let v = variance_estimate(&path);
            v > 0.8 && v < 1.25
        })
        .count();
    println!("variance estimate inside (0.8, 1.25) in {inside} of {reps} repetitions");
    assert!(inside as f64 >= 0.95 * reps as f64);
}

fn ks_experiment(reps: usize) -> ExperimentSpec {
    ExperimentSpec {
        dgps: vec![DgpSpec::sparse(60, 30, 3, XDesign::Iid)],
        methods: vec![MethodSpec::boosting(Estimator::Ba, StoppingRule::Ks { k: 2, s: 0 })],
        repetitions: reps,
        master_seed: 31,
        lasso: Default::default(),
        max_steps: 200,
    }
}

#[test]
fn standard_error_shrinks_like_inverse_root_r() {
    let se = |reps| run_experiment(&ks_experiment(reps), 0).unwrap().rows[0].mse_std_error;
    let ratio = se(100) / se(400);
    println!("se(R=100) / se(R=400) = {ratio:.3}");
    assert!((ratio - 2.0).abs() <= 0.6, "ratio {ratio}");
}

#[test]
fn tables_identical_across_worker_counts() {
    let spec = ks_experiment(12);
    let a = run_experiment(&spec, 1).unwrap().to_csv();
    let b = run_experiment(&spec, 3).unwrap().to_csv();
    assert_eq!(a, b);
}
