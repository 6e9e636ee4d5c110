//! Every runnable example must finish without error.

#[allow(dead_code)]
mod boosting_path {
    include!("../examples/boosting_path.rs");

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

#[allow(dead_code)]
mod stopping_rules {
    include!("../examples/stopping_rules.rs");

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

#[allow(dead_code)]
mod post_boosting {
    include!("../examples/post_boosting.rs");

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

#[allow(dead_code)]
mod lasso_baseline {
    include!("../examples/lasso_baseline.rs");

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

#[allow(dead_code)]
mod theory_constants {
    include!("../examples/theory_constants.rs");

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

#[allow(dead_code)]
mod eigen_scan {
    include!("../examples/eigen_scan.rs");

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

#[allow(dead_code)]
mod pga_bounds {
    include!("../examples/pga_bounds.rs");

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

#[allow(dead_code)]
mod simulation_table {
    include!("../examples/simulation_table.rs");

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

#[allow(dead_code)]
mod step_curve {
    include!("../examples/step_curve.rs");

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}

#[allow(dead_code)]
mod fit_csv {
    include!("../examples/fit_csv.rs");

    #[test]
    fn runs() {
        run_example().unwrap();
    }
}
