use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use l2boost::app::{self, DesignSource, FitMethod, FitOptions, PgaOptions, SimulateOptions};
use l2boost::lasso::PenaltyMode;
use l2boost::sim::curve::{CurveMethod, CurveSpec};
use l2boost::sim::dgp::{DgpSpec, XDesign};
use l2boost::stopping::{StoppingRule, DEFAULT_RATIO_CONSTANT};
use l2boost::theory::bounds::BoundConfig;
use l2boost::theory::constants::default_grid;
use l2boost::theory::eigen::EigenScanConfig;
use l2boost::Error;

#[derive(Parser)]
#[command(name = "l2boost", version, about = "L2 boosting, stopping rules and simulations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit an estimator to a CSV file.
    Fit(FitArgs),
    /// Run a Monte Carlo experiment from a spec file or preset.
    Simulate(SimArgs),
    /// Mean MSE against the number of boosting steps.
    Curve(CurveArgs),
    /// Table of rate constants over a grid of c.
    Theory(TheoryArgs),
    /// Restricted eigenvalue scan of a design.
    Eigen(EigenArgs),
    /// Noise-free run with bound checks.
    PgaAnalyze(PgaArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StopKind {
    Ratio,
    Ks,
    Oracle,
    Fixed,
}

#[derive(Args)]
struct StopArgs {
    #[arg(long, value_enum, default_value = "ratio")]
    stop: StopKind,
    /// Constant of the variance-ratio rule.
    #[arg(long = "cu", default_value_t = DEFAULT_RATIO_CONSTANT)]
    cu: f64,
    /// Multiplier for the Ks rule.
    #[arg(long = "K", default_value_t = 2)]
    k: usize,
    /// Sparsity used by the Ks rule.
    #[arg(long, default_value_t = 0)]
    s: usize,
    #[arg(long = "m-fixed")]
    m_fixed: Option<usize>,
}

impl StopArgs {
    fn rule(&self) -> Result<StoppingRule, Error> {
        Ok(match self.stop {
            StopKind::Ratio => StoppingRule::ratio(self.cu),
            StopKind::Ks => {
                if self.s == 0 {
                    return Err(Error::InvalidConfig("--stop ks needs --s".into()));
                }
                StoppingRule::Ks { k: self.k, s: self.s }
            }
            StopKind::Oracle => StoppingRule::Oracle,
            StopKind::Fixed => StoppingRule::FixedSteps {
                steps: self
                    .m_fixed
                    .ok_or_else(|| Error::InvalidConfig("--stop fixed needs --m-fixed".into()))?,
            },
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Penalty {
    Plugin,
    Cv,
}

impl From<Penalty> for PenaltyMode {
    fn from(p: Penalty) -> Self {
        match p {
            Penalty::Plugin => PenaltyMode::PlugIn,
            Penalty::Cv => PenaltyMode::CrossValidation,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Ba,
    PostBa,
    Oba,
    Lasso,
    PostLasso,
}

#[derive(Args)]
struct FitArgs {
    /// Input CSV with a header row.
    input: PathBuf,
    /// Name of the response column.
    #[arg(long)]
    response: String,
    #[arg(long, value_enum, default_value = "ba")]
    method: Method,
    #[command(flatten)]
    stop: StopArgs,
    #[arg(long, default_value_t = 1.0)]
    shrinkage: f64,
    #[arg(long, default_value_t = 1000)]
    max_steps: usize,
    #[arg(long, value_enum, default_value = "plugin")]
    penalty: Penalty,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long = "test-frac", default_value_t = 0.0)]
    test_frac: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "fit-out")]
    out: PathBuf,
}

#[derive(Args)]
struct SimArgs {
    /// Experiment file (.json or .toml).
    spec: Option<PathBuf>,
    #[arg(long, conflicts_with = "spec")]
    preset: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value = "sim-out")]
    out: PathBuf,
    /// List preset names and exit.
    #[arg(long)]
    list_presets: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DgpKind {
    Illustrative,
    Sparse,
    Poly,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, value_enum, default_value = "illustrative")]
    dgp: DgpKind,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    p: usize,
    #[arg(long, default_value_t = 10)]
    s: usize,
    #[arg(long)]
    toeplitz: bool,
    #[arg(long, value_enum, default_value = "ba")]
    method: CurveKind,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 100)]
    max_steps: usize,
    #[arg(long = "cu", default_value_t = DEFAULT_RATIO_CONSTANT)]
    cu: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "curve-out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveKind {
    Ba,
    PostBa,
}

#[derive(Args)]
struct TheoryArgs {
    /// Comma-separated values of c (default 0, 0.05, ..., 0.65).
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
    /// Use the revisit constant without the square.
    #[arg(long)]
    unsquared: bool,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DesignArgs {
    /// CSV file whose predictors form the design.
    #[arg(long, conflicts_with_all = ["orthonormal", "gaussian"])]
    csv: Option<PathBuf>,
    /// Response column dropped from --csv.
    #[arg(long, requires = "csv")]
    response: Option<String>,
    /// Orthonormal design N,P (N a power of two).
    #[arg(long, value_delimiter = ',', conflicts_with = "gaussian")]
    orthonormal: Option<Vec<usize>>,
    /// Gaussian design N,P.
    #[arg(long, value_delimiter = ',')]
    gaussian: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl DesignArgs {
    fn source(&self) -> Result<DesignSource, Error> {
        let pair = |v: &Vec<usize>, flag: &str| match v.as_slice() {
            &[n, p] => Ok((n, p)),
            _ => Err(Error::InvalidConfig(format!("--{flag} takes N,P"))),
        };
        if let Some(path) = &self.csv {
            let response = self
                .response
                .clone()
                .ok_or_else(|| Error::InvalidConfig("--csv needs --response".into()))?;
            return Ok(DesignSource::Csv {
                path: path.clone(),
                response,
            });
        }
        if let Some(d) = &self.orthonormal {
            let (n, p) = pair(d, "orthonormal")?;
            return Ok(DesignSource::Orthonormal { n, p });
        }
        if let Some(d) = &self.gaussian {
            let (n, p) = pair(d, "gaussian")?;
            return Ok(DesignSource::Gaussian {
                n,
                p,
                seed: self.seed,
            });
        }
        Err(Error::InvalidConfig("give one of --csv, --orthonormal or --gaussian".into()))
    }
}

#[derive(Args)]
struct EigenArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[arg(long, default_value_t = 5)]
    s_max: usize,
    #[arg(long, default_value_t = 20000)]
    budget: u64,
    #[arg(long, default_value = "eigen-out")]
    out: PathBuf,
}

#[derive(Args)]
struct PgaArgs {
    #[command(flatten)]
    design: DesignArgs,
    /// True coefficients, comma separated (padded with zeros).
    #[arg(long, value_delimiter = ',', required = true)]
    beta: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    max_steps: usize,
    #[arg(long, default_value_t = 5)]
    s_max: usize,
    #[arg(long, default_value_t = 20000)]
    budget: u64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value = "pga-out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 3 })
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), Error> {
    match cmd {
        Cmd::Fit(a) => {
            let method = match a.method {
                Method::Ba => FitMethod::Ba,
                Method::PostBa => FitMethod::PostBa,
                Method::Oba => FitMethod::Oba,
                Method::Lasso => FitMethod::Lasso,
                Method::PostLasso => FitMethod::PostLasso,
            };
            let opts = FitOptions {
                input: a.input,
                response: a.response,
                method,
                stop: a.stop.rule()?,
                shrinkage: a.shrinkage,
                max_steps: a.max_steps,
                lasso: app::lasso_config(a.penalty.into(), a.alpha, a.folds),
                test_frac: a.test_frac,
                seed: a.seed,
                out_dir: a.out,
            };
            let r = app::fit(&opts)?;
            println!("train rows {}, test rows {}", r.n_train, r.n_test);
            if let Some(m) = r.stop_step {
                println!("stopped after {m} steps");
            }
            let active = r.coefficients.iter().filter(|(_, b)| *b != 0.0).count();
            println!("nonzero coefficients {active} of {}", r.coefficients.len());
            println!("train mse {:.6}", r.train_mse);
            if let Some(t) = r.test_mse {
                println!("test mse {t:.6}");
            }
            println!("wrote {}", opts.out_dir.display());
        }
        Cmd::Simulate(a) => {
            if a.list_presets {
                for name in l2boost::sim::presets::preset_names() {
                    println!("{name}");
                }
                return Ok(());
            }
            let opts = SimulateOptions {
                spec_file: a.spec,
                preset: a.preset,
                repetitions: a.reps,
                seed: a.seed,
                workers: a.workers,
                out_dir: a.out,
            };
            let (table, _) = app::simulate(&opts)?;
            print!("{}", table.to_wide_csv());
        }
        Cmd::Curve(a) => {
            let x = if a.toeplitz { XDesign::Toeplitz } else { XDesign::Iid };
            let dgp = match a.dgp {
                DgpKind::Illustrative => DgpSpec::illustrative(a.n),
                DgpKind::Sparse => DgpSpec::sparse(a.n, a.p, a.s, x),
                DgpKind::Poly => DgpSpec::polynomial(a.n, a.p, a.s, x),
            };
            let spec = CurveSpec {
                dgp,
                method: match a.method {
                    CurveKind::Ba => CurveMethod::Ba,
                    CurveKind::PostBa => CurveMethod::PostBa,
                },
                repetitions: a.reps,
                max_steps: a.max_steps,
                master_seed: a.seed,
                ratio_constant: a.cu,
                lasso: Default::default(),
            };
            let (t, _) = app::curve(&spec, &a.out)?;
            println!("argmin step {}, min holdout mse {:.4}", t.argmin(), t.min_mse_out());
            println!(
                "ratio stop at {:.2} on average, holdout mse {:.4}",
                t.ratio_stop_mean, t.ratio_stop_mse
            );
            if let Some(o) = t.ols_ref {
                println!("ols {o:.4}");
            }
            println!("lasso {:.4}, lasso-cv {:.4}", t.lasso_ref, t.lasso_cv_ref);
        }
        Cmd::Theory(a) => {
            let grid = if a.grid.is_empty() { default_grid() } else { a.grid };
            let csv = if a.unsquared {
                app::theory_csv_unsquared(&grid)?
            } else {
                app::theory_csv(&grid)?
            };
            match a.out {
                Some(path) => std::fs::write(&path, csv).map_err(|e| Error::Io { path, source: e })?,
                None => print!("{csv}"),
            }
        }
        Cmd::Eigen(a) => {
            let cfg = EigenScanConfig {
                s_max: a.s_max,
                budget: a.budget,
                seed: a.design.seed,
            };
            let (r, _) = app::eigen(&a.design.source()?, &cfg, &a.out)?;
            print!("{}", r.to_csv());
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
        }
        Cmd::PgaAnalyze(a) => {
            let opts = PgaOptions {
                design: a.design.source()?,
                beta: a.beta,
                max_steps: a.max_steps,
                scan: EigenScanConfig {
                    s_max: a.s_max,
                    budget: a.budget,
                    seed: a.design.seed,
                },
                bounds: BoundConfig {
                    delta: a.delta,
                    ..BoundConfig::default()
                },
            };
            let (path, reports, _) = app::pga_analyze(&opts, &a.out)?;
            println!("{} steps", path.len());
            for r in &reports {
                let state = match (r.violated, r.advisory) {
                    (false, _) => "ok",
                    (true, false) => "VIOLATED",
                    (true, true) => "violated (advisory)",
                };
                let slack = r.min_slack().map_or("-".into(), |v| format!("{v:.3e}"));
                println!("{:<18} {state:<20} min slack {slack}, skipped {}", r.name, r.skipped.len());
            }
        }
    }
    Ok(())
}
