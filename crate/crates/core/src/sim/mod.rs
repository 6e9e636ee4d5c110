//! Monte-Carlo lab: data-generating processes, experiments and step curves.

pub mod curve;
pub mod dgp;
pub mod experiment;
pub mod presets;

pub use curve::{step_curve, CurveMethod, CurveSpec, CurveTable};
pub use dgp::{generate, mse_out, BetaDesign, DgpSpec, SimData, XDesign};
pub use experiment::{run_experiment, Estimator, ExperimentSpec, MethodSpec, ResultTable};
