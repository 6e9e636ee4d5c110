//! L2Boosting for high-dimensional sparse linear regression.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::map_entry)]

pub mod app;
pub mod boost;
pub mod data;
pub mod error;
pub mod lasso;
pub mod linalg;
pub mod rng;
pub mod sim;
pub mod stopping;
pub mod synthetic;
pub mod theory;

pub use boost::{BoostConfig, BoostPath, BoostStep, RevisitLabel, StopReason, Variant};
pub use data::Dataset;
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use rng::RngStream;
pub use stopping::StoppingRule;
