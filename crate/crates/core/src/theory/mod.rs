//! Theory constants, restricted eigenvalues and bound checks.

pub mod bounds;
pub mod constants;
pub mod eigen;

pub use bounds::{check_bounds, run_pga, BoundConfig, BoundReport};
pub use constants::{delta_naive, lambda_n, mu_a, mu_e, zeta, zeta_star, TheoryConstants};
pub use eigen::{restricted_eigen_scan, EigenReport, EigenScanConfig};
