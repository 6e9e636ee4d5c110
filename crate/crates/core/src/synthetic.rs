//! Small synthetic designs used by tests, examples and presets.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::RngStream;

/// `n x p` design made of columns `1..=p` of the Sylvester-Hadamard matrix of
/// order `n` (the all-ones column is dropped). Entries are `+-1`, columns have
/// mean zero, unit 1/n variance and are mutually orthogonal.
///
/// # Panics
/// If `n` is not a power of two or `p >= n`.
pub fn hadamard_design(n: usize, p: usize) -> Matrix {
    assert!(n.is_power_of_two() && n >= 2, "n must be a power of two");
    assert!(p < n, "at most n - 1 orthonormal centred columns exist");
    Matrix::from_fn(n, p, |i, j| {
        if ((i & (j + 1)).count_ones()) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    })
}

/// Noiseless or noisy data on an orthonormal design: `y = X beta + sigma eps`.
pub fn orthonormal_dataset(n: usize, beta: &[f64], sigma: f64, stream: RngStream) -> Result<Dataset> {
    if !n.is_power_of_two() || beta.len() >= n {
        return Err(Error::InvalidConfig(format!(
            "orthonormal designs need n a power of two and p < n (n={n}, p={})",
            beta.len()
        )));
    }
    let x = hadamard_design(n, beta.len());
    respond(x, beta, sigma, stream)
}

/// Standardized iid Gaussian design with `y = X beta + sigma eps`; `beta` is
/// given in the standardized basis.
pub fn gaussian_dataset(n: usize, beta: &[f64], sigma: f64, stream: RngStream) -> Result<Dataset> {
    let p = beta.len();
    let draws = stream.child(0).rng().normals(n * p);
    let raw = Matrix::from_fn(n, p, |i, j| draws[j * n + i]);
    let x = Dataset::standardize(&raw, &vec![0.0; n], false)?.x().clone();
    respond(x, beta, sigma, stream)
}

fn respond(x: Matrix, beta: &[f64], sigma: f64, stream: RngStream) -> Result<Dataset> {
    let n = x.rows();
    let mut y = x.mul_vec(beta);
    if sigma > 0.0 {
        let eps = stream.child(1).rng().normals(n);
        for (yi, e) in y.iter_mut().zip(eps) {
            *yi += sigma * e;
        }
    }
    Dataset::new(x, y)?.with_true_beta(beta.to_vec())
}

#[cfg(test)]
pub(crate) fn random_dataset(n: usize, p: usize, beta: &[f64], sigma: f64, seed: u64) -> Dataset {
    assert_eq!(beta.len(), p);
    gaussian_dataset(n, beta, sigma, RngStream::new(seed, 0)).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    #[test]
    fn hadamard_columns_are_orthonormal() {
        let x = hadamard_design(16, 15);
        let g = x.gram_n();
        for j in 0..15 {
            for k in 0..15 {
                let want = if j == k { 1.0 } else { 0.0 };
                assert_eq!(g[(j, k)], want);
            }
            assert_eq!(x.col(j).iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn gaussian_dataset_is_standardized() {
        let ds = gaussian_dataset(50, &[1.0, 0.0, 2.0], 0.0, RngStream::new(3, 0)).unwrap();
        assert!(ds.standardization_error() < 1e-12);
        let fit = ds.x().mul_vec(&[1.0, 0.0, 2.0]);
        assert!(dot(&fit, &fit) > 0.0);
        assert_eq!(ds.residual_sq(&[1.0, 0.0, 2.0]), 0.0);
    }
}
