//! Restricted eigenvalues over principal submatrices of the Gram matrix.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen_range, Matrix};
use crate::rng::RngStream;

/// Largest submatrix size the scan accepts.
pub const MAX_SCAN_SIZE: usize = 20;

/// `phi_small` at or below this marks the Gram as rank deficient.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub s_max: usize,
    /// `phi_small[k]` is the smallest eigenvalue over sizes `1..=k+1`.
    pub phi_small: Vec<f64>,
    /// `phi_large[k]` is the largest eigenvalue over sizes `1..=k+1`.
    pub phi_large: Vec<f64>,
    /// Per size: whether every principal submatrix was enumerated.
    pub exhaustive: Vec<bool>,
    /// Subsets evaluated per size.
    pub evaluated: Vec<u64>,
    /// `1 - phi_small(s_max)` clamped to `[0, 1]`.
    pub c: f64,
    pub warnings: Vec<String>,
}

impl EigenReport {
    pub fn all_exhaustive(&self) -> bool {
        self.exhaustive.iter().all(|&e| e)
    }

    /// `phi_small` for submatrix size `s` (1-based).
    pub fn phi_small_at(&self, s: usize) -> Option<f64> {
        s.checked_sub(1).and_then(|k| self.phi_small.get(k).copied())
    }

    pub fn phi_large_at(&self, s: usize) -> Option<f64> {
        s.checked_sub(1).and_then(|k| self.phi_large.get(k).copied())
    }

    /// SE constant implied by sizes up to `s`.
    pub fn c_at(&self, s: usize) -> Option<f64> {
        self.phi_small_at(s).map(|v| (1.0 - v).clamp(0.0, 1.0))
    }

    pub fn rank_deficient(&self) -> bool {
        self.phi_small.last().is_some_and(|&v| v <= RANK_TOL)
    }

    /// CSV with one row per size.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,phi_small,phi_large,c,exhaustive,evaluated\n");
        for k in 0..self.phi_small.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                k + 1,
                self.phi_small[k],
                self.phi_large[k],
                (1.0 - self.phi_small[k]).clamp(0.0, 1.0),
                self.exhaustive[k],
                self.evaluated[k]
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenScanConfig {
    pub s_max: usize,
    /// Subsets per size above which the scan switches to sampling.
    pub budget: u64,
    pub seed: u64,
}

impl Default for EigenScanConfig {
    fn default() -> Self {
        Self {
            s_max: 5,
            budget: 20_000,
            seed: 0,
        }
    }
}

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return out;
        };
        idx[i] += 1;
        for t in i + 1..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Extreme {
    value: f64,
    index: usize,
}

/// Extreme eigenvalues of the principal submatrices for `subsets`, with the
/// index (within `subsets`) of the minimising and maximising subset. Ties go
/// to the lowest index so the result does not depend on the thread count.
fn scan_subsets(gram: &Matrix, subsets: &[Vec<usize>]) -> Result<(Extreme, Extreme)> {
    let ranges: Vec<(f64, f64)> = subsets
        .par_iter()
        .map(|s| sym_eigen_range(&gram.principal(s)))
        .collect::<Result<_>>()?;
    let mut lo = Extreme {
        value: f64::INFINITY,
        index: 0,
    };
    let mut hi = Extreme {
        value: f64::NEG_INFINITY,
        index: 0,
    };
    for (i, &(a, b)) in ranges.iter().enumerate() {
        if a < lo.value {
            lo = Extreme { value: a, index: i };
        }
        if b > hi.value {
            hi = Extreme { value: b, index: i };
        }
    }
    Ok((lo, hi))
}

/// Restricted eigenvalues of a design's 1/n Gram matrix.
pub fn restricted_eigen_scan(x: &Matrix, cfg: &EigenScanConfig) -> Result<EigenReport> {
    restricted_eigen_scan_gram(&x.gram_n(), cfg)
}

/// Restricted eigenvalues of a symmetric Gram matrix.
///
/// Sizes whose subset count exceeds the budget are sampled uniformly and then
/// extended greedily from the worst subset of the previous size; such sizes
/// give an upper bound on `phi_small` and a lower bound on `phi_large`.
pub fn restricted_eigen_scan_gram(gram: &Matrix, cfg: &EigenScanConfig) -> Result<EigenReport> {
    let p = gram.cols();
    if gram.rows() != p {
        return Err(Error::LengthMismatch {
            expected: p,
            got: gram.rows(),
        });
    }
    if cfg.s_max == 0 || cfg.s_max > MAX_SCAN_SIZE {
        return Err(Error::InvalidConfig(format!(
            "s_max must lie in 1..={MAX_SCAN_SIZE}, got {}",
            cfg.s_max
        )));
    }
    if cfg.budget == 0 {
        return Err(Error::InvalidConfig("eigen scan budget must be positive".into()));
    }
    let s_max = cfg.s_max.min(p);
    let mut warnings = Vec::new();
    if s_max < cfg.s_max {
        warnings.push(format!("s_max reduced from {} to p = {p}", cfg.s_max));
    }
    let stream = RngStream::new(cfg.seed, 0x6569_6765);

    let mut phi_small = Vec::with_capacity(s_max);
    let mut phi_large = Vec::with_capacity(s_max);
    let mut exhaustive = Vec::with_capacity(s_max);
    let mut evaluated = Vec::with_capacity(s_max);
    let mut worst_lo: Vec<usize> = Vec::new();
    let mut worst_hi: Vec<usize> = Vec::new();

    for s in 1..=s_max {
        let count = binomial(p, s);
        let full = count <= cfg.budget;
        let mut subsets = if full {
            combinations(p, s)
        } else {
            let mut rng = stream.child(s as u64).rng();
            (0..cfg.budget).map(|_| rng.subset(p, s)).collect()
        };
        if !full {
            // adversarial extensions of the previous extremes
            for base in [&worst_lo, &worst_hi] {
                for j in 0..p {
                    if !base.contains(&j) {
                        let mut t = base.clone();
                        t.push(j);
                        t.sort_unstable();
                        subsets.push(t);
                    }
                }
            }
        }
        let (lo, hi) = scan_subsets(gram, &subsets)?;
        worst_lo = subsets[lo.index].clone();
        worst_hi = subsets[hi.index].clone();
        let prev_lo = phi_small.last().copied().unwrap_or(f64::INFINITY);
        let prev_hi = phi_large.last().copied().unwrap_or(f64::NEG_INFINITY);
        phi_small.push(lo.value.min(prev_lo));
        phi_large.push(hi.value.max(prev_hi));
        exhaustive.push(full);
        evaluated.push(subsets.len() as u64);
    }

    let last = *phi_small.last().expect("s_max >= 1");
    if last <= RANK_TOL {
        warnings.push(format!(
            "restricted smallest eigenvalue {last:e} is numerically zero; c clamped to 1"
        ));
    }
    if !exhaustive.iter().all(|&e| e) {
        warnings.push("sampled sizes present: phi_small is an upper bound, c a lower bound".into());
    }
    Ok(EigenReport {
        s_max,
        c: (1.0 - last).clamp(0.0, 1.0),
        phi_small,
        phi_large,
        exhaustive,
        evaluated,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::hadamard_design;
    use approx::assert_abs_diff_eq;

    fn toeplitz(p: usize, rho: f64) -> Matrix {
        Matrix::from_fn(p, p, |j, k| rho.powi((j as i32 - k as i32).abs()))
    }

    #[test]
    fn binomial_and_combinations() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(12, 6), 924);
        assert_eq!(binomial(100, 50), u64::MAX);
        let c = combinations(4, 2);
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], vec![0, 1]);
        assert_eq!(c[5], vec![2, 3]);
    }

    #[test]
    fn orthonormal_design_has_c_zero() {
        let x = hadamard_design(16, 8);
        let r = restricted_eigen_scan(&x, &EigenScanConfig { s_max: 4, budget: 10_000, seed: 1 }).unwrap();
        assert!(r.all_exhaustive());
        for k in 0..4 {
            assert_abs_diff_eq!(r.phi_small[k], 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(r.phi_large[k], 1.0, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(r.c, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn toeplitz_three_by_three_pairs() {
        let g = toeplitz(3, -0.5);
        let r = restricted_eigen_scan_gram(&g, &EigenScanConfig { s_max: 2, budget: 100, seed: 0 }).unwrap();
        assert_abs_diff_eq!(r.phi_small_at(1).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.phi_small_at(2).unwrap(), 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(r.phi_large_at(2).unwrap(), 1.5, epsilon = 1e-10);
    }

    #[test]
    fn duplicated_column_clamps_c() {
        let mut x = hadamard_design(8, 3);
        let c0 = x.col(0).to_vec();
        x.col_mut(2).copy_from_slice(&c0);
        let r = restricted_eigen_scan(&x, &EigenScanConfig { s_max: 2, budget: 100, seed: 0 }).unwrap();
        assert!(r.phi_small_at(2).unwrap().abs() < 1e-12);
        assert_eq!(r.c, 1.0);
        assert!(r.rank_deficient());
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn sampled_scan_is_monotone_and_bounded_by_exhaustive() {
        let g = toeplitz(10, -0.5);
        let full = restricted_eigen_scan_gram(&g, &EigenScanConfig { s_max: 4, budget: 1_000_000, seed: 0 }).unwrap();
        let sampled = restricted_eigen_scan_gram(&g, &EigenScanConfig { s_max: 4, budget: 15, seed: 0 }).unwrap();
        assert!(!sampled.all_exhaustive());
        for k in 0..4 {
            assert!(sampled.phi_small[k] >= full.phi_small[k] - 1e-12);
            assert!(sampled.phi_large[k] <= full.phi_large[k] + 1e-12);
        }
        assert!(sampled.phi_small.windows(2).all(|w| w[1] <= w[0]));
        assert!(sampled.phi_large.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn scan_rejects_bad_config() {
        let g = toeplitz(4, 0.2);
        assert!(restricted_eigen_scan_gram(&g, &EigenScanConfig { s_max: 0, budget: 10, seed: 0 }).is_err());
        assert!(restricted_eigen_scan_gram(&g, &EigenScanConfig { s_max: 21, budget: 10, seed: 0 }).is_err());
    }
}
