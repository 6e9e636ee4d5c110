//! Small dense linear-algebra kernel.
//!
//! Everything here works on column-major storage because every algorithm in
//! the crate walks the design matrix one predictor at a time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pivot ratio below which a Gram matrix is treated as singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-12;

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
const SYMMETRY_TOL: f64 = 1e-10;

/// Dense column-major matrix of reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k, k);
        for i in 0..k {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * cols);
        for c in columns {
            if c.len() != rows {
                return Err(Error::LengthMismatch {
                    expected: rows,
                    got: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(n, p);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != p {
                return Err(Error::LengthMismatch {
                    expected: p,
                    got: r.len(),
                });
            }
            for (j, v) in r.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[j * rows + i] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    /// `X v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "mul_vec: dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0.0 {
                axpy(vj, self.col(j), &mut out);
            }
        }
        out
    }

    /// Empirical Gram matrix `E_n[x x']`.
    pub fn gram_n(&self) -> Matrix {
        let n = self.rows as f64;
        let mut g = Matrix::zeros(self.cols, self.cols);
        for a in 0..self.cols {
            for b in 0..=a {
                let v = dot(self.col(a), self.col(b)) / n;
                g[(a, b)] = v;
                g[(b, a)] = v;
            }
        }
        g
    }

    /// Principal submatrix on `idx`.
    pub fn principal(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), idx.len(), |a, b| self[(idx[a], idx[b])])
    }

    /// Rows `idx` of this matrix as a new matrix.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)])
    }

    /// Columns `idx` of this matrix as a new matrix.
    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, idx.len());
        for (k, &j) in idx.iter().enumerate() {
            m.col_mut(k).copy_from_slice(self.col(j));
        }
        m
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            for k in 0..self.cols {
                let b = other[(k, j)];
                if b != 0.0 {
                    let (src, dst) = (self.col(k), j);
                    for i in 0..self.rows {
                        out.data[dst * self.rows + i] += b * src[i];
                    }
                }
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[j * self.rows + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[j * self.rows + i]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Empirical inner product `<a, b>_n = (1/n) sum a_i b_i`.
pub fn inner_n(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(dot(a, b) / a.len() as f64)
}

/// `||a||_{2,n} = sqrt(E_n[a^2])`.
pub fn norm_2n(a: &[f64]) -> f64 {
    norm_sq_n(a).sqrt()
}

/// `||a||^2_{2,n}`.
pub fn norm_sq_n(a: &[f64]) -> f64 {
    if a.is_empty() {
        0.0
    } else {
        dot(a, a) / a.len() as f64
    }
}

/// Lower-triangular Cholesky factor that can grow one column at a time.
///
/// Used for nested least-squares problems (orthogonal boosting, post-refits
/// along a path) where the active set only ever gains variables.
#[derive(Debug, Clone, Default)]
pub struct GrowingCholesky {
    /// Row-packed lower triangle: row `k` holds `l[k][0..=k]`.
    rows: Vec<Vec<f64>>,
    max_pivot: f64,
}

impl GrowingCholesky {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Appends a variable given its Gram entries against the existing ones
    /// (`cross`, length `dim()`) and its own squared norm `diag`.
    pub fn push(&mut self, cross: &[f64], diag: f64) -> Result<()> {
        let k = self.rows.len();
        debug_assert_eq!(cross.len(), k);
        let mut row = self.forward(cross);
        let pivot = diag - dot(&row, &row);
        let scale = self.max_pivot.max(diag.abs());
        if !(pivot > SINGULAR_PIVOT_RATIO * scale) || scale == 0.0 {
            return Err(Error::SingularGram {
                position: k,
                ratio: if scale > 0.0 { pivot / scale } else { 0.0 },
            });
        }
        self.max_pivot = self.max_pivot.max(pivot);
        row.push(pivot.sqrt());
        self.rows.push(row);
        Ok(())
    }

    /// Solves `L z = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let mut z = Vec::with_capacity(b.len());
        for (i, row) in self.rows.iter().enumerate().take(b.len()) {
            let s = b[i] - dot(&row[..i], &z[..i]);
            z.push(s / row[i]);
        }
        z
    }

    /// Solves `L' x = z`.
    pub fn backward(&self, z: &[f64]) -> Vec<f64> {
        let k = z.len();
        let mut x = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = z[i];
            for (r, xr) in x.iter().enumerate().take(k).skip(i + 1) {
                s -= self.rows[r][i] * xr;
            }
            x[i] = s / self.rows[i][i];
        }
        x
    }

    /// Solves `(L L') x = b` for the full current dimension.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward(&self.forward(b))
    }
}

/// Least-squares coefficients of `y` on the columns of `cols` via the
/// Cholesky factor of the empirical Gram matrix.
pub fn ols_solve(cols: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    if cols.rows() != y.len() {
        return Err(Error::LengthMismatch {
            expected: cols.rows(),
            got: y.len(),
        });
    }
    let k = cols.cols();
    if k == 0 {
        return Ok(Vec::new());
    }
    if k > cols.rows() {
        return Err(Error::SingularGram {
            position: cols.rows(),
            ratio: 0.0,
        });
    }
    let n = cols.rows() as f64;
    let gram = cols.gram_n();
    let rhs: Vec<f64> = (0..k).map(|j| dot(cols.col(j), y) / n).collect();
    let chol = cholesky(&gram)?;
    Ok(chol.solve(&rhs))
}

/// Full Cholesky factorization with the pivot-ratio singularity guard.
pub fn cholesky(gram: &Matrix) -> Result<GrowingCholesky> {
    let k = gram.rows();
    // Guard against the largest diagonal entry, not just pivots seen so far.
    let max_diag = (0..k).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    let mut chol = GrowingCholesky {
        rows: Vec::with_capacity(k),
        max_pivot: max_diag,
    };
    for j in 0..k {
        let cross: Vec<f64> = (0..j).map(|i| gram[(j, i)]).collect();
        chol.push(&cross, gram[(j, j)])?;
    }
    Ok(chol)
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn sym_eigen_range(m: &Matrix) -> Result<(f64, f64)> {
    let ev = sym_eigenvalues(m)?;
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    let k = m.rows();
    if k == 0 || m.cols() != k {
        return Err(Error::Domain(format!(
            "eigenvalues need a non-empty square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let scale = m.data.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let mut asym = 0.0_f64;
    for i in 0..k {
        for j in 0..i {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }

    let mut a = m.clone();
    let frob = a.data.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..k)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * frob {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..k {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = c * arp - s * arq;
                    a[(r, q)] = s * arp + c * arq;
                }
                for r in 0..k {
                    let apr = a[(p, r)];
                    let aqr = a[(q, r)];
                    a[(p, r)] = c * apr - s * aqr;
                    a[(q, r)] = s * apr + c * aqr;
                }
            }
        }
    }
    Ok((0..k).map(|i| a[(i, i)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn inner_n_examples() {
        assert_eq!(inner_n(&[1.0, 1.0], &[1.0, -1.0]).unwrap(), 0.0);
        assert_eq!(
            inner_n(&[1.0, 1.0, -1.0, -1.0], &[1.0, 1.0, -1.0, -1.0]).unwrap(),
            1.0
        );
        assert_eq!(inner_n(&[2.0, 0.0], &[3.0, 0.0]).unwrap(), 3.0);
        assert!(matches!(
            inner_n(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert_eq!(norm_2n(&[1.0, 1.0, -1.0, -1.0]), 1.0);
    }

    #[test]
    fn ols_single_column() {
        let x = vec![1.0, -2.0, 0.5, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let b = ols_solve(&Matrix::from_columns(&[x]).unwrap(), &y).unwrap();
        assert_abs_diff_eq!(b[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn ols_orthogonal_response_gives_zero() {
        let cols = Matrix::from_columns(&[vec![1.0, 1.0, -1.0, -1.0], vec![1.0, -1.0, 1.0, -1.0]])
            .unwrap();
        let y = [1.0, -1.0, -1.0, 1.0];
        let b = ols_solve(&cols, &y).unwrap();
        assert!(b.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn ols_duplicated_columns_singular() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let cols = Matrix::from_columns(&[x.clone(), x]).unwrap();
        assert!(matches!(
            ols_solve(&cols, &[1.0, 0.0, 0.0, 1.0]),
            Err(Error::SingularGram { .. })
        ));
    }

    #[test]
    fn eigen_range_examples() {
        let (lo, hi) = sym_eigen_range(&Matrix::identity(3)).unwrap();
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);

        let m = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let (lo, hi) = sym_eigen_range(&m).unwrap();
        assert_abs_diff_eq!(lo, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.5, epsilon = 1e-12);

        let m = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.25]]).unwrap();
        let (lo, hi) = sym_eigen_range(&m).unwrap();
        assert_abs_diff_eq!(lo, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn eigen_rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]).unwrap();
        assert!(matches!(sym_eigen_range(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn growing_cholesky_matches_batch() {
        let cols = Matrix::from_columns(&[
            vec![1.0, 2.0, 0.0, -1.0, 3.0],
            vec![0.5, -1.0, 2.0, 1.0, 0.0],
            vec![1.0, 1.0, 1.0, 1.0, -2.0],
        ])
        .unwrap();
        let y = [1.0, 0.0, 2.0, -1.0, 0.5];
        let batch = ols_solve(&cols, &y).unwrap();
        let g = cols.gram_n();
        let mut inc = GrowingCholesky::new();
        for j in 0..3 {
            let cross: Vec<f64> = (0..j).map(|i| g[(j, i)]).collect();
            inc.push(&cross, g[(j, j)]).unwrap();
        }
        let rhs: Vec<f64> = (0..3).map(|j| dot(cols.col(j), &y) / 5.0).collect();
        for (a, b) in inc.solve(&rhs).iter().zip(&batch) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}
