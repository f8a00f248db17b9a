//! Dense symmetric linear algebra used by the BCD estimators.

use std::ops::{Index, IndexMut};

use faer::Side;

use crate::error::{MonkError, Result};

/// Diagonal shifts tried, in order, as multiples of the mean diagonal.
pub const JITTER_LADDER: [f64; 5] = [0.0, 1e-12, 1e-10, 1e-8, 1e-6];

const SYMMETRY_TOL: f64 = 1e-8;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(MonkError::DimensionMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(MonkError::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(MonkError::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// vᵀ M v for square M.
    pub fn quad_form(&self, v: &[f64]) -> Result<f64> {
        let mv = self.matvec(v)?;
        Ok(mv.iter().zip(v).map(|(a, b)| a * b).sum())
    }

    /// The submatrix with the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Largest |M_ij − M_ji| relative to max(1, max|M|).
    pub fn relative_asymmetry(&self) -> f64 {
        let scale = self.max_abs().max(1.0);
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / scale
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular factor `L` with `L·Lᵀ = M + jitter·I`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    l: Matrix,
    jitter: f64,
}

impl CholeskyFactor {
    pub fn lower(&self) -> &Matrix {
        &self.l
    }

    /// Diagonal shift that was added to the source matrix.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// Lᵀv. Skips zero entries of `v`, so block indicators cost O(dim · nnz).
    pub fn transpose_mul(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if v.len() != n {
            return Err(MonkError::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        let mut out = vec![0.0; n];
        for (j, &vj) in v.iter().enumerate() {
            if vj == 0.0 {
                continue;
            }
            for (o, l) in out[..=j].iter_mut().zip(&self.l.row(j)[..=j]) {
                *o += vj * l;
            }
        }
        Ok(out)
    }

    /// ‖Lᵀv‖₂ = √(vᵀ(M + jitter·I)v).
    pub fn weighted_norm(&self, v: &[f64]) -> Result<f64> {
        Ok(self.transpose_mul(v)?.iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    /// √(vᵀMv): the weighted norm with the jitter contribution removed, so a
    /// vector scaled by its inverse lies exactly on the unit sphere of the
    /// unshifted matrix.
    pub fn unshifted_norm(&self, v: &[f64]) -> Result<f64> {
        let shifted: f64 = self.transpose_mul(v)?.iter().map(|x| x * x).sum();
        let v_sq: f64 = v.iter().map(|x| x * x).sum();
        Ok((shifted - self.jitter * v_sq).max(0.0).sqrt())
    }
}

/// Cholesky factorization of a symmetric PSD matrix, escalating a diagonal
/// jitter along [`JITTER_LADDER`] until the factorization succeeds.
pub fn cholesky_psd(m: &Matrix) -> Result<CholeskyFactor> {
    if !m.is_square() {
        return Err(MonkError::DimensionMismatch {
            expected: m.rows(),
            got: m.cols(),
        });
    }
    let asym = m.relative_asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(MonkError::NotSymmetric(asym));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(CholeskyFactor {
            l: Matrix::zeros(0, 0),
            jitter: 0.0,
        });
    }
    let mean_diag = m.trace() / n as f64;
    let scale = if mean_diag.is_finite() && mean_diag > 0.0 {
        mean_diag
    } else {
        1.0
    };
    for step in JITTER_LADDER {
        let jitter = step * scale;
        // Only the lower triangle is read by the factorization.
        let shifted = faer::Mat::<f64>::from_fn(n, n, |i, j| {
            if i == j {
                m[(i, j)] + jitter
            } else {
                m[(i, j)]
            }
        });
        if let Ok(chol) = shifted.cholesky(Side::Lower) {
            let l = chol.compute_l();
            let mut lower = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..=i {
                    lower[(i, j)] = l.read(i, j);
                }
            }
            if lower.as_slice().iter().all(|x| x.is_finite()) {
                return Ok(CholeskyFactor { l: lower, jitter });
            }
        }
    }
    Err(MonkError::NotPsd(JITTER_LADDER[JITTER_LADDER.len() - 1] * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reconstruction_error(m: &Matrix, f: &CholeskyFactor) -> f64 {
        let l = f.lower();
        let llt = l.matmul(&l.transpose()).unwrap();
        let mut worst = 0.0f64;
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let target = m[(i, j)] + if i == j { f.jitter() } else { 0.0 };
                worst = worst.max((llt[(i, j)] - target).abs());
            }
        }
        worst
    }

    #[test]
    fn identity_factors_to_identity() {
        let f = cholesky_psd(&Matrix::identity(3)).unwrap();
        assert_eq!(f.jitter(), 0.0);
        assert_eq!(f.lower(), &Matrix::identity(3));
    }

    #[test]
    fn two_by_two_hand_example() {
        let m = Matrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]).unwrap();
        let f = cholesky_psd(&m).unwrap();
        assert_eq!(f.jitter(), 0.0);
        let l = f.lower();
        assert!((l[(0, 0)] - 2.0).abs() < 1e-15);
        assert_eq!(l[(0, 1)], 0.0);
        assert!((l[(1, 0)] - 1.0).abs() < 1e-15);
        assert!((l[(1, 1)] - 2f64.sqrt()).abs() < 1e-15);
        assert!((f.weighted_norm(&[1.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rank_one_needs_jitter() {
        let m = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let f = cholesky_psd(&m).unwrap();
        assert!(f.jitter() > 0.0);
        assert!(reconstruction_error(&m, &f) <= 1e-8);
        assert!(f.lower().as_slice().iter().step_by(3).all(|d| *d >= 0.0));
        // [1, -1] is in the kernel of m.
        assert!(f.unshifted_norm(&[1.0, -1.0]).unwrap() < 1e-7);
    }

    #[test]
    fn zero_matrix_factors_with_jitter() {
        let f = cholesky_psd(&Matrix::zeros(3, 3)).unwrap();
        assert!(f.jitter() > 0.0);
        assert_eq!(f.unshifted_norm(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn weighted_norm_trivial_cases() {
        let f = cholesky_psd(&Matrix::identity(2)).unwrap();
        assert_eq!(f.weighted_norm(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(f.weighted_norm(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            f.weighted_norm(&[1.0]),
            Err(MonkError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        let m = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]).unwrap();
        assert!(matches!(cholesky_psd(&m), Err(MonkError::NotSymmetric(_))));
        let m = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(matches!(cholesky_psd(&m), Err(MonkError::NotPsd(_))));
    }

    fn random_psd(n: usize, k: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Matrix::from_fn(k, n, |_, _| rng.gen_range(-1.0..1.0));
        a.transpose().matmul(&a).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn weighted_norm_matches_quadratic_form(n in 1usize..50, k in 1usize..60, seed: u64) {
            let m = random_psd(n, k, seed);
            let f = cholesky_psd(&m).unwrap();
            prop_assert!(reconstruction_error(&m, &f) <= 1e-8 * m.max_abs().max(1.0));
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let shifted = m.quad_form(&v).unwrap() + f.jitter() * v.iter().map(|x| x * x).sum::<f64>();
            let wn = f.weighted_norm(&v).unwrap();
            prop_assert!((wn * wn - shifted).abs() <= 1e-8 * shifted.max(1e-300) + 1e-14);
        }
    }
}
