//! Small dense row-major matrices and the matrix exponential.
//!
//! Measures are row vectors and functions are column vectors, so the two
//! products used throughout are `v * M` ([`Matrix::left_mul`]) and `M * f`
//! ([`Matrix::right_mul`]).

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
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

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from nested rows. All rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data,
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

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
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
        out
    }

    /// Row vector times matrix: `(v M)_j = sum_i v_i M_ij`.
    pub fn left_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.left_mul_into(v, &mut out);
        out
    }

    pub fn left_mul_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|x| *x = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, m) in out.iter_mut().zip(self.row(i)) {
                *o += vi * m;
            }
        }
    }

    /// Matrix times column vector: `(M f)_i = sum_j M_ij f_j`.
    pub fn right_mul(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), f)).collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Principal submatrix on the given (ordered) index set.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(idx.len(), idx.len());
        for (p, &i) in idx.iter().enumerate() {
            for (q, &j) in idx.iter().enumerate() {
                out[(p, q)] = self[(i, j)];
            }
        }
        out
    }

    /// `exp(self)` by scaling and squaring of a shifted Taylor series.
    ///
    /// The diagonal shift `c = max(0, -min_i a_ii)` makes `A + cI` entrywise
    /// nonnegative whenever `A` has nonnegative off-diagonal entries
    /// (generators and their principal submatrices), so every Taylor term is
    /// nonnegative and the result carries no cancellation error. The series is
    /// truncated once a term falls below machine epsilon relative to the
    /// partial sum.
    pub fn expm(&self) -> Matrix {
        assert!(self.is_square(), "expm of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Matrix::zeros(0, 0);
        }
        let shift = (0..n).map(|i| -self[(i, i)]).fold(0.0, f64::max);
        let mut shifted = self.clone();
        for i in 0..n {
            shifted[(i, i)] += shift;
        }
        let norm = shifted.norm_inf();
        let mut squarings = 0u32;
        if norm > 0.5 {
            squarings = libm::ceil(libm::log2(norm / 0.5)) as u32;
        }
        let scale = libm::ldexp(1.0, -(squarings as i32));
        let b = shifted.scaled(scale);

        let mut sum = Matrix::identity(n);
        let mut term = Matrix::identity(n);
        for k in 1..=60 {
            term = term.matmul(&b).scaled(1.0 / k as f64);
            sum.add_assign(&term);
            if term.norm_inf() <= f64::EPSILON * sum.norm_inf() {
                break;
            }
        }
        let mut result = sum.scaled(libm::exp(-shift * scale));
        for _ in 0..squarings {
            result = result.matmul(&result);
        }
        result
    }

    fn add_assign(&mut self, other: &Matrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn l1_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_zero_is_identity() {
        let z = Matrix::zeros(3, 3);
        assert_eq!(z.expm(), Matrix::identity(3));
    }

    #[test]
    fn expm_of_diagonal() {
        let d = Matrix::from_rows(&[[-2.0, 0.0], [0.0, 0.5]]).unwrap();
        let e = d.expm();
        assert!((e[(0, 0)] - libm::exp(-2.0)).abs() < 1e-14);
        assert!((e[(1, 1)] - libm::exp(0.5)).abs() < 1e-14);
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn expm_of_nilpotent() {
        // exp([[0, t], [0, 0]]) = [[1, t], [0, 1]]
        let n = Matrix::from_rows(&[[0.0, 3.5], [0.0, 0.0]]).unwrap();
        let e = n.expm();
        assert!((e[(0, 1)] - 3.5).abs() < 1e-12);
        assert!((e[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn expm_of_rotation_generator() {
        // Not a generator: exercises the shift path with negative off-diagonals.
        let a = Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let e = a.expm();
        assert!((e[(0, 0)] - libm::cos(1.0)).abs() < 1e-12);
        assert!((e[(1, 0)] - libm::sin(1.0)).abs() < 1e-12);
    }

    #[test]
    fn left_and_right_products() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(m.left_mul(&[1.0, 1.0]), vec![4.0, 6.0]);
        assert_eq!(m.right_mul(&[1.0, 1.0]), vec![3.0, 7.0]);
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows: [&[f64]; 2] = [&[1.0, 2.0], &[3.0]];
        assert!(Matrix::from_rows(&rows).is_err());
    }
}
