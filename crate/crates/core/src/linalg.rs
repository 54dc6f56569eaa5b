//! Small dense vector and matrix helpers over [`Real`] slices.

use crate::Real;

#[inline]
pub fn dot(a: &[Real], b: &[Real]) -> Real {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: Real, x: &[Real], y: &mut [Real]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn squared_norm(a: &[Real]) -> Real {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[Real]) -> Real {
    squared_norm(a).sqrt()
}

pub fn l1_norm(a: &[Real]) -> Real {
    a.iter().map(|x| x.abs()).sum()
}

pub fn cosine(a: &[Real], b: &[Real]) -> Real {
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        0.0
    } else {
        dot(a, b) / denom
    }
}

pub fn all_finite(a: &[Real]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Real>,
}

impl DenseMatrix {
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

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Real>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Real] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Real] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Real> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[Real] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Real] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `self * v`
    pub fn mul_vec(&self, v: &[Real]) -> Vec<Real> {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mat-vec");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ * v`
    pub fn transpose_mul_vec(&self, v: &[Real]) -> Vec<Real> {
        assert_eq!(v.len(), self.rows, "dimension mismatch in transposed mat-vec");
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            axpy(vi, self.row(i), &mut out);
        }
        out
    }

    /// `self += alpha * x yᵀ`
    pub fn add_outer(&mut self, alpha: Real, x: &[Real], y: &[Real]) {
        assert_eq!(x.len(), self.rows);
        assert_eq!(y.len(), self.cols);
        for (i, &xi) in x.iter().enumerate() {
            axpy(alpha * xi, y, self.row_mut(i));
        }
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Real;

    fn index(&self, (i, j): (usize, usize)) -> &Real {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Real {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_mul_matches_explicit_transpose() {
        let m = DenseMatrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(m.transpose_mul_vec(&[1.0, -1.0]), vec![-3.0, -3.0, -3.0]);
        assert_eq!(m.mul_vec(&[1.0, 0.0, 1.0]), vec![4.0, 10.0]);
    }

    #[test]
    fn cosine_of_zero_vector_is_zero() {
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 2.0]), 0.0);
    }
}
