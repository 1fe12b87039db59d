//! Dense row-major matrices and the handful of GEMM shapes the crate needs.
//!
//! Products go through `matrixmultiply`, which is single-threaded and
//! therefore bit-reproducible for a given shape.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix buffer has wrong length");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { rows: rows.len(), cols, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    /// Rows selected by `idx`, in order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(idx.len(), self.cols);
        for (o, &i) in idx.iter().enumerate() {
            out.row_mut(o).copy_from_slice(self.row(i));
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

/// `A · Bᵀ` for `A: n×k`, `B: m×k`.
pub fn matmul_nt(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.cols, b.cols, "inner dimensions differ");
    let mut c = Matrix::zeros(a.rows, b.rows);
    if a.rows == 0 || b.rows == 0 || a.cols == 0 {
        return c;
    }
    // SAFETY: slices cover the full extents described by the strides.
    unsafe {
        matrixmultiply::dgemm(
            a.rows, a.cols, b.rows, 1.0,
            a.data.as_ptr(), a.cols as isize, 1,
            b.data.as_ptr(), 1, b.cols as isize,
            0.0,
            c.data.as_mut_ptr(), c.cols as isize, 1,
        );
    }
    c
}

/// `A · B` for `A: n×k`, `B: k×m`.
pub fn matmul_nn(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.cols, b.rows, "inner dimensions differ");
    let mut c = Matrix::zeros(a.rows, b.cols);
    if a.rows == 0 || b.cols == 0 || a.cols == 0 {
        return c;
    }
    unsafe {
        matrixmultiply::dgemm(
            a.rows, a.cols, b.cols, 1.0,
            a.data.as_ptr(), a.cols as isize, 1,
            b.data.as_ptr(), b.cols as isize, 1,
            0.0,
            c.data.as_mut_ptr(), c.cols as isize, 1,
        );
    }
    c
}

/// `Aᵀ · B` for `A: k×n`, `B: k×m`.
pub fn matmul_tn(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.rows, b.rows, "inner dimensions differ");
    let mut c = Matrix::zeros(a.cols, b.cols);
    if a.cols == 0 || b.cols == 0 || a.rows == 0 {
        return c;
    }
    unsafe {
        matrixmultiply::dgemm(
            a.cols, a.rows, b.cols, 1.0,
            a.data.as_ptr(), 1, a.cols as isize,
            b.data.as_ptr(), b.cols as isize, 1,
            0.0,
            c.data.as_mut_ptr(), c.cols as isize, 1,
        );
    }
    c
}

/// Single-precision `A · Bᵀ` on raw row-major buffers (`A: n×k`, `B: m×k`).
pub fn sgemm_nt(a: &[f32], n: usize, k: usize, b: &[f32], m: usize) -> Vec<f32> {
    assert_eq!(a.len(), n * k);
    assert_eq!(b.len(), m * k);
    let mut c = vec![0f32; n * m];
    if n == 0 || m == 0 || k == 0 {
        return c;
    }
    unsafe {
        matrixmultiply::sgemm(
            n, k, m, 1.0,
            a.as_ptr(), k as isize, 1,
            b.as_ptr(), 1, k as isize,
            0.0,
            c.as_mut_ptr(), m as isize, 1,
        );
    }
    c
}

/// Single-precision `A · B` on raw row-major buffers (`A: n×k`, `B: k×m`).
pub fn sgemm_nn(a: &[f32], n: usize, k: usize, b: &[f32], m: usize) -> Vec<f32> {
    assert_eq!(a.len(), n * k);
    assert_eq!(b.len(), k * m);
    let mut c = vec![0f32; n * m];
    if n == 0 || m == 0 || k == 0 {
        return c;
    }
    unsafe {
        matrixmultiply::sgemm(
            n, k, m, 1.0,
            a.as_ptr(), k as isize, 1,
            b.as_ptr(), m as isize, 1,
            0.0,
            c.as_mut_ptr(), m as isize, 1,
        );
    }
    c
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &Matrix, b: &Matrix) -> Matrix {
        let mut c = Matrix::zeros(a.rows, b.cols);
        for i in 0..a.rows {
            for j in 0..b.cols {
                let s: f64 = (0..a.cols).map(|k| a.get(i, k) * b.get(k, j)).sum();
                c.set(i, j, s);
            }
        }
        c
    }

    fn transpose(a: &Matrix) -> Matrix {
        let mut t = Matrix::zeros(a.cols, a.rows);
        for i in 0..a.rows {
            for j in 0..a.cols {
                t.set(j, i, a.get(i, j));
            }
        }
        t
    }

    #[test]
    fn gemm_shapes_agree_with_naive_product() {
        let a = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, -1.0, 0.5, 4.0]);
        let b = Matrix::from_vec(3, 2, vec![0.0, 1.0, 2.0, -2.0, 1.5, 3.0]);
        let expect = naive(&a, &b);
        assert_eq!(matmul_nn(&a, &b), expect);
        assert_eq!(matmul_nt(&a, &transpose(&b)), expect);
        assert_eq!(matmul_tn(&transpose(&a), &b), expect);
    }
}
