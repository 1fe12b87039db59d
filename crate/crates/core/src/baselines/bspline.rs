use crate::error::{param_err, Result};
use crate::linalg::Matrix;

/// Clamped cubic B-spline knot vector on `[0, 1]` with uniform interior knots.
pub fn knots(n_basis: usize) -> Vec<f64> {
    let interior = n_basis - 4;
    let mut k = vec![0.0; 4];
    k.extend((1..=interior).map(|i| i as f64 / (interior + 1) as f64));
    k.extend([1.0; 4]);
    k
}

/// Values of all `n_basis` cubic basis functions at `x ∈ [0, 1]` (Cox–de Boor).
pub fn basis_row(knots: &[f64], n_basis: usize, x: f64) -> Vec<f64> {
    let x = x.clamp(0.0, 1.0);
    // Index of the knot span containing x; the right endpoint belongs to the last span.
    let span = if x >= 1.0 { n_basis - 1 } else { knots.partition_point(|&k| k <= x) - 1 };
    let mut n = vec![0.0; knots.len() - 1];
    n[span] = 1.0;
    for p in 1..=3 {
        for i in 0..knots.len() - 1 - p {
            let left = knots[i + p] - knots[i];
            let right = knots[i + p + 1] - knots[i + 1];
            let a = if left > 0.0 { (x - knots[i]) / left * n[i] } else { 0.0 };
            let b = if right > 0.0 { (knots[i + p + 1] - x) / right * n[i + 1] } else { 0.0 };
            n[i] = a + b;
        }
    }
    n.truncate(n_basis);
    n
}

/// `T × n_basis` design matrix on the time grid mapped to `[0, 1]`.
pub fn design_matrix(times: &[f64], n_basis: usize) -> Result<Matrix> {
    if n_basis < 4 {
        return param_err("a cubic basis needs at least 4 functions");
    }
    if times.len() < n_basis {
        return param_err(format!("{} samples cannot determine {n_basis} coefficients", times.len()));
    }
    let (t0, t1) = (times[0], times[times.len() - 1]);
    if !(t1 > t0) {
        return param_err("time grid must be increasing");
    }
    let k = knots(n_basis);
    let rows: Vec<Vec<f64>> = times.iter().map(|&t| basis_row(&k, n_basis, (t - t0) / (t1 - t0))).collect();
    Ok(Matrix::from_rows(&rows))
}

/// Least-squares spline coefficients for every row of `values` (`N × T`),
/// solved through a QR factorisation of the design matrix.
pub fn bspline_coefficients(values: &Matrix, times: &[f64], n_basis: usize) -> Result<Matrix> {
    if values.cols != times.len() {
        return param_err("value rows and time grid differ in length");
    }
    let b = design_matrix(times, n_basis)?.to_nalgebra();
    let qr = b.qr();
    let (q, r) = (qr.q(), qr.r());
    let y = values.to_nalgebra().transpose();
    let qty = q.transpose() * y;
    let c = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| crate::Error::Solver { msg: "singular spline design".into(), residual: f64::NAN })?;
    let c = c.transpose();
    Ok(Matrix::from_vec(c.nrows(), c.ncols(), c.transpose().iter().copied().collect()))
}

/// Evaluates spline coefficients back on the grid.
pub fn bspline_reconstruct(coeffs: &Matrix, times: &[f64]) -> Result<Matrix> {
    let b = design_matrix(times, coeffs.cols)?;
    Ok(crate::linalg::matmul_nt(coeffs, &b))
}
