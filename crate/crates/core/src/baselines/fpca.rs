use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardScaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl StandardScaler {
    /// Column means and population standard deviations; constant columns get scale 1.
    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows.max(1) as f64;
        let mut mean = vec![0.0; x.cols];
        for r in x.iter_rows() {
            mean.iter_mut().zip(r).for_each(|(m, v)| *m += v / n);
        }
        let mut var = vec![0.0; x.cols];
        for r in x.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        let scale = var.iter().map(|&v| if v > 0.0 { v.sqrt() } else { 1.0 }).collect();
        Self { mean, scale }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpcaResult {
    /// `N × r` principal scores.
    pub scores: Matrix,
    /// `r × T` orthonormal components.
    pub components: Matrix,
    pub singular_values: Vec<f64>,
    /// Set when the data rank was below the requested component count.
    pub rank_deficient: bool,
    pub scaler: StandardScaler,
}

/// Standard-scale each time coordinate, then project onto the leading right
/// singular vectors of the centred data matrix.
pub fn fpca(values: &Matrix, n_components: usize) -> Result<FpcaResult> {
    if n_components == 0 {
        return param_err("n_components must be positive");
    }
    if values.rows <= n_components {
        return param_err(format!("FPCA needs more than {n_components} samples, got {}", values.rows));
    }
    let scaler = StandardScaler::fit(values);
    let x = scaler.transform(values);
    let svd = x.to_nalgebra().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let smax = order.first().map_or(0.0, |&i| svd.singular_values[i]);
    let tol = smax * x.rows.max(x.cols) as f64 * f64::EPSILON;
    let rank = order.iter().filter(|&&i| svd.singular_values[i] > tol).count();
    let r = n_components.min(rank);
    if r < n_components {
        log::warn!("data rank {rank} is below the requested {n_components} components");
    }
    let mut components = Matrix::zeros(r, x.cols);
    let mut singular_values = Vec::with_capacity(r);
    for (c, &i) in order.iter().take(r).enumerate() {
        let row: Vec<f64> = vt.row(i).iter().copied().collect();
        // Fix the sign so the largest-magnitude loading is positive.
        let pivot = row.iter().copied().fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        components.row_mut(c).iter_mut().zip(&row).for_each(|(o, v)| *o = sign * v);
        singular_values.push(svd.singular_values[i]);
    }
    let scores = crate::linalg::matmul_nt(&x, &components);
    Ok(FpcaResult { scores, components, singular_values, rank_deficient: r < n_components, scaler })
}
