//! Classical clustering baselines over raw trajectory values.

mod bspline;
mod dtw;
mod fpca;
mod kmeans;

pub use bspline::{basis_row, bspline_coefficients, bspline_reconstruct, design_matrix, knots};
pub use dtw::{dtw_banded, dtw_distance, dtw_kmedoids, dtw_matrix, kmedoids, KMedoidsResult};
pub use fpca::{fpca, FpcaResult, StandardScaler};
pub use kmeans::{kmeans, objective, KMeansResult};

use crate::dynsys::Dataset;
use crate::error::{param_err, Result};
use crate::linalg::Matrix;
use crate::registration::normalize;

pub const FPCA_COMPONENTS: usize = 30;
pub const BSPLINE_BASIS: usize = 40;

/// `N × T` matrix of trajectory values; all trajectories must share a grid length.
pub fn value_matrix(ds: &Dataset, idx: &[usize]) -> Result<Matrix> {
    let t = ds.grid_size;
    let mut m = Matrix::zeros(idx.len(), t);
    for (r, &i) in idx.iter().enumerate() {
        let v = &ds.trajectories[i].values;
        if v.len() != t {
            return param_err(format!("trajectory {i} has {} samples, expected {t}", v.len()));
        }
        m.row_mut(r).copy_from_slice(v);
    }
    Ok(m)
}

/// FPCA scores of the selected trajectories.
pub fn fpca_features(ds: &Dataset, idx: &[usize], n_components: usize) -> Result<FpcaResult> {
    fpca(&value_matrix(ds, idx)?, n_components)
}

/// Spline coefficients of each trajectory after scaling it to `[−1, 1]`.
pub fn bspline_features(ds: &Dataset, idx: &[usize], n_basis: usize) -> Result<Matrix> {
    let mut values = value_matrix(ds, idx)?;
    for r in 0..values.rows {
        let scaled = normalize(values.row(r));
        values.row_mut(r).copy_from_slice(&scaled);
    }
    let times = &ds.trajectories[*idx.first().unwrap_or(&0)].times;
    bspline_coefficients(&values, times, n_basis)
}
