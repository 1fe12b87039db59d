use serde::{Deserialize, Serialize};

use super::KernelSpace;
use crate::error::{param_err, Result};
use crate::linalg::Matrix;

/// Relative tolerance under which two center distances count as a tie.
pub const TIE_TOL: f64 = 1e-12;

/// Centers `f_k` as coefficient vectors in the kernel basis, plus the
/// membership threshold γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterGeometry {
    pub centers: Matrix,
    pub gamma: f64,
    /// Pairwise RKHS distances between centers.
    gaps: Matrix,
}

impl ClusterGeometry {
    pub fn new(centers: Matrix, gamma: f64, space: &KernelSpace) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return param_err(format!("gamma must lie in (0, 1), got {gamma}"));
        }
        if centers.cols != space.dim() || centers.rows == 0 {
            return param_err("centers must be K × M coefficient vectors with K ≥ 1");
        }
        let k = centers.rows;
        let mut gaps = Matrix::zeros(k, k);
        for i in 0..k {
            for j in i + 1..k {
                let d = space.distance(centers.row(i), centers.row(j))?;
                if d < 1e-6 {
                    return param_err(format!("centers {i} and {j} are only {d:e} apart"));
                }
                gaps.set(i, j, d);
                gaps.set(j, i, d);
            }
        }
        Ok(Self { centers, gamma, gaps })
    }

    pub fn k(&self) -> usize {
        self.centers.rows
    }

    pub fn min_gap(&self) -> f64 {
        let k = self.k();
        (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).map(|(i, j)| self.gaps.get(i, j)).fold(f64::INFINITY, f64::min)
    }

    pub fn distances(&self, h: &[f64], space: &KernelSpace) -> Result<Vec<f64>> {
        (0..self.k()).map(|k| space.distance(h, self.centers.row(k))).collect()
    }

    /// `{k : ‖h − f_k‖ ≤ min_{j≠k} ‖h − f_j‖}`; near-ties count for every tied center.
    pub fn true_membership(&self, h: &[f64], space: &KernelSpace) -> Result<Vec<usize>> {
        let d = self.distances(h, space)?;
        let best = d.iter().copied().fold(f64::INFINITY, f64::min);
        Ok((0..d.len()).filter(|&k| d[k] <= best + TIE_TOL * (1.0 + best)).collect())
    }

    /// `Ψ_k(h) = min_{i≠k} ‖h − f_i‖ − ‖h − f_k‖`.
    pub fn margin(&self, h: &[f64], k: usize, space: &KernelSpace) -> Result<f64> {
        if self.k() < 2 {
            return param_err("the margin needs at least two centers");
        }
        let d = self.distances(h, space)?;
        Ok(margin_from(&d, k))
    }

    /// Signed distance from `h` to the boundary of the Voronoi cell of `f_k`
    /// measured through its bounding hyperplanes: exact inside the cell,
    /// a lower bound on the distance to the cell outside it.
    pub fn signed_cell_distance(&self, h: &[f64], k: usize, space: &KernelSpace) -> Result<f64> {
        let d = self.distances(h, space)?;
        Ok(self.signed_from(&d, k))
    }

    fn signed_from(&self, d: &[f64], k: usize) -> f64 {
        (0..d.len())
            .filter(|&j| j != k)
            .map(|j| (d[j] * d[j] - d[k] * d[k]) / (2.0 * self.gaps.get(j, k)))
            .fold(f64::INFINITY, f64::min)
    }

    /// `c_k = γ + (1 − γ)·x/(1 + x)` with `x` the distance to the complement
    /// of `C_k` (zero outside the cell).
    pub fn soft_oracle(&self, h: &[f64], space: &KernelSpace) -> Result<Vec<f64>> {
        let d = self.distances(h, space)?;
        Ok((0..self.k())
            .map(|k| {
                let x = self.signed_from(&d, k).max(0.0);
                self.gamma + (1.0 - self.gamma) * x / (1.0 + x)
            })
            .collect())
    }

    /// As [`soft_oracle`](Self::soft_oracle) inside each cell, continued below γ
    /// outside it as `γ − γ·x/(1 + x)`. Used as the regression target.
    pub fn signed_oracle(&self, h: &[f64], space: &KernelSpace) -> Result<Vec<f64>> {
        let d = self.distances(h, space)?;
        Ok((0..self.k())
            .map(|k| {
                let s = self.signed_from(&d, k);
                if self.k() == 1 || s >= 0.0 {
                    let x = if s.is_finite() { s } else { 0.0 };
                    self.gamma + (1.0 - self.gamma) * x / (1.0 + x)
                } else {
                    self.gamma - self.gamma * (-s) / (1.0 - s)
                }
            })
            .collect())
    }
}

pub(crate) fn margin_from(d: &[f64], k: usize) -> f64 {
    let other = (0..d.len()).filter(|&i| i != k).map(|i| d[i]).fold(f64::INFINITY, f64::min);
    other - d[k]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kuratowski::{named_points, Kernel};

    fn setup() -> (KernelSpace, ClusterGeometry) {
        let space = KernelSpace::new(named_points("grid9").unwrap(), Kernel::Gaussian(1.0)).unwrap();
        let mut c = Matrix::zeros(3, 9);
        c.set(0, 0, 1.0);
        c.set(1, 2, 1.0);
        c.set(2, 7, 1.0);
        let g = ClusterGeometry::new(c, 0.5, &space).unwrap();
        (space, g)
    }

    #[test]
    fn membership_examples() {
        let (s, g) = setup();
        assert_eq!(g.true_membership(g.centers.row(1), &s).unwrap(), vec![1]);
        let mid: Vec<f64> = g.centers.row(0).iter().zip(g.centers.row(1)).map(|(a, b)| 0.5 * (a + b)).collect();
        let m = g.true_membership(&mid, &s).unwrap();
        assert!(m.contains(&0) && m.contains(&1));
        assert!(g.margin(&mid, 0, &s).unwrap().abs() < 1e-12);
        let one = ClusterGeometry::new(Matrix::from_vec(1, 9, vec![0.1; 9]), 0.5, &s).unwrap();
        assert_eq!(one.true_membership(&[3.0; 9], &s).unwrap(), vec![0]);
        assert!(one.margin(&[0.0; 9], 0, &s).is_err());
    }

    #[test]
    fn margin_at_center_is_nearest_gap() {
        let (s, g) = setup();
        let m = g.margin(g.centers.row(0), 0, &s).unwrap();
        let nearest = g.gaps.get(0, 1).min(g.gaps.get(0, 2));
        assert!((m - nearest).abs() < 1e-12);
    }

    #[test]
    fn oracle_values() {
        let (s, g) = setup();
        let c = g.soft_oracle(g.centers.row(0), &s).unwrap();
        assert!(c[0] > 0.5);
        assert_eq!(c[1], 0.5);
        assert_eq!(c[2], 0.5);
        let far: Vec<f64> = g.centers.row(0).iter().map(|v| 1e6 * v).collect();
        assert!(g.soft_oracle(&far, &s).unwrap()[0] > 0.999);
        let signed = g.signed_oracle(g.centers.row(0), &s).unwrap();
        assert_eq!(signed[0], c[0]);
        assert!(signed[1] < 0.5 && signed[2] < 0.5 && signed[1] > 0.0);
    }

    #[test]
    fn rejects_coincident_centers() {
        let (s, _) = setup();
        assert!(ClusterGeometry::new(Matrix::zeros(2, 9), 0.5, &s).is_err());
        assert!(ClusterGeometry::new(Matrix::zeros(1, 9), 1.0, &s).is_err());
    }
}
