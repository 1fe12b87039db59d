//! Finite-dimensional checks of the sampling and cluster-convergence theory:
//! RKHS elements are kernel combinations over `M` sampling points.

mod fpr;
mod geometry;

pub use fpr::{fpr_curve, logistic, logit, membership_rates, sample_probes, toy_geometry, FprConfig, FprPoint, Rates};
pub use geometry::{ClusterGeometry, TIE_TOL};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::linalg::{sq_dist, Matrix};
use crate::rng;

pub const VALID_KERNELS: &str = "gaussian:<lengthscale>, laplacian:<lengthscale>";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "lengthscale", rename_all = "lowercase")]
pub enum Kernel {
    /// `exp(−‖x−y‖² / (2ℓ²))`
    Gaussian(f64),
    /// `exp(−‖x−y‖ / ℓ)`
    Laplacian(f64),
}

impl Kernel {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let d2 = sq_dist(x, y);
        match *self {
            Kernel::Gaussian(l) => (-d2 / (2.0 * l * l)).exp(),
            Kernel::Laplacian(l) => (-d2.sqrt() / l).exp(),
        }
    }

    pub fn lengthscale(&self) -> f64 {
        match *self {
            Kernel::Gaussian(l) | Kernel::Laplacian(l) => l,
        }
    }

    /// Parses `name:lengthscale`, e.g. `gaussian:1.0`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, ell) = s.split_once(':').unwrap_or((s, "1.0"));
        let ell: f64 = ell
            .trim()
            .parse()
            .map_err(|_| Error::Parameter(format!("bad lengthscale in '{s}'; valid kernels: {VALID_KERNELS}")))?;
        if !(ell > 0.0 && ell.is_finite()) {
            return param_err(format!("lengthscale must be positive in '{s}'"));
        }
        match name.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "rbf" => Ok(Kernel::Gaussian(ell)),
            "laplacian" | "laplace" => Ok(Kernel::Laplacian(ell)),
            other => param_err(format!("unknown kernel '{other}'; valid kernels: {VALID_KERNELS}")),
        }
    }
}

impl std::fmt::Display for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Kernel::Gaussian(l) => write!(f, "gaussian:{l}"),
            Kernel::Laplacian(l) => write!(f, "laplacian:{l}"),
        }
    }
}

/// Sampling points together with their Gram matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpace {
    pub points: Matrix,
    pub kernel: Kernel,
    pub gram: Matrix,
}

impl KernelSpace {
    pub fn new(points: Matrix, kernel: Kernel) -> Result<Self> {
        let m = points.rows;
        if m == 0 {
            return param_err("at least one sampling point is required");
        }
        let mut gram = Matrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = kernel.eval(points.row(i), points.row(j));
                gram.set(i, j, v);
                gram.set(j, i, v);
            }
        }
        let space = Self { points, kernel, gram };
        let (lo, _) = space.eigen_range();
        if lo < -1e-10 {
            return Err(Error::Gram(lo));
        }
        Ok(space)
    }

    pub fn dim(&self) -> usize {
        self.points.rows
    }

    /// Smallest and largest eigenvalues of the (symmetrised) Gram matrix.
    pub fn eigen_range(&self) -> (f64, f64) {
        let g = self.gram.to_nalgebra();
        let sym = (&g + g.transpose()) * 0.5;
        let ev = sym.symmetric_eigenvalues();
        (ev.min(), ev.max())
    }

    /// `G·a`: the values of `f = Σ a_i κ(·, x_i)` at the sampling points.
    pub fn evaluate(&self, a: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|i| crate::linalg::dot(self.gram.row(i), a)).collect()
    }

    fn quad(&self, a: &[f64]) -> f64 {
        crate::linalg::dot(a, &self.evaluate(a))
    }

    /// `√(aᵀGa)`.
    pub fn rkhs_norm(&self, a: &[f64]) -> Result<f64> {
        if a.len() != self.dim() {
            return Err(Error::Shape(format!("{} coefficients for {} points", a.len(), self.dim())));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return param_err("non-finite coefficients");
        }
        let q = self.quad(a);
        if q < -1e-10 {
            return Err(Error::Gram(q));
        }
        Ok(q.max(0.0).sqrt())
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.rkhs_norm(&diff)
    }
}

/// Named point sets: `gridN` (N a perfect square) is a uniform grid on
/// `[−1, 1]²`, `lineN` is N equispaced points on `[−1, 1]`.
pub fn named_points(name: &str) -> Result<Matrix> {
    let bad = || Error::Parameter(format!("unknown point set '{name}'; use gridN (N square) or lineN"));
    if let Some(n) = name.strip_prefix("grid") {
        let n: usize = n.parse().map_err(|_| bad())?;
        let side = (n as f64).sqrt().round() as usize;
        if side * side != n || side < 1 {
            return Err(bad());
        }
        let coord = |i: usize| if side == 1 { 0.0 } else { -1.0 + 2.0 * i as f64 / (side - 1) as f64 };
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![coord(i % side), coord(i / side)]).collect();
        return Ok(Matrix::from_rows(&rows));
    }
    if let Some(n) = name.strip_prefix("line") {
        let n: usize = n.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        return Ok(Matrix::from_vec(n, 1, crate::dynsys::linspace(-1.0, 1.0, n)));
    }
    Err(bad())
}

/// `m` points uniform on `[−1, 1]^d`.
pub fn random_points(m: usize, d: usize, seed: u64) -> Matrix {
    let mut s = rng::substream(seed, &[0x7074]);
    Matrix::from_vec(m, d, (0..m * d).map(|_| s.random_range(-1.0..1.0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    /// Smallest and largest observed `‖f‖_Λ / ‖f‖` over the probes.
    pub c_low: f64,
    pub c_high: f64,
    /// `√λ_min(G)` and `√λ_max(G)`.
    pub exact_low: f64,
    pub exact_high: f64,
    /// False when `λ_min(G) < 1e−12`: the points do not form a sampling set.
    pub sampling: bool,
}

/// Empirical frame constants from `n_probes` random coefficient vectors plus
/// the structured probes `e_i` and `e_i ± e_j`.
pub fn estimate_frame_bounds(space: &KernelSpace, n_probes: usize, seed: u64) -> Result<FrameBounds> {
    if n_probes < 100 {
        return param_err(format!("at least 100 probes are required, got {n_probes}"));
    }
    let m = space.dim();
    let mut s = rng::substream(seed, &[0x6672]);
    let mut probes: Vec<Vec<f64>> = (0..n_probes).map(|_| (0..m).map(|_| s.random_range(-1.0..1.0)).collect()).collect();
    for i in 0..m.min(64) {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        probes.push(e);
        for j in i + 1..m.min(64) {
            for sign in [1.0, -1.0] {
                let mut e = vec![0.0; m];
                e[i] = 1.0;
                e[j] = sign;
                probes.push(e);
            }
        }
    }
    let (lmin, lmax) = space.eigen_range();
    let exact_low = lmin.max(0.0).sqrt();
    let exact_high = lmax.max(0.0).sqrt();
    let sampling = lmin >= 1e-12;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for a in &probes {
        let ga = space.evaluate(a);
        let q = crate::linalg::dot(a, &ga);
        if q <= 0.0 {
            continue;
        }
        let r = (crate::linalg::dot(&ga, &ga) / q).sqrt();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if !sampling {
        log::warn!("Gram matrix is numerically singular (λ_min = {lmin:e}); the points are not a sampling set");
        lo = exact_low;
    }
    Ok(FrameBounds { c_low: lo, c_high: hi, exact_low, exact_high, sampling })
}
