//! False-positive rates of learned membership sets away from cell boundaries.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::{margin_from, ClusterGeometry};
use super::{named_points, Kernel, KernelSpace};
use crate::clusterhead::{cosine_lr, Adam, AdamConfig, HeadParams};
use crate::error::{param_err, Error, Result};
use crate::linalg::Matrix;
use crate::rng;

pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Nine grid points on `[−1, 1]²`, a unit Gaussian kernel, and three centers
/// placed on kernel sections at `(−1,−1)`, `(1,−1)` and `(0,1)`.
pub fn toy_geometry(gamma: f64) -> Result<(KernelSpace, ClusterGeometry)> {
    let space = KernelSpace::new(named_points("grid9")?, Kernel::Gaussian(1.0))?;
    let mut centers = Matrix::zeros(3, 9);
    for (k, i) in [0, 2, 7].into_iter().enumerate() {
        centers.set(k, i, 1.0);
    }
    let geom = ClusterGeometry::new(centers, gamma, &space)?;
    Ok((space, geom))
}

/// Random convex combinations of the centers plus isotropic coefficient noise.
pub fn sample_probes(geom: &ClusterGeometry, n: usize, noise: f64, seed: u64) -> Matrix {
    let (k, m) = (geom.k(), geom.centers.cols);
    let mut s = rng::substream(seed, &[0x7072_6f62]);
    let mut out = Matrix::zeros(n, m);
    for i in 0..n {
        let w: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut s)).collect();
        let total: f64 = w.iter().sum();
        let row = out.row_mut(i);
        for (c, wc) in w.iter().enumerate() {
            for (r, f) in row.iter_mut().zip(geom.centers.row(c)) {
                *r += wc / total * f;
            }
        }
        for r in row.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut s);
            *r += noise * z;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    /// Induced but not true memberships, over all evaluated `(h, k)` pairs.
    pub fpr: f64,
    /// True but not induced memberships, over the same pairs.
    pub fnr: f64,
    /// Pairs with `|Ψ_k(h)| ≥ ε`.
    pub pairs: usize,
}

/// Compares `σ(logit) ≥ γ` against true membership on pairs with `|Ψ_k| ≥ eps`.
pub fn membership_rates(
    probes: &Matrix,
    logits: &Matrix,
    space: &KernelSpace,
    geom: &ClusterGeometry,
    eps: f64,
) -> Result<Rates> {
    if logits.rows != probes.rows || logits.cols != geom.k() {
        return Err(Error::Shape("one logit row of width K per probe is required".into()));
    }
    let counts: Vec<(usize, usize, usize)> = (0..probes.rows)
        .into_par_iter()
        .map(|i| {
            let d = geom.distances(probes.row(i), space)?;
            let mut c = (0, 0, 0);
            for k in 0..geom.k() {
                let psi = margin_from(&d, k);
                if psi.abs() < eps {
                    continue;
                }
                let truth = psi >= 0.0;
                let induced = logistic(logits.get(i, k)) >= geom.gamma;
                c.0 += 1;
                c.1 += (induced && !truth) as usize;
                c.2 += (truth && !induced) as usize;
            }
            Ok(c)
        })
        .collect::<Result<_>>()?;
    let (pairs, fp, fneg) = counts.iter().fold((0, 0, 0), |a, c| (a.0 + c.0, a.1 + c.1, a.2 + c.2));
    let denom = pairs.max(1) as f64;
    Ok(Rates { fpr: fp as f64 / denom, fnr: fneg as f64 / denom, pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FprConfig {
    pub widths: Vec<usize>,
    /// Number of hidden layers of the given width.
    pub depth: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Standard deviation of the coefficient noise added to probes.
    pub noise: f64,
    /// Defaults to `0.05 · min center gap`.
    pub margin_eps: Option<f64>,
}

impl Default for FprConfig {
    fn default() -> Self {
        Self {
            widths: vec![8, 32, 128],
            depth: 2,
            epochs: 20,
            batch_size: 64,
            lr0: 3e-3,
            n_train: 1000,
            n_test: 3000,
            noise: 0.2,
            margin_eps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FprPoint {
    pub width: usize,
    pub seed: u64,
    pub fpr: f64,
    pub fnr: f64,
    pub pairs: usize,
    /// Training produced non-finite parameters; rates are NaN.
    pub diverged: bool,
}

fn evaluations(space: &KernelSpace, probes: &Matrix) -> Matrix {
    let rows: Vec<Vec<f64>> = (0..probes.rows).into_par_iter().map(|i| space.evaluate(probes.row(i))).collect();
    Matrix::from_rows(&rows)
}

fn targets(space: &KernelSpace, geom: &ClusterGeometry, probes: &Matrix) -> Result<Matrix> {
    let rows: Vec<Vec<f64>> = (0..probes.rows)
        .into_par_iter()
        .map(|i| Ok(geom.signed_oracle(probes.row(i), space)?.into_iter().map(logit).collect()))
        .collect::<Result<_>>()?;
    Ok(Matrix::from_rows(&rows))
}

/// Mean-squared-error regression of the head's logits onto `y`.
fn fit(x: &Matrix, y: &Matrix, dims: &[usize], cfg: &FprConfig, seed: u64) -> Result<HeadParams> {
    let mut params = HeadParams::init(dims, seed)?;
    let mut opt = Adam::new(&params, AdamConfig::default());
    let n = x.rows;
    let per_epoch = n.div_ceil(cfg.batch_size);
    let total = per_epoch * cfg.epochs;
    let mut order: Vec<usize> = (0..n).collect();
    let mut step = 0;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng::substream(seed, &[0x6570, epoch as u64]));
        for idx in order.chunks(cfg.batch_size) {
            let xb = x.select_rows(idx);
            let yb = y.select_rows(idx);
            let fwd = params.forward_batch(&xb)?;
            let scale = 2.0 / (idx.len() * y.cols) as f64;
            let mut dz = fwd.logits.clone();
            for (d, t) in dz.data.iter_mut().zip(&yb.data) {
                *d = scale * (*d - t);
            }
            let g = params.backward(&fwd, &dz)?;
            opt.step(&mut params, &g, cosine_lr(cfg.lr0, step, total));
            step += 1;
        }
    }
    Ok(params)
}

/// One `(width, fpr, fnr)` entry per head width, all trained on the same probes.
pub fn fpr_curve(space: &KernelSpace, geom: &ClusterGeometry, cfg: &FprConfig, seed: u64) -> Result<Vec<FprPoint>> {
    let eps = cfg.margin_eps.unwrap_or(0.05 * geom.min_gap());
    if !(eps > 0.0) {
        return param_err(format!("margin_eps must be positive, got {eps}"));
    }
    if cfg.widths.is_empty() || cfg.widths.contains(&0) || cfg.batch_size == 0 {
        return param_err("widths and batch_size must be positive");
    }
    let train = sample_probes(geom, cfg.n_train, cfg.noise, rng::derive(seed, &[0]));
    let test = sample_probes(geom, cfg.n_test, cfg.noise, rng::derive(seed, &[1]));
    let (xtr, xte) = (evaluations(space, &train), evaluations(space, &test));
    let ytr = targets(space, geom, &train)?;
    let mut out = Vec::with_capacity(cfg.widths.len());
    for &w in &cfg.widths {
        let mut dims = vec![space.dim()];
        dims.extend(std::iter::repeat_n(w, cfg.depth));
        dims.push(geom.k());
        let point = match fit(&xtr, &ytr, &dims, cfg, rng::derive(seed, &[2, w as u64])) {
            Ok(p) if p.is_finite() => {
                let logits = p.forward_batch(&xte)?.logits;
                let r = membership_rates(&test, &logits, space, geom, eps)?;
                FprPoint { width: w, seed, fpr: r.fpr, fnr: r.fnr, pairs: r.pairs, diverged: false }
            }
            Ok(_) | Err(Error::NonFinite { .. }) => {
                log::warn!("training diverged at width {w}");
                FprPoint { width: w, seed, fpr: f64::NAN, fnr: f64::NAN, pairs: 0, diverged: true }
            }
            Err(e) => return Err(e),
        };
        out.push(point);
    }
    Ok(out)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_inverts_logit() {
        for p in [0.1, 0.5, 0.73] {
            assert!((logistic(logit(p)) - p).abs() < 1e-15);
        }
    }

    #[test]
    fn oracle_model_has_no_false_positives() {
        let (space, geom) = toy_geometry(0.5).unwrap();
        let probes = sample_probes(&geom, 400, 0.2, 3);
        let logits = targets(&space, &geom, &probes).unwrap();
        let r = membership_rates(&probes, &logits, &space, &geom, 0.05 * geom.min_gap()).unwrap();
        assert_eq!(r.fpr, 0.0);
        assert_eq!(r.fnr, 0.0);
        assert!(r.pairs > 0);
    }

    #[test]
    fn accept_everything_model() {
        let (space, geom) = toy_geometry(0.5).unwrap();
        let probes = sample_probes(&geom, 600, 0.2, 4);
        let logits = Matrix::from_vec(600, 3, vec![5.0; 1800]);
        // With ε tiny every pair is evaluated and each probe has one true cell.
        let r = membership_rates(&probes, &logits, &space, &geom, 1e-12).unwrap();
        assert_eq!(r.pairs, 1800);
        assert!((r.fpr - 2.0 / 3.0).abs() < 1e-12);
    }
}
