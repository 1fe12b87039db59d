use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};
use crate::linalg::{sq_dist, Matrix};
use crate::rng;

pub const MAX_ITER: usize = 300;
pub const REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub centers: Matrix,
    pub labels: Vec<usize>,
    /// Sum of squared distances to the assigned centers.
    pub objective: f64,
    /// Objective after each assignment step of the winning restart.
    pub trace: Vec<f64>,
}

fn assign(points: &Matrix, centers: &Matrix) -> Vec<(usize, f64)> {
    (0..points.rows)
        .into_par_iter()
        .map(|i| {
            let p = points.row(i);
            let mut best = (0, f64::INFINITY);
            for c in 0..centers.rows {
                let d = sq_dist(p, centers.row(c));
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .collect()
}

fn plus_plus(points: &Matrix, k: usize, s: &mut rng::Stream) -> Matrix {
    let n = points.rows;
    let mut chosen = vec![s.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), points.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut u = s.random_range(0.0..total);
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if u < d {
                    pick = i;
                    break;
                }
                u -= d;
            }
            pick
        } else {
            s.random_range(0..n)
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), points.row(next)));
        }
    }
    points.select_rows(&chosen)
}

fn lloyd(points: &Matrix, mut centers: Matrix) -> KMeansResult {
    let (n, k) = (points.rows, centers.rows);
    let mut trace = Vec::new();
    loop {
        let a = assign(points, &centers);
        let objective: f64 = a.iter().map(|x| x.1).sum();
        let prev = trace.last().copied();
        trace.push(objective);
        let converged = prev.is_some_and(|p: f64| (p - objective) <= REL_TOL * p.max(f64::MIN_POSITIVE));
        if converged || trace.len() >= MAX_ITER {
            let labels = a.iter().map(|x| x.0).collect();
            return KMeansResult { centers, labels, objective, trace };
        }
        let mut sums = Matrix::zeros(k, points.cols);
        let mut counts = vec![0usize; k];
        for (i, (c, _)) in a.iter().enumerate() {
            counts[*c] += 1;
            for (s, v) in sums.row_mut(*c).iter_mut().zip(points.row(i)) {
                *s += v;
            }
        }
        // Empty clusters take the points currently farthest from their centers.
        let mut far: Vec<usize> = (0..n).collect();
        far.sort_by(|&i, &j| a[j].1.total_cmp(&a[i].1).then(i.cmp(&j)));
        let mut far = far.into_iter();
        for c in 0..k {
            if counts[c] == 0 {
                let i = far.next().unwrap();
                sums.row_mut(c).copy_from_slice(points.row(i));
                counts[c] = 1;
            }
            let inv = 1.0 / counts[c] as f64;
            sums.row_mut(c).iter_mut().for_each(|v| *v *= inv);
        }
        centers = sums;
    }
}

/// k-means++ seeding and Lloyd iterations, best of `n_init` restarts.
pub fn kmeans(points: &Matrix, k: usize, n_init: usize, seed: u64) -> Result<KMeansResult> {
    if k == 0 || points.rows < k {
        return param_err(format!("k-means needs 1 ≤ k ≤ N, got k = {k}, N = {}", points.rows));
    }
    if n_init == 0 {
        return param_err("n_init must be positive");
    }
    let mut best: Option<KMeansResult> = None;
    for r in 0..n_init {
        let mut s = rng::substream(seed, &[0x6b6d, r as u64]);
        let res = lloyd(points, plus_plus(points, k, &mut s));
        if best.as_ref().is_none_or(|b| res.objective < b.objective) {
            best = Some(res);
        }
    }
    Ok(best.unwrap())
}

/// `Σ_n min_k ‖x_n − c_k‖²`.
pub fn objective(points: &Matrix, centers: &Matrix) -> f64 {
    assign(points, centers).iter().map(|x| x.1).sum()
}
