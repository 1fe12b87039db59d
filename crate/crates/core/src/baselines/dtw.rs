use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};
use crate::linalg::Matrix;
use crate::rng;

/// DTW with squared local cost and the symmetric (1,0)/(0,1)/(1,1) step
/// pattern; returns the square root of the accumulated cost.
pub fn dtw_distance(a: &[f64], b: &[f64]) -> f64 {
    dtw_banded(a, b, None)
}

/// As [`dtw_distance`], optionally restricted to a Sakoe–Chiba band of the
/// given half-width (widened to cover the length difference).
pub fn dtw_banded(a: &[f64], b: &[f64], window: Option<usize>) -> f64 {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return if n == m { 0.0 } else { f64::INFINITY };
    }
    let w = window.map_or(n.max(m), |w| w.max(n.abs_diff(m)));
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 1..=n {
        cur.fill(f64::INFINITY);
        let lo = i.saturating_sub(w).max(1);
        let hi = (i + w).min(m);
        for j in lo..=hi {
            let d = a[i - 1] - b[j - 1];
            cur[j] = d * d + prev[j].min(cur[j - 1]).min(prev[j - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m].sqrt()
}

/// Symmetric pairwise DTW distance matrix.
pub fn dtw_matrix(series: &[Vec<f64>], window: Option<usize>) -> Matrix {
    let n = series.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| if j > i { dtw_banded(&series[i], &series[j], window) } else { 0.0 }).collect())
        .collect();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            d.set(i, j, rows[i][j]);
            d.set(j, i, rows[i][j]);
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMedoidsResult {
    pub medoids: Vec<usize>,
    pub labels: Vec<usize>,
    pub cost: f64,
}

fn evaluate(dist: &Matrix, medoids: &[usize]) -> (Vec<usize>, f64) {
    let mut cost = 0.0;
    let labels = (0..dist.rows)
        .map(|i| {
            let (mut best, mut bd) = (0, f64::INFINITY);
            for (c, &m) in medoids.iter().enumerate() {
                let d = dist.get(i, m);
                if d < bd {
                    (best, bd) = (c, d);
                }
            }
            cost += bd;
            best
        })
        .collect();
    (labels, cost)
}

fn pam(dist: &Matrix, mut medoids: Vec<usize>) -> KMedoidsResult {
    let n = dist.rows;
    let (_, mut cost) = evaluate(dist, &medoids);
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for slot in 0..medoids.len() {
            for cand in 0..n {
                if medoids.contains(&cand) {
                    continue;
                }
                let mut trial = medoids.clone();
                trial[slot] = cand;
                let (_, c) = evaluate(dist, &trial);
                if c < best.map_or(cost, |b| b.2) - 1e-12 * cost.abs().max(1.0) {
                    best = Some((slot, cand, c));
                }
            }
        }
        match best {
            Some((slot, cand, c)) => {
                medoids[slot] = cand;
                cost = c;
            }
            None => break,
        }
    }
    let (labels, cost) = evaluate(dist, &medoids);
    KMedoidsResult { medoids, labels, cost }
}

/// PAM k-medoids on a precomputed distance matrix, best of `n_init` random starts.
pub fn kmedoids(dist: &Matrix, k: usize, n_init: usize, seed: u64) -> Result<KMedoidsResult> {
    if k == 0 || dist.rows < k || dist.rows != dist.cols {
        return param_err(format!("k-medoids needs a square matrix with N ≥ k ≥ 1 (k = {k}, N = {})", dist.rows));
    }
    let mut best: Option<KMedoidsResult> = None;
    for r in 0..n_init.max(1) {
        let mut s = rng::substream(seed, &[0x706d, r as u64]);
        let start = sample(&mut s, dist.rows, k).into_vec();
        let res = pam(dist, start);
        if best.as_ref().is_none_or(|b| res.cost < b.cost) {
            best = Some(res);
        }
    }
    Ok(best.unwrap())
}

/// DTW distance matrix followed by k-medoids.
pub fn dtw_kmedoids(series: &[Vec<f64>], k: usize, n_init: usize, seed: u64, window: Option<usize>) -> Result<KMedoidsResult> {
    kmedoids(&dtw_matrix(series, window), k, n_init, seed)
}
