//! The clustering objective `L_e + L_con − α·H(Y)` and its gradient with
//! respect to the logits of both views.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Floor applied inside every logarithm.
pub const LOG_FLOOR: f64 = 1e-12;

fn ln_clamped(x: f64) -> f64 {
    x.max(LOG_FLOOR).ln()
}

/// Row-stochastic soft assignments, `N × K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl AssignmentMatrix {
    /// Checks row sums; entries must lie in `[0, 1]`.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let a = Self { rows, cols, data };
        a.validate()?;
        Ok(a)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged assignment rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Shape(format!("{}×{} assignment with {} entries", self.rows, self.cols, self.data.len())));
        }
        for i in 0..self.rows {
            let r = self.row(i);
            if r.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Domain(format!("assignment row {i} has entries outside [0, 1]")));
            }
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > 1e-6 {
                return Err(Error::Domain(format!("assignment row {i} sums to {s}")));
            }
        }
        Ok(())
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn argmax(&self) -> Vec<usize> {
        (0..self.rows)
            .map(|i| {
                let r = self.row(i);
                let mut best = 0;
                for k in 1..r.len() {
                    if r[k] > r[best] {
                        best = k;
                    }
                }
                best
            })
            .collect()
    }

    /// Column means `P_k = (1/N) Σ_i y_ik`.
    pub fn marginal(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (pk, v) in p.iter_mut().zip(self.row(i)) {
                *pk += v;
            }
        }
        let n = self.rows.max(1) as f64;
        p.iter_mut().for_each(|v| *v /= n);
        p
    }

    /// Fraction of rows whose argmax is the most popular cluster.
    pub fn max_cluster_share(&self) -> f64 {
        if self.rows == 0 {
            return 0.0;
        }
        let mut counts = vec![0usize; self.cols];
        for k in self.argmax() {
            counts[k] += 1;
        }
        *counts.iter().max().unwrap() as f64 / self.rows as f64
    }
}

/// Numerically stable row-wise softmax.
pub fn softmax_rows(z: &Matrix) -> AssignmentMatrix {
    let mut data = z.data.clone();
    for row in data.chunks_mut(z.cols.max(1)) {
        softmax_in_place(row);
    }
    AssignmentMatrix { rows: z.rows, cols: z.cols, data }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let mut v = z.to_vec();
    softmax_in_place(&mut v);
    v
}

fn softmax_in_place(row: &mut [f64]) {
    let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in row.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    row.iter_mut().for_each(|v| *v /= s);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    Sum,
    #[default]
    Mean,
}

/// Which of the three loss terms are active (used by the ablation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossTerms {
    pub consistency: bool,
    pub confidence: bool,
    pub entropy: bool,
}

impl Default for LossTerms {
    fn default() -> Self {
        Self { consistency: true, confidence: true, entropy: true }
    }
}

impl LossTerms {
    /// The seven non-empty on/off combinations, full objective first.
    pub fn all_combinations() -> Vec<LossTerms> {
        let mut out = Vec::with_capacity(7);
        for mask in (1u8..8).rev() {
            out.push(LossTerms { consistency: mask & 4 != 0, confidence: mask & 2 != 0, entropy: mask & 1 != 0 });
        }
        out
    }

    pub fn label(&self) -> String {
        let f = |b: bool| if b { '1' } else { '0' };
        format!("Le{}_Lcon{}_H{}", f(self.consistency), f(self.confidence), f(self.entropy))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub alpha: f64,
    pub reduction: Reduction,
    pub symmetric_ce: bool,
    pub terms: LossTerms,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { alpha: 1.0, reduction: Reduction::Mean, symmetric_ce: true, terms: LossTerms::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossParts {
    pub consistency: f64,
    pub confidence: f64,
    pub entropy: f64,
    pub total: f64,
}

fn check_pair(ya: &AssignmentMatrix, yb: &AssignmentMatrix) -> Result<()> {
    if ya.rows != yb.rows || ya.cols != yb.cols {
        return Err(Error::Shape(format!("views are {}×{} and {}×{}", ya.rows, ya.cols, yb.rows, yb.cols)));
    }
    Ok(())
}

fn reduction_scale(reduction: Reduction, n: usize) -> f64 {
    match reduction {
        Reduction::Sum => 1.0,
        Reduction::Mean => 1.0 / n.max(1) as f64,
    }
}

fn cross_entropy(ya: &AssignmentMatrix, yb: &AssignmentMatrix) -> f64 {
    -ya.data.iter().zip(&yb.data).map(|(a, b)| a * ln_clamped(*b)).sum::<f64>()
}

/// One-directional `L_e(a → b) = −Σ Ya·ln Yb`.
pub fn loss_consistency(ya: &AssignmentMatrix, yb: &AssignmentMatrix, reduction: Reduction) -> Result<f64> {
    check_pair(ya, yb)?;
    if let Some(v) = yb.data.iter().find(|&&v| v <= 0.0) {
        return Err(Error::Domain(format!("log of non-positive assignment {v}")));
    }
    Ok(cross_entropy(ya, yb) * reduction_scale(reduction, ya.rows))
}

/// `L_con = −ln((1/N) Σ ⟨Ya_i, Yb_i⟩)`.
pub fn loss_confidence(ya: &AssignmentMatrix, yb: &AssignmentMatrix) -> Result<f64> {
    check_pair(ya, yb)?;
    Ok(-ln_clamped(mean_agreement(ya, yb)))
}

fn mean_agreement(ya: &AssignmentMatrix, yb: &AssignmentMatrix) -> f64 {
    let dot: f64 = ya.data.iter().zip(&yb.data).map(|(a, b)| a * b).sum();
    dot / ya.rows.max(1) as f64
}

fn entropy_of(p: &[f64]) -> f64 {
    -p.iter().map(|&v| if v > 0.0 { v * ln_clamped(v) } else { 0.0 }).sum::<f64>()
}

/// `H(Y) = H(P^a) + H(P^b)` over the batch marginals.
pub fn marginal_entropy(ya: &AssignmentMatrix, yb: &AssignmentMatrix) -> Result<f64> {
    check_pair(ya, yb)?;
    Ok(entropy_of(&ya.marginal()) + entropy_of(&yb.marginal()))
}

/// Evaluates every term of the objective; inactive terms report 0.
pub fn loss_total(ya: &AssignmentMatrix, yb: &AssignmentMatrix, cfg: &LossConfig) -> Result<LossParts> {
    check_pair(ya, yb)?;
    let r = reduction_scale(cfg.reduction, ya.rows);
    let t = cfg.terms;
    let consistency = if !t.consistency {
        0.0
    } else if cfg.symmetric_ce {
        0.5 * r * (cross_entropy(ya, yb) + cross_entropy(yb, ya))
    } else {
        r * cross_entropy(ya, yb)
    };
    let confidence = if t.confidence { -ln_clamped(mean_agreement(ya, yb)) } else { 0.0 };
    let entropy = if t.entropy { entropy_of(&ya.marginal()) + entropy_of(&yb.marginal()) } else { 0.0 };
    let total = consistency + confidence - cfg.alpha * entropy;
    Ok(LossParts { consistency, confidence, entropy, total })
}

/// Loss and its gradient with respect to the logits `za`, `zb` of both views.
pub fn logit_gradients(za: &Matrix, zb: &Matrix, cfg: &LossConfig) -> Result<(LossParts, Matrix, Matrix)> {
    let ya = softmax_rows(za);
    let yb = softmax_rows(zb);
    let parts = loss_total(&ya, &yb, cfg)?;
    let (n, k) = (ya.rows, ya.cols);
    let mut ga = vec![0.0; n * k];
    let mut gb = vec![0.0; n * k];
    let r = reduction_scale(cfg.reduction, n);
    let t = cfg.terms;

    if t.consistency {
        // d/dY of −w·Σ Yx·ln Ŷy, with the clamp killing the gradient below the floor.
        let ce = |w: f64, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]| {
            for j in 0..x.len() {
                gx[j] -= w * ln_clamped(y[j]);
                if y[j] > LOG_FLOOR {
                    gy[j] -= w * x[j] / y[j];
                }
            }
        };
        if cfg.symmetric_ce {
            ce(0.5 * r, &ya.data, &yb.data, &mut ga, &mut gb);
            ce(0.5 * r, &yb.data, &ya.data, &mut gb, &mut ga);
        } else {
            ce(r, &ya.data, &yb.data, &mut ga, &mut gb);
        }
    }
    if t.confidence {
        let m = mean_agreement(&ya, &yb);
        if m > LOG_FLOOR {
            let w = 1.0 / (m * n as f64);
            for j in 0..n * k {
                ga[j] -= w * yb.data[j];
                gb[j] -= w * ya.data[j];
            }
        }
    }
    if t.entropy && cfg.alpha != 0.0 {
        for (y, g) in [(&ya, &mut ga), (&yb, &mut gb)] {
            let p = y.marginal();
            // −α·H contributes α·(ln P̂_k + [P_k > floor]) / N per entry.
            let dp: Vec<f64> = p
                .iter()
                .map(|&v| cfg.alpha * (ln_clamped(v) + if v > LOG_FLOOR { 1.0 } else { 0.0 }) / n as f64)
                .collect();
            for i in 0..n {
                for c in 0..k {
                    g[i * k + c] += dp[c];
                }
            }
        }
    }

    let to_logits = |y: &AssignmentMatrix, g: &[f64]| {
        let mut dz = Matrix::zeros(n, k);
        for i in 0..n {
            let yr = y.row(i);
            let gr = &g[i * k..(i + 1) * k];
            let inner: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
            for c in 0..k {
                dz.data[i * k + c] = yr[c] * (gr[c] - inner);
            }
        }
        dz
    };
    Ok((parts, to_logits(&ya, &ga), to_logits(&yb, &gb)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn am(rows: &[&[f64]]) -> AssignmentMatrix {
        AssignmentMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn softmax_closed_form() {
        let s = softmax(&[3f64.ln(), 0.0]);
        assert!((s[0] - 0.75).abs() < 1e-15 && (s[1] - 0.25).abs() < 1e-15);
        let shifted = softmax(&[3f64.ln() + 17.0, 17.0]);
        assert!((shifted[0] - s[0]).abs() < 1e-15);
        assert_eq!(softmax(&[0.0; 4]), vec![0.25; 4]);
    }

    #[test]
    fn consistency_values() {
        let u = am(&[&[0.5, 0.5]]);
        assert!((loss_consistency(&u, &u, Reduction::Sum).unwrap() - LN2).abs() < 1e-15);
        let one_hot = am(&[&[1.0, 0.0]]);
        assert!((loss_consistency(&one_hot, &u, Reduction::Sum).unwrap() - LN2).abs() < 1e-15);
        let eps = 1e-9;
        let c = am(&[&[1.0 - eps, eps]]);
        assert!(loss_consistency(&c, &c, Reduction::Sum).unwrap() < 1e-7);
        assert!(matches!(loss_consistency(&u, &one_hot, Reduction::Sum), Err(Error::Domain(_))));
        let u2 = am(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!((loss_consistency(&u2, &u2, Reduction::Mean).unwrap() - LN2).abs() < 1e-15);
    }

    #[test]
    fn confidence_values() {
        let oh = am(&[&[1.0, 0.0]]);
        assert_eq!(loss_confidence(&oh, &oh).unwrap(), 0.0);
        let u = am(&[&[0.5, 0.5]]);
        assert!((loss_confidence(&u, &u).unwrap() - LN2).abs() < 1e-15);
        let other = am(&[&[0.0, 1.0]]);
        assert!((loss_confidence(&oh, &other).unwrap() - 27.631021115928547).abs() < 1e-9);
    }

    #[test]
    fn entropy_values() {
        let u = am(&[&[0.5, 0.5]]);
        assert!((marginal_entropy(&u, &u).unwrap() - 2.0 * LN2).abs() < 1e-15);
        let c = am(&[&[1.0, 0.0], &[1.0, 0.0]]);
        assert_eq!(marginal_entropy(&c, &c).unwrap(), 0.0);
        let u4 = am(&[&[0.25; 4]]);
        assert!((marginal_entropy(&u4, &u4).unwrap() - 2.0 * 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn total_values() {
        let u = am(&[&[0.5, 0.5]]);
        let cfg = LossConfig { alpha: 1.0, reduction: Reduction::Sum, symmetric_ce: false, ..Default::default() };
        assert!(loss_total(&u, &u, &cfg).unwrap().total.abs() < 1e-15);
        let c = am(&[&[1.0, 0.0]]);
        assert_eq!(loss_total(&c, &c, &cfg).unwrap().total, 0.0);
        let y = am(&[&[0.7, 0.3], &[0.2, 0.8]]);
        let p = loss_total(&y, &y, &LossConfig { alpha: 0.0, ..cfg }).unwrap();
        assert_eq!(p.total, p.consistency + p.confidence);
    }

    #[test]
    fn ablation_combinations() {
        let all = LossTerms::all_combinations();
        assert_eq!(all.len(), 7);
        assert_eq!(all[0], LossTerms::default());
        assert!(all.iter().all(|t| t.consistency || t.confidence || t.entropy));
    }

    #[test]
    fn uniform_assignments_are_entropy_critical() {
        let z = Matrix::zeros(4, 3);
        let cfg = LossConfig {
            terms: LossTerms { consistency: false, confidence: false, entropy: true },
            ..Default::default()
        };
        let (_, da, db) = logit_gradients(&z, &z, &cfg).unwrap();
        assert!(da.data.iter().chain(&db.data).all(|v| v.abs() < 1e-15));
    }
}
