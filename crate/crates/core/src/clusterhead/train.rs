//! Mini-batch training of the head on two augmented views per sample.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::{logit_gradients, softmax_rows, AssignmentMatrix, LossConfig, LossParts, LossTerms, Reduction};
use super::mlp::{layer_dims, HeadParams, DEFAULT_HIDDEN};
use super::optim::{cosine_lr, Adam, AdamConfig};
use crate::error::{param_err, Error, Result};
use crate::featmap::Encoder;
use crate::linalg::Matrix;
use crate::registration::{augment, RasterImage};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub k: usize,
    pub seed: u64,
    pub loss_reduction: Reduction,
    pub symmetric_ce: bool,
    pub terms: LossTerms,
    pub hidden: Vec<usize>,
    pub adam: AdamConfig,
    /// When false both views are the un-augmented image.
    pub augment: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            epochs: 50,
            batch_size: 512,
            lr0: 1e-3,
            k: 6,
            seed: 0,
            loss_reduction: Reduction::Mean,
            symmetric_ce: true,
            terms: LossTerms::default(),
            hidden: DEFAULT_HIDDEN.to_vec(),
            adam: AdamConfig::default(),
            augment: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return param_err(format!("alpha must be a finite non-negative number, got {}", self.alpha));
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return param_err(format!("lr0 must be positive, got {}", self.lr0));
        }
        if self.k < 2 {
            return param_err(format!("k must be at least 2, got {}", self.k));
        }
        if self.batch_size == 0 {
            return param_err("batch_size must be positive");
        }
        if self.hidden.contains(&0) {
            return param_err("hidden widths must be positive");
        }
        Ok(())
    }

    pub fn loss(&self) -> LossConfig {
        LossConfig { alpha: self.alpha, reduction: self.loss_reduction, symmetric_ce: self.symmetric_ce, terms: self.terms }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Batch means of each loss component.
    pub loss: LossParts,
    pub lr: f64,
    /// Largest hard-cluster share over the first view of every batch.
    pub max_cluster_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trained {
    pub params: HeadParams,
    pub history: Vec<EpochStats>,
}

fn views(images: &[RasterImage], idx: &[usize], seed: u64, epoch: usize, view: u64, on: bool) -> Vec<RasterImage> {
    idx.par_iter()
        .map(|&i| {
            if on {
                augment(&images[i], &mut rng::substream(seed, &[0x6175_67, epoch as u64, i as u64, view]))
            } else {
                images[i].clone()
            }
        })
        .collect()
}

/// Trains a fresh head on `images` (with matching `ids`) through a frozen encoder.
pub fn train(images: &[RasterImage], ids: &[u64], encoder: &Encoder, cfg: &TrainConfig) -> Result<Trained> {
    cfg.validate()?;
    if images.len() != ids.len() {
        return Err(Error::Shape("one id per image is required".into()));
    }
    let dims = layer_dims(encoder.dim(), &cfg.hidden, cfg.k);
    let mut params = HeadParams::init(&dims, cfg.seed)?;
    let mut history = Vec::with_capacity(cfg.epochs);
    if cfg.epochs == 0 || images.is_empty() {
        return Ok(Trained { params, history });
    }
    let loss_cfg = cfg.loss();
    let mut opt = Adam::new(&params, cfg.adam);
    let n = images.len();
    let per_epoch = n.div_ceil(cfg.batch_size);
    let total_steps = per_epoch * cfg.epochs;
    let mut order: Vec<usize> = (0..n).collect();
    let mut step = 0;

    for epoch in 0..cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng::substream(cfg.seed, &[0x7368_7566, epoch as u64]));
        let mut sums = LossParts::default();
        let mut counts = vec![0usize; cfg.k];
        let mut lr = 0.0;
        for (b, idx) in order.chunks(cfg.batch_size).enumerate() {
            let batch_ids: Vec<u64> = idx.iter().map(|&i| ids[i]).collect();
            let va = views(images, idx, cfg.seed, epoch, 0, cfg.augment);
            let vb = views(images, idx, cfg.seed, epoch, 1, cfg.augment);
            // Both views go through the encoder together; rows are encoded independently.
            let both = encoder.encode_batch(&va.iter().chain(&vb).collect::<Vec<_>>(), &[&batch_ids[..], &batch_ids].concat())?;
            let ha = both.select_rows(&(0..idx.len()).collect::<Vec<_>>());
            let hb = both.select_rows(&(idx.len()..2 * idx.len()).collect::<Vec<_>>());
            let fa = params.forward_batch(&ha)?;
            let fb = params.forward_batch(&hb)?;
            let (parts, da, db) = logit_gradients(&fa.logits, &fb.logits, &loss_cfg)?;
            if !parts.total.is_finite() {
                return Err(Error::NanLoss { epoch, batch: b });
            }
            let mut grads = params.backward(&fa, &da)?;
            grads.add_scaled(&params.backward(&fb, &db)?, 1.0);
            lr = cosine_lr(cfg.lr0, step, total_steps);
            opt.step(&mut params, &grads, lr);
            step += 1;

            for k in softmax_rows(&fa.logits).argmax() {
                counts[k] += 1;
            }
            sums.consistency += parts.consistency;
            sums.confidence += parts.confidence;
            sums.entropy += parts.entropy;
            sums.total += parts.total;
        }
        let m = per_epoch as f64;
        let loss = LossParts {
            consistency: sums.consistency / m,
            confidence: sums.confidence / m,
            entropy: sums.entropy / m,
            total: sums.total / m,
        };
        let max_cluster_share = *counts.iter().max().unwrap() as f64 / n as f64;
        log::debug!("epoch {epoch}: loss {:.5} share {max_cluster_share:.3}", loss.total);
        history.push(EpochStats { epoch, loss, lr, max_cluster_share });
    }
    Ok(Trained { params, history })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub assign: AssignmentMatrix,
    pub labels: Vec<usize>,
    /// Row-major `N × K`; entry `(i, k)` is `assign[i, k] ≥ γ`.
    pub mask: Vec<bool>,
}

impl Inference {
    pub fn from_assign(assign: AssignmentMatrix, gamma: f64) -> Self {
        let labels = assign.argmax();
        let mask = assign.data.iter().map(|&v| v >= gamma).collect();
        Self { assign, labels, mask }
    }

    pub fn max_cluster_share(&self) -> f64 {
        self.assign.max_cluster_share()
    }
}

/// Soft assignments for precomputed features.
pub fn infer_features(features: &Matrix, params: &HeadParams, gamma: f64) -> Result<Inference> {
    let fwd = params.forward_batch(features)?;
    Ok(Inference::from_assign(softmax_rows(&fwd.logits), gamma))
}

/// Encodes un-augmented images in chunks and assigns them.
pub fn infer(images: &[RasterImage], ids: &[u64], encoder: &Encoder, params: &HeadParams, gamma: f64) -> Result<Inference> {
    let feats = encode_all(images, ids, encoder)?;
    infer_features(&feats, params, gamma)
}

/// Frozen features for every image, encoded in bounded-size chunks.
pub fn encode_all(images: &[RasterImage], ids: &[u64], encoder: &Encoder) -> Result<Matrix> {
    const CHUNK: usize = 256;
    let mut out = Matrix::zeros(images.len(), encoder.dim());
    for (c, (imgs, chunk_ids)) in images.chunks(CHUNK).zip(ids.chunks(CHUNK)).enumerate() {
        let m = encoder.encode_batch(&imgs.iter().collect::<Vec<_>>(), chunk_ids)?;
        let start = c * CHUNK * out.cols;
        out.data[start..start + m.data.len()].copy_from_slice(&m.data);
    }
    Ok(out)
}
