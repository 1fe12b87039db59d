//! The trainable clustering head, its objective and the training loop.

pub mod checkpoint;
mod loss;
mod mlp;
mod optim;
mod train;

pub use loss::{
    logit_gradients, loss_confidence, loss_consistency, loss_total, marginal_entropy, softmax, softmax_rows,
    AssignmentMatrix, LossConfig, LossParts, LossTerms, Reduction, LOG_FLOOR,
};
pub use mlp::{layer_dims, Forward, HeadParams, DEFAULT_HIDDEN};
pub use optim::{cosine_lr, Adam, AdamConfig};
pub use train::{encode_all, infer, infer_features, train, EpochStats, Inference, TrainConfig, Trained};

use crate::error::Result;
use crate::featmap::FeatureVector;

/// Logits and soft assignment for a single feature vector.
pub fn forward(h: &FeatureVector, params: &HeadParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let x = crate::linalg::Matrix::from_vec(1, h.data.len(), h.data.clone());
    let f = params.forward_batch(&x)?;
    let assign = softmax(&f.logits.data);
    Ok((f.logits.data, assign))
}

/// Loss and parameter gradient for one pair of feature batches.
pub fn loss_and_grad(
    params: &HeadParams,
    ha: &crate::linalg::Matrix,
    hb: &crate::linalg::Matrix,
    cfg: &LossConfig,
) -> Result<(LossParts, HeadParams)> {
    let fa = params.forward_batch(ha)?;
    let fb = params.forward_batch(hb)?;
    let (parts, da, db) = logit_gradients(&fa.logits, &fb.logits, cfg)?;
    let mut g = params.backward(&fa, &da)?;
    g.add_scaled(&params.backward(&fb, &db)?, 1.0);
    Ok((parts, g))
}
