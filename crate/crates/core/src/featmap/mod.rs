//! Frozen feature maps `φ` from registered grids to fixed embeddings.

mod embfile;
mod encoder;

use serde::{Deserialize, Serialize};

pub use embfile::{EmbeddingTable, MAGIC as EMB_MAGIC};
pub use encoder::{encode, median_heuristic, Encoder, EncoderKind, EncoderSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub dim: usize,
    pub data: Vec<f64>,
    pub source_id: u64,
}

impl FeatureVector {
    pub fn new(data: Vec<f64>, source_id: u64) -> Self {
        Self { dim: data.len(), data, source_id }
    }
}
