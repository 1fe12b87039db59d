//! Checkpoint layout: 8-byte magic, u64 header length, JSON header, then a
//! little-endian f32 blob whose per-tensor offsets are listed in the header.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::HeadParams;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const CKPT_MAGIC: &[u8; 8] = b"FNCHEAD1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    /// Offset into the blob, in f32 elements.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub layer_dims: Vec<usize>,
    pub seed: u64,
    pub config: serde_json::Value,
    pub tensors: Vec<TensorEntry>,
}

pub fn encode(params: &HeadParams, seed: u64, config: serde_json::Value) -> Result<Vec<u8>> {
    let mut tensors = Vec::new();
    let mut blob: Vec<u8> = Vec::with_capacity(params.num_params() * 4);
    let mut offset = 0;
    let mut push = |name: String, shape: Vec<usize>, data: &[f64]| {
        tensors.push(TensorEntry { name, shape, offset });
        offset += data.len();
        for v in data {
            blob.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    };
    for (l, (w, b)) in params.weights.iter().zip(&params.biases).enumerate() {
        push(format!("layer{l}.weight"), vec![w.rows, w.cols], &w.data);
        push(format!("layer{l}.bias"), vec![b.len()], b);
    }
    let header = CheckpointHeader { layer_dims: params.layer_dims.clone(), seed, config, tensors };
    let json = serde_json::to_vec(&header)?;
    let mut out = Vec::with_capacity(16 + json.len() + blob.len());
    out.extend_from_slice(CKPT_MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&blob);
    Ok(out)
}

pub fn decode(buf: &[u8]) -> Result<(CheckpointHeader, HeadParams)> {
    if buf.len() < 16 || &buf[..8] != CKPT_MAGIC {
        return Err(Error::Format { offset: 0, msg: "not a head checkpoint".into() });
    }
    let hlen = u64::from_le_bytes(buf[8..16].try_into().unwrap()) as usize;
    let blob_start = 16usize
        .checked_add(hlen)
        .filter(|&e| e <= buf.len())
        .ok_or_else(|| Error::Format { offset: 8, msg: "header length exceeds file".into() })?;
    let header: CheckpointHeader = serde_json::from_slice(&buf[16..blob_start])?;
    let blob = &buf[blob_start..];
    let mut params = HeadParams::zeros(&header.layer_dims)?;
    let read = |entry: &TensorEntry, len: usize| -> Result<Vec<f64>> {
        let (a, b) = (entry.offset * 4, (entry.offset + len) * 4);
        if b > blob.len() {
            return Err(Error::Format { offset: (blob_start + a) as u64, msg: format!("tensor {} truncated", entry.name) });
        }
        Ok(blob[a..b].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect())
    };
    if header.tensors.len() != 2 * params.num_layers() {
        return Err(Error::Shape(format!("expected {} tensors, found {}", 2 * params.num_layers(), header.tensors.len())));
    }
    for l in 0..params.num_layers() {
        let (we, be) = (&header.tensors[2 * l], &header.tensors[2 * l + 1]);
        let (rows, cols) = (params.weights[l].rows, params.weights[l].cols);
        if we.shape != [rows, cols] || be.shape != [rows] {
            return Err(Error::Shape(format!("layer {l} shape does not match layer_dims")));
        }
        params.weights[l] = Matrix::from_vec(rows, cols, read(we, rows * cols)?);
        params.biases[l] = read(be, rows)?;
    }
    params.validate()?;
    Ok((header, params))
}

pub fn save(path: &Path, params: &HeadParams, seed: u64, config: serde_json::Value) -> Result<()> {
    std::fs::write(path, encode(params, seed, config)?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(CheckpointHeader, HeadParams)> {
    decode(&std::fs::read(path)?)
}
