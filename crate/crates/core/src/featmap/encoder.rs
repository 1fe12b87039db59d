use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::linalg::{sgemm_nn, sgemm_nt, Matrix};
use crate::registration::RasterImage;
use crate::rng;

use super::{EmbeddingTable, FeatureVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    /// Flattened pixels, `D = S`.
    Pixels,
    /// Random Fourier features of a Gaussian kernel on pixel space.
    Rff,
    /// Random two-layer tanh network.
    FrozenMlp,
    /// Precomputed embeddings looked up by trajectory id.
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub kind: EncoderKind,
    pub dim: usize,
    pub seed: u64,
    /// Kind-specific parameters, e.g. `lengthscale` for RFF.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl EncoderSpec {
    pub fn pixels() -> Self {
        Self { kind: EncoderKind::Pixels, dim: 0, seed: 0, params: BTreeMap::new(), path: None }
    }

    pub fn rff(dim: usize, lengthscale: f64, seed: u64) -> Self {
        let mut params = BTreeMap::new();
        params.insert("lengthscale".to_string(), lengthscale);
        Self { kind: EncoderKind::Rff, dim, seed, params, path: None }
    }

    pub fn frozen_mlp(dim: usize, seed: u64) -> Self {
        Self { kind: EncoderKind::FrozenMlp, dim, seed, params: BTreeMap::new(), path: None }
    }

    pub fn external(path: impl Into<PathBuf>) -> Self {
        Self { kind: EncoderKind::External, dim: 0, seed: 0, params: BTreeMap::new(), path: Some(path.into()) }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            EncoderKind::External if self.path.is_none() => param_err("external encoder needs an embedding file"),
            EncoderKind::Rff | EncoderKind::FrozenMlp if self.dim == 0 => {
                param_err("encoder output dimension must be positive")
            }
            EncoderKind::Rff => match self.params.get("lengthscale") {
                Some(l) if *l > 0.0 && l.is_finite() => Ok(()),
                _ => param_err("rff encoder needs a positive `lengthscale`"),
            },
            _ => Ok(()),
        }
    }
}

/// A materialised feature map with its frozen weights.
#[derive(Debug, Clone)]
pub enum Encoder {
    Pixels { input: usize },
    Rff { weights: Vec<f32>, phases: Vec<f64>, dim: usize, input: usize },
    FrozenMlp { w1: Vec<f32>, b1: Vec<f64>, w2: Matrix, b2: Vec<f64>, dim: usize, input: usize },
    External(EmbeddingTable),
    /// Another encoder followed by a fixed per-coordinate affine map.
    Standardized { inner: Box<Encoder>, mean: Vec<f64>, inv_std: Vec<f64> },
}

impl Encoder {
    /// Build the encoder for images of `input_dim = res²` pixels.
    pub fn build(spec: &EncoderSpec, input_dim: usize) -> Result<Self> {
        spec.validate()?;
        Ok(match spec.kind {
            EncoderKind::Pixels => Encoder::Pixels { input: input_dim },
            EncoderKind::Rff => {
                let ell = spec.params["lengthscale"];
                let mut s = rng::substream(spec.seed, &[0x7266_66]);
                // Drawn feature by feature, stored pixel-major.
                let mut weights = vec![0f32; spec.dim * input_dim];
                for j in 0..spec.dim {
                    for p in 0..input_dim {
                        let z: f64 = StandardNormal.sample(&mut s);
                        weights[p * spec.dim + j] = (z / ell) as f32;
                    }
                }
                let phases = (0..spec.dim).map(|_| s.random_range(0.0..2.0 * PI)).collect();
                Encoder::Rff { weights, phases, dim: spec.dim, input: input_dim }
            }
            EncoderKind::FrozenMlp => {
                let d = spec.dim;
                let mut s = rng::substream(spec.seed, &[0x6d6c_70]);
                let b1 = (6.0 / (input_dim + d) as f64).sqrt();
                let w1 = (0..d * input_dim).map(|_| s.random_range(-b1..b1) as f32).collect();
                let bias1 = (0..d).map(|_| s.random_range(-0.1..0.1)).collect();
                let b2 = (3.0 / d as f64).sqrt();
                let w2 = Matrix::from_vec(d, d, (0..d * d).map(|_| s.random_range(-b2..b2)).collect());
                let bias2 = (0..d).map(|_| s.random_range(-0.1..0.1)).collect();
                Encoder::FrozenMlp { w1, b1: bias1, w2, b2: bias2, dim: d, input: input_dim }
            }
            EncoderKind::External => {
                Encoder::External(EmbeddingTable::load(spec.path.as_ref().expect("validated"))?)
            }
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Encoder::Pixels { input } => *input,
            Encoder::Rff { dim, .. } | Encoder::FrozenMlp { dim, .. } => *dim,
            Encoder::External(t) => t.dim(),
            Encoder::Standardized { inner, .. } => inner.dim(),
        }
    }

    /// Wraps `self` so every output coordinate has zero mean and unit
    /// variance over `imgs`; constant coordinates are only centred.
    pub fn standardized(self, imgs: &[&RasterImage], ids: &[u64]) -> Result<Self> {
        if imgs.is_empty() {
            return param_err("standardisation needs at least one image");
        }
        let mut mean = vec![0.0; self.dim()];
        let mut sq = vec![0.0; self.dim()];
        for (chunk, chunk_ids) in imgs.chunks(256).zip(ids.chunks(256)) {
            let f = self.encode_batch(chunk, chunk_ids)?;
            for r in f.iter_rows() {
                for ((m, s), v) in mean.iter_mut().zip(&mut sq).zip(r) {
                    *m += v;
                    *s += v * v;
                }
            }
        }
        let n = imgs.len() as f64;
        let inv_std = mean
            .iter_mut()
            .zip(&sq)
            .map(|(m, s)| {
                *m /= n;
                let var = s / n - *m * *m;
                if var > 1e-24 { 1.0 / var.sqrt() } else { 1.0 }
            })
            .collect();
        Ok(Encoder::Standardized { inner: Box::new(self), mean, inv_std })
    }

    fn check_input(&self, imgs: &[&RasterImage]) -> Result<()> {
        let input = match self {
            Encoder::Pixels { input } | Encoder::Rff { input, .. } | Encoder::FrozenMlp { input, .. } => *input,
            Encoder::External(_) => return Ok(()),
            Encoder::Standardized { inner, .. } => return inner.check_input(imgs),
        };
        match imgs.iter().find(|i| i.len() != input) {
            Some(bad) => Err(Error::Shape(format!("encoder expects {input} pixels, image has {}", bad.len()))),
            None => Ok(()),
        }
    }

    pub fn encode(&self, img: &RasterImage, source_id: u64) -> Result<FeatureVector> {
        let m = self.encode_batch(&[img], &[source_id])?;
        Ok(FeatureVector::new(m.data, source_id))
    }

    /// Encode a batch into a `len × dim` matrix. `ids` are only consulted by
    /// the external table, which ignores pixel content entirely.
    pub fn encode_batch(&self, imgs: &[&RasterImage], ids: &[u64]) -> Result<Matrix> {
        if imgs.len() != ids.len() {
            return Err(Error::Shape("one id per image is required".into()));
        }
        self.check_input(imgs)?;
        let n = imgs.len();
        match self {
            Encoder::Pixels { input } => {
                let mut out = Matrix::zeros(n, *input);
                for (i, img) in imgs.iter().enumerate() {
                    for (o, p) in out.row_mut(i).iter_mut().zip(&img.pixels) {
                        *o = *p as f64;
                    }
                }
                Ok(out)
            }
            Encoder::Rff { weights, phases, dim, input } => {
                let z = sgemm_nn(&stack(imgs, *input), n, *input, weights, *dim);
                let scale = (2.0 / *dim as f64).sqrt();
                let data = z
                    .chunks_exact(*dim)
                    .flat_map(|row| row.iter().zip(phases).map(move |(v, b)| scale * (*v as f64 + b).cos()))
                    .collect();
                Ok(Matrix::from_vec(n, *dim, data))
            }
            Encoder::FrozenMlp { w1, b1, w2, b2, dim, input } => {
                let x = stack(imgs, *input);
                let z = sgemm_nt(&x, n, *input, w1, *dim);
                let hidden = Matrix::from_vec(
                    n,
                    *dim,
                    z.chunks_exact(*dim)
                        .flat_map(|row| row.iter().zip(b1).map(|(v, b)| (*v as f64 + b).tanh()))
                        .collect(),
                );
                let mut out = crate::linalg::matmul_nt(&hidden, w2);
                for i in 0..n {
                    for (o, b) in out.row_mut(i).iter_mut().zip(b2) {
                        *o = (*o + b).tanh();
                    }
                }
                Ok(out)
            }
            Encoder::External(table) => {
                let mut out = Matrix::zeros(n, table.dim());
                for (i, id) in ids.iter().enumerate() {
                    out.row_mut(i).copy_from_slice(&table.get(*id)?.data);
                }
                Ok(out)
            }
            Encoder::Standardized { inner, mean, inv_std } => {
                let mut out = inner.encode_batch(imgs, ids)?;
                for i in 0..n {
                    for ((v, m), s) in out.row_mut(i).iter_mut().zip(mean).zip(inv_std) {
                        *v = (*v - m) * s;
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Images with at most this fraction of nonzero pixels are projected by
/// accumulating weight rows; the rest go through a dense product.
fn stack(imgs: &[&RasterImage], input: usize) -> Vec<f32> {
    let mut x = Vec::with_capacity(imgs.len() * input);
    for img in imgs {
        x.extend_from_slice(&img.pixels);
    }
    x
}

/// Build the encoder and apply it to one image.
pub fn encode(img: &RasterImage, spec: &EncoderSpec, source_id: u64) -> Result<FeatureVector> {
    Encoder::build(spec, img.len())?.encode(img, source_id)
}

/// Median pairwise Euclidean distance between images (the "median heuristic"
/// for the RFF lengthscale). Falls back to 1 when all images coincide.
pub fn median_heuristic(imgs: &[&RasterImage]) -> f64 {
    let mut d = Vec::with_capacity(imgs.len() * imgs.len().saturating_sub(1) / 2);
    for i in 0..imgs.len() {
        for j in i + 1..imgs.len() {
            let s: f64 = imgs[i]
                .pixels
                .iter()
                .zip(&imgs[j].pixels)
                .map(|(a, b)| {
                    let t = (*a - *b) as f64;
                    t * t
                })
                .sum();
            d.push(s.sqrt());
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    let med = if m % 2 == 1 { d[m / 2] } else { 0.5 * (d[m / 2 - 1] + d[m / 2]) };
    if med > 0.0 {
        med
    } else {
        1.0
    }
}
