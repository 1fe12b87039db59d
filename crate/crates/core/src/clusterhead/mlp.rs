//! The trainable head `g`: a ReLU MLP producing cluster logits.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matmul_nn, matmul_nt, matmul_tn, Matrix};
use crate::rng;

/// Hidden widths of the head used in the reference experiments.
pub const DEFAULT_HIDDEN: [usize; 4] = [1024, 768, 512, 1024];

/// Weights are stored `out × in`; hidden layers use ReLU, the last layer is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadParams {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

/// Activations cached by a batch forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    /// `inputs[l]` is the input to layer `l` (post-ReLU for `l > 0`).
    pub inputs: Vec<Matrix>,
    pub logits: Matrix,
}

pub fn layer_dims(input: usize, hidden: &[usize], k: usize) -> Vec<usize> {
    let mut dims = Vec::with_capacity(hidden.len() + 2);
    dims.push(input);
    dims.extend_from_slice(hidden);
    dims.push(k);
    dims
}

impl HeadParams {
    pub fn zeros(layer_dims: &[usize]) -> Result<Self> {
        if layer_dims.len() < 2 || layer_dims.contains(&0) {
            return Err(Error::Shape(format!("invalid layer dims {layer_dims:?}")));
        }
        let weights = layer_dims.windows(2).map(|w| Matrix::zeros(w[1], w[0])).collect();
        let biases = layer_dims[1..].iter().map(|&d| vec![0.0; d]).collect();
        Ok(Self { layer_dims: layer_dims.to_vec(), weights, biases })
    }

    /// Kaiming-uniform weights (`U(±√(6/fan_in))`), zero biases.
    pub fn init(layer_dims: &[usize], seed: u64) -> Result<Self> {
        let mut p = Self::zeros(layer_dims)?;
        let mut s = rng::substream(seed, &[0x6865_6164]);
        for w in &mut p.weights {
            let bound = (6.0 / w.cols as f64).sqrt();
            for v in &mut w.data {
                *v = s.random_range(-bound..bound);
            }
        }
        Ok(p)
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.data.len()).sum::<usize>() + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// All tensors in a fixed order: every weight matrix, then every bias.
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.weights
            .iter()
            .map(|w| w.data.as_slice())
            .chain(self.biases.iter().map(Vec::as_slice))
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let (ws, bs) = (&mut self.weights, &mut self.biases);
        ws.iter_mut()
            .map(|w| w.data.as_mut_slice())
            .chain(bs.iter_mut().map(Vec::as_mut_slice))
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn validate(&self) -> Result<()> {
        let chain_ok = self.weights.len() + 1 == self.layer_dims.len()
            && self.biases.len() == self.weights.len()
            && self.weights.iter().zip(self.layer_dims.windows(2)).all(|(w, d)| w.cols == d[0] && w.rows == d[1])
            && self.biases.iter().zip(&self.layer_dims[1..]).all(|(b, &d)| b.len() == d);
        if !chain_ok {
            return Err(Error::Shape(format!("parameter shapes do not chain along {:?}", self.layer_dims)));
        }
        if !self.is_finite() {
            return Err(Error::NonFinite { layer: 0 });
        }
        Ok(())
    }

    pub fn forward_batch(&self, x: &Matrix) -> Result<Forward> {
        if x.cols != self.input_dim() {
            return Err(Error::Shape(format!(
                "head expects {}-dimensional features, got {}",
                self.input_dim(),
                x.cols
            )));
        }
        let last = self.num_layers() - 1;
        let mut inputs = Vec::with_capacity(self.num_layers());
        let mut a = x.clone();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = matmul_nt(&a, w);
            for i in 0..z.rows {
                for (v, bj) in z.row_mut(i).iter_mut().zip(b) {
                    *v += bj;
                    if l < last && *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            if !z.is_finite() {
                return Err(Error::NonFinite { layer: l });
            }
            inputs.push(a);
            a = z;
        }
        Ok(Forward { inputs, logits: a })
    }

    /// Gradients of a scalar loss given `∂L/∂logits`, shaped like `self`.
    pub fn backward(&self, fwd: &Forward, dlogits: &Matrix) -> Result<HeadParams> {
        let mut grads = HeadParams::zeros(&self.layer_dims)?;
        let mut delta = dlogits.clone();
        for l in (0..self.num_layers()).rev() {
            let a = &fwd.inputs[l];
            grads.weights[l] = matmul_tn(&delta, a);
            let gb = &mut grads.biases[l];
            for i in 0..delta.rows {
                for (g, d) in gb.iter_mut().zip(delta.row(i)) {
                    *g += d;
                }
            }
            if l > 0 {
                let mut prev = matmul_nn(&delta, &self.weights[l]);
                for (p, act) in prev.data.iter_mut().zip(&a.data) {
                    if *act <= 0.0 {
                        *p = 0.0;
                    }
                }
                if !prev.is_finite() {
                    return Err(Error::NonFinite { layer: l - 1 });
                }
                delta = prev;
            }
        }
        Ok(grads)
    }

    /// `self += scale · other`.
    pub fn add_scaled(&mut self, other: &HeadParams, scale: f64) {
        for (t, o) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (a, b) in t.iter_mut().zip(o) {
                *a += scale * b;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_chain() {
        let p = HeadParams::init(&[5, 7, 3], 1).unwrap();
        p.validate().unwrap();
        assert_eq!(p.num_params(), 5 * 7 + 7 + 7 * 3 + 3);
        assert_eq!(layer_dims(512, &DEFAULT_HIDDEN, 6), vec![512, 1024, 768, 512, 1024, 6]);
    }

    #[test]
    fn zero_head_gives_zero_logits() {
        let p = HeadParams::zeros(&[4, 6, 3]).unwrap();
        let f = p.forward_batch(&Matrix::from_vec(1, 4, vec![1.0, -2.0, 3.0, 0.5])).unwrap();
        assert!(f.logits.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let p = HeadParams::zeros(&[4, 3]).unwrap();
        assert!(matches!(p.forward_batch(&Matrix::zeros(2, 5)), Err(Error::Shape(_))));
    }

    #[test]
    fn non_finite_activation_names_layer() {
        let mut p = HeadParams::init(&[2, 3, 2], 0).unwrap();
        p.weights[1].data[0] = f64::INFINITY;
        let x = Matrix::from_vec(1, 2, vec![1.0, 1.0]);
        let f = HeadParams::init(&[2, 3, 2], 0).unwrap().forward_batch(&x).unwrap();
        // Force a positive hidden unit so the infinite weight is used.
        if f.inputs[1].data[0] > 0.0 {
            assert!(matches!(p.forward_batch(&x), Err(Error::NonFinite { layer: 1 })));
        }
    }
}
