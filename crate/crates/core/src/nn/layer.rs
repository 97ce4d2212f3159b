use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
}

/// Affine layer `y = W x + b`, weights stored row-major as `out × in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl DenseLayer {
    pub fn new(in_dim: usize, out_dim: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::Config("layer dimensions must be nonzero".into()));
        }
        if weights.len() != in_dim * out_dim {
            return Err(Error::shape(
                "DenseLayer weights",
                in_dim * out_dim,
                weights.len(),
            ));
        }
        if bias.len() != out_dim {
            return Err(Error::shape("DenseLayer bias", out_dim, bias.len()));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("DenseLayer parameters".into()));
        }
        Ok(Self {
            in_dim,
            out_dim,
            weights,
            bias,
        })
    }

    /// He-uniform weights in `±sqrt(6 / in_dim)`, zero bias.
    pub fn he_uniform(in_dim: usize, out_dim: usize, rng: &mut Rng) -> Result<Self> {
        let limit = (6.0 / in_dim as f64).sqrt();
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        Self::new(in_dim, out_dim, weights, vec![0.0; out_dim])
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.weights, &mut self.bias)
    }

    /// Row `o` of the weight matrix.
    pub fn row(&self, o: usize) -> &[f64] {
        &self.weights[o * self.in_dim..(o + 1) * self.in_dim]
    }
}

pub fn dense_forward(layer: &DenseLayer, input: &[f64]) -> Result<Vec<f64>> {
    if input.len() != layer.in_dim {
        return Err(Error::shape(
            "dense_forward input",
            layer.in_dim,
            input.len(),
        ));
    }
    Ok((0..layer.out_dim)
        .map(|o| {
            layer
                .row(o)
                .iter()
                .zip(input)
                .fold(layer.bias[o], |acc, (w, x)| acc + w * x)
        })
        .collect())
}

pub fn activation_forward(kind: Activation, input: &[f64]) -> Vec<f64> {
    match kind {
        Activation::Relu => input.iter().map(|&x| x.max(0.0)).collect(),
        Activation::Linear => input.to_vec(),
    }
}

/// Multiplies `grad` in place by the activation derivative at the pre-activation `pre`.
pub fn activation_backward(kind: Activation, pre: &[f64], grad: &mut [f64]) {
    if kind == Activation::Relu {
        for (g, &z) in grad.iter_mut().zip(pre) {
            if z <= 0.0 {
                *g = 0.0;
            }
        }
    }
}
