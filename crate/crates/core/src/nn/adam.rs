use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, Mlp};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Gradients,
    pub v: Gradients,
    pub t: u64,
}

impl AdamState {
    pub fn new(mlp: &Mlp) -> Self {
        Self {
            m: Gradients::zeros_like(mlp),
            v: Gradients::zeros_like(mlp),
            t: 0,
        }
    }
}

/// One bias-corrected Adam update on a flat parameter slice. `t` is the
/// already-incremented step number. Weight decay enters as an L2 term added
/// to the gradient before the moment updates.
#[allow(clippy::too_many_arguments)]
pub fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    cfg: &AdamConfig,
    lr: f64,
    weight_decay: f64,
) {
    let bc1 = 1.0 - cfg.beta1.powf(t as f64);
    let bc2 = 1.0 - cfg.beta2.powf(t as f64);
    for i in 0..params.len() {
        let g = grads[i] + weight_decay * params[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
}

pub fn adam_step(
    mlp: &mut Mlp,
    grads: &Gradients,
    state: &mut AdamState,
    cfg: &AdamConfig,
    lr: f64,
    weight_decay: f64,
) -> Result<()> {
    if !grads.matches(mlp) || !state.m.matches(mlp) || !state.v.matches(mlp) {
        return Err(Error::State(
            "gradient/optimizer shapes do not match the network".into(),
        ));
    }
    for (k, g) in grads.layers.iter().enumerate() {
        if g.weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("gradient of layer {k} weights")));
        }
        if g.bias.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("gradient of layer {k} bias")));
        }
    }

    state.t += 1;
    let t = state.t;
    mlp.bump_revision();
    for (k, layer) in mlp.layers_mut().iter_mut().enumerate() {
        let (w, b) = layer.params_mut();
        let g = &grads.layers[k];
        let m = &mut state.m.layers[k];
        let v = &mut state.v.layers[k];
        adam_update(
            w,
            &g.weights,
            &mut m.weights,
            &mut v.weights,
            t,
            cfg,
            lr,
            weight_decay,
        );
        adam_update(
            b,
            &g.bias,
            &mut m.bias,
            &mut v.bias,
            t,
            cfg,
            lr,
            weight_decay,
        );
    }
    Ok(())
}
