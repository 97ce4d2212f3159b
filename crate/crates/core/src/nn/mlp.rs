use serde::{Deserialize, Serialize};

use super::dropout::{check_rate, dropout_forward, DropoutMask, Mode};
use super::layer::{
    activation_backward, activation_forward, dense_forward, Activation, DenseLayer,
};
use crate::rng::Rng;
use crate::{Error, Result};

/// Stack of dense layers with one activation per layer and a dropout rate for
/// every gap between consecutive layers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
    activations: Vec<Activation>,
    dropout: Vec<f64>,
    /// Bumped on every parameter update; tapes from older revisions are rejected.
    #[serde(skip)]
    revision: u64,
}

impl PartialEq for Mlp {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
            && self.activations == other.activations
            && self.dropout == other.dropout
    }
}

/// Activations and dropout masks cached by [`Mlp::forward_train`].
#[derive(Debug)]
pub struct Tape {
    revision: u64,
    /// Input fed to each layer (after the preceding dropout).
    inputs: Vec<Vec<f64>>,
    /// Pre-activation output of each layer.
    pre: Vec<Vec<f64>>,
    masks: Vec<DropoutMask>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerGradients {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Per-layer buffers shaped like an [`Mlp`]'s parameters. Also used for the
/// Adam moment estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gradients {
    pub layers: Vec<LayerGradients>,
}

impl Gradients {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Self {
            layers: mlp
                .layers
                .iter()
                .map(|l| LayerGradients {
                    weights: vec![0.0; l.weights().len()],
                    bias: vec![0.0; l.bias().len()],
                })
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights
                .iter_mut()
                .zip(&b.weights)
                .for_each(|(x, y)| *x += y);
            a.bias.iter_mut().zip(&b.bias).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights
                .iter_mut()
                .chain(l.bias.iter_mut())
                .for_each(|x| *x *= factor);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
    }

    pub(crate) fn matches(&self, mlp: &Mlp) -> bool {
        self.layers.len() == mlp.layers.len()
            && self.layers.iter().zip(&mlp.layers).all(|(g, l)| {
                g.weights.len() == l.weights().len() && g.bias.len() == l.bias().len()
            })
    }
}

impl Mlp {
    pub fn from_layers(
        layers: Vec<DenseLayer>,
        activations: Vec<Activation>,
        dropout: Vec<f64>,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("an MLP needs at least one layer".into()));
        }
        if activations.len() != layers.len() {
            return Err(Error::shape(
                "Mlp activations",
                layers.len(),
                activations.len(),
            ));
        }
        if dropout.len() != layers.len() - 1 {
            return Err(Error::shape(
                "Mlp dropout gaps",
                layers.len() - 1,
                dropout.len(),
            ));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::shape(
                    "Mlp layer chain",
                    pair[0].out_dim(),
                    pair[1].in_dim(),
                ));
            }
        }
        for &rate in &dropout {
            check_rate(rate)?;
        }
        Ok(Self {
            layers,
            activations,
            dropout,
            revision: 0,
        })
    }

    /// He-initialised network over `widths` (input first), ReLU on hidden layers,
    /// linear output, the same dropout rate in every gap.
    pub fn new(widths: &[usize], dropout: f64, rng: &mut Rng) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::Config(
                "need at least input and output widths".into(),
            ));
        }
        let layers = widths
            .windows(2)
            .map(|w| DenseLayer::he_uniform(w[0], w[1], rng))
            .collect::<Result<Vec<_>>>()?;
        let n = layers.len();
        let mut activations = vec![Activation::Relu; n];
        activations[n - 1] = Activation::Linear;
        Self::from_layers(layers, activations, vec![dropout; n - 1])
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    /// Mutable access to the layers. Invalidates outstanding tapes.
    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        self.revision += 1;
        &mut self.layers
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn dropout(&self) -> &[f64] {
        &self.dropout
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Layer widths, input first.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(DenseLayer::out_dim))
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights().len() + l.bias().len())
            .sum()
    }

    pub(crate) fn bump_revision(&mut self) {
        self.revision += 1;
    }

    /// Eval-mode forward pass (dropout off).
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut x = input.to_vec();
        for (layer, &act) in self.layers.iter().zip(&self.activations) {
            x = activation_forward(act, &dense_forward(layer, &x)?);
        }
        Ok(x)
    }

    /// Train-mode forward pass. Dropout masks are drawn from `rng`.
    pub fn forward_train(&self, input: &[f64], rng: &mut Rng) -> Result<(Vec<f64>, Tape)> {
        let n = self.layers.len();
        let mut tape = Tape {
            revision: self.revision,
            inputs: Vec::with_capacity(n),
            pre: Vec::with_capacity(n),
            masks: Vec::with_capacity(n - 1),
        };
        let mut x = input.to_vec();
        for (k, (layer, &act)) in self.layers.iter().zip(&self.activations).enumerate() {
            if k > 0 {
                let (dropped, mask) = dropout_forward(&x, self.dropout[k - 1], Mode::Train, rng)?;
                x = dropped;
                tape.masks.push(mask);
            }
            let z = dense_forward(layer, &x)?;
            tape.inputs.push(x);
            x = activation_forward(act, &z);
            tape.pre.push(z);
        }
        Ok((x, tape))
    }

    /// Reverse pass. Returns parameter gradients and the gradient w.r.t. the input.
    pub fn backward(&self, tape: Tape, output_grad: &[f64]) -> Result<(Gradients, Vec<f64>)> {
        let mut grads = Gradients::zeros_like(self);
        let input_grad = self.backward_into(tape, output_grad, &mut grads)?;
        Ok((grads, input_grad))
    }

    /// Reverse pass that accumulates into `grads`.
    pub fn backward_into(
        &self,
        tape: Tape,
        output_grad: &[f64],
        grads: &mut Gradients,
    ) -> Result<Vec<f64>> {
        if tape.revision != self.revision || tape.pre.len() != self.layers.len() {
            return Err(Error::State(
                "tape does not come from the current parameters' forward pass".into(),
            ));
        }
        if !grads.matches(self) {
            return Err(Error::State(
                "gradient buffer shaped for a different network".into(),
            ));
        }
        if output_grad.len() != self.output_dim() {
            return Err(Error::shape(
                "Mlp::backward output grad",
                self.output_dim(),
                output_grad.len(),
            ));
        }

        let Tape {
            inputs,
            pre,
            mut masks,
            ..
        } = tape;
        let mut delta = output_grad.to_vec();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            activation_backward(self.activations[k], &pre[k], &mut delta);

            let g = &mut grads.layers[k];
            let input = &inputs[k];
            let in_dim = layer.in_dim();
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.bias[o] += d;
                let row = &mut g.weights[o * in_dim..(o + 1) * in_dim];
                row.iter_mut().zip(input).for_each(|(gw, x)| *gw += d * x);
            }

            let mut next = vec![0.0; in_dim];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                next.iter_mut()
                    .zip(layer.row(o))
                    .for_each(|(n, w)| *n += d * w);
            }
            if k > 0 {
                masks.pop().expect("one mask per gap").apply(&mut next);
            }
            delta = next;
        }
        Ok(delta)
    }
}
