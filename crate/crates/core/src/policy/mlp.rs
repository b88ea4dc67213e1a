//! Three-weight-layer ReLU Q-network with hand-written reverse accumulation.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, input_err, Result};
use crate::math::{all_finite, sqrt};
use crate::model::{Differentiable, QFunction};
use crate::rng::{rng_from_seed, uniform};

pub const HIDDEN_WIDTH: usize = 64;

/// Dense affine layer; `weights` is row-major `outputs × inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], bias: vec![0.0; outputs] }
    }

    fn validate(&self) -> Result<()> {
        if self.inputs == 0 || self.outputs == 0 {
            return Err(input_err!("layer with zero width"));
        }
        if self.weights.len() != self.inputs * self.outputs || self.bias.len() != self.outputs {
            return Err(input_err!(
                "layer {}x{} has {} weights and {} biases",
                self.outputs,
                self.inputs,
                self.weights.len(),
                self.bias.len()
            ));
        }
        if !all_finite(&self.weights) || !all_finite(&self.bias) {
            return Err(input_err!("non-finite layer parameter"));
        }
        Ok(())
    }

    #[inline]
    pub fn row(&self, o: usize) -> &[f64] {
        &self.weights[o * self.inputs..(o + 1) * self.inputs]
    }

    fn apply(&self, input: &[f64], out: &mut [f64]) {
        for (o, slot) in out.iter_mut().enumerate() {
            let row = self.row(o);
            let mut acc = self.bias[o];
            for (w, x) in row.iter().zip(input) {
                acc += w * x;
            }
            *slot = acc;
        }
    }

    /// `out = Wᵀ delta`.
    fn apply_transpose(&self, delta: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (o, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            for (slot, w) in out.iter_mut().zip(self.row(o)) {
                *slot += w * d;
            }
        }
    }
}

/// Activations recorded during a forward pass.
#[derive(Debug, Clone)]
pub(crate) struct Trace {
    pub pre1: Vec<f64>,
    pub act1: Vec<f64>,
    pub pre2: Vec<f64>,
    pub act2: Vec<f64>,
    pub q: Vec<f64>,
}

/// `Q = W3 relu(W2 relu(W1 s + b1) + b2) + b3`.
///
/// The ReLU derivative at exactly zero is taken as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpPolicy {
    layers: [Layer; 3],
}

impl MlpPolicy {
    pub fn from_layers(layers: [Layer; 3]) -> Result<Self> {
        for layer in &layers {
            layer.validate()?;
        }
        if layers[0].outputs != layers[1].inputs || layers[1].outputs != layers[2].inputs {
            return Err(input_err!("layer widths do not chain"));
        }
        if layers[2].outputs < 2 {
            return Err(input_err!("policy needs at least two actions"));
        }
        Ok(Self { layers })
    }

    /// Uniform `±1/sqrt(fan_in)` initialisation for weights and biases.
    pub fn random(state_dim: usize, action_count: usize, seed: u64) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let dims = [state_dim, HIDDEN_WIDTH, HIDDEN_WIDTH, action_count];
        let mut make = |i: usize| {
            let mut layer = Layer::zeros(dims[i], dims[i + 1]);
            let bound = 1.0 / sqrt(dims[i] as f64);
            for w in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
                *w = uniform(&mut rng, -bound, bound);
            }
            layer
        };
        let layers = [make(0), make(1), make(2)];
        Self::from_layers(layers)
    }

    /// All-zero network; outputs are exactly the final biases.
    pub fn zeros(state_dim: usize, action_count: usize) -> Result<Self> {
        Self::from_layers([
            Layer::zeros(state_dim, HIDDEN_WIDTH),
            Layer::zeros(HIDDEN_WIDTH, HIDDEN_WIDTH),
            Layer::zeros(HIDDEN_WIDTH, action_count),
        ])
    }

    /// Encodes the linear map `Q = W s` exactly, routing each input through a
    /// pair of hidden units `relu(s_i)` and `relu(-s_i)`. Needs `2d <= 64`.
    pub fn from_linear(weights: &[Vec<f64>]) -> Result<Self> {
        let actions = weights.len();
        let d = weights.first().map_or(0, Vec::len);
        if d == 0 || 2 * d > HIDDEN_WIDTH || weights.iter().any(|r| r.len() != d) {
            return Err(input_err!("linear encoding needs 1 <= d <= {} equal rows", HIDDEN_WIDTH / 2));
        }
        let mut first = Layer::zeros(d, HIDDEN_WIDTH);
        for i in 0..d {
            first.weights[(2 * i) * d + i] = 1.0;
            first.weights[(2 * i + 1) * d + i] = -1.0;
        }
        let mut second = Layer::zeros(HIDDEN_WIDTH, HIDDEN_WIDTH);
        for h in 0..HIDDEN_WIDTH {
            second.weights[h * HIDDEN_WIDTH + h] = 1.0;
        }
        let mut last = Layer::zeros(HIDDEN_WIDTH, actions);
        for (a, row) in weights.iter().enumerate() {
            for (i, &w) in row.iter().enumerate() {
                last.weights[a * HIDDEN_WIDTH + 2 * i] = w;
                last.weights[a * HIDDEN_WIDTH + 2 * i + 1] = -w;
            }
        }
        Self::from_layers([first, second, last])
    }

    pub fn layers(&self) -> &[Layer; 3] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer; 3] {
        &mut self.layers
    }

    /// `[d, hidden1, hidden2, A]`.
    pub fn dims(&self) -> [usize; 4] {
        [
            self.layers[0].inputs,
            self.layers[0].outputs,
            self.layers[1].outputs,
            self.layers[2].outputs,
        ]
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn forward(&self, state: &[f64]) -> Result<Vec<f64>> {
        check_dim("state", self.layers[0].inputs, state.len())?;
        Ok(self.trace(state).q)
    }

    pub(crate) fn trace(&self, state: &[f64]) -> Trace {
        let [l1, l2, l3] = &self.layers;
        let mut pre1 = vec![0.0; l1.outputs];
        l1.apply(state, &mut pre1);
        let act1: Vec<f64> = pre1.iter().map(|&z| relu(z)).collect();
        let mut pre2 = vec![0.0; l2.outputs];
        l2.apply(&act1, &mut pre2);
        let act2: Vec<f64> = pre2.iter().map(|&z| relu(z)).collect();
        let mut q = vec![0.0; l3.outputs];
        l3.apply(&act2, &mut q);
        Trace { pre1, act1, pre2, act2, q }
    }

    /// Back-propagates `delta_q` (dLoss/dQ) from a recorded trace, returning
    /// the error signals at both hidden pre-activations.
    fn backward_hidden(&self, trace: &Trace, delta_q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let [_, l2, l3] = &self.layers;
        let mut delta2 = vec![0.0; l3.inputs];
        l3.apply_transpose(delta_q, &mut delta2);
        mask_relu(&mut delta2, &trace.pre2);
        let mut delta1 = vec![0.0; l2.inputs];
        l2.apply_transpose(&delta2, &mut delta1);
        mask_relu(&mut delta1, &trace.pre1);
        (delta1, delta2)
    }

    pub fn act_greedy(&self, state: &[f64]) -> Result<usize> {
        self.greedy_action(state)
    }

    /// Adds the gradient of `0.5 * (Q[action] - target)^2` w.r.t. every
    /// parameter into `grads` (same layout as `self`) and returns the TD error.
    pub(crate) fn accumulate_td_gradient(
        &self,
        state: &[f64],
        action: usize,
        target: f64,
        grads: &mut [Layer; 3],
    ) -> f64 {
        let trace = self.trace(state);
        let err = trace.q[action] - target;
        let mut delta_q = vec![0.0; trace.q.len()];
        delta_q[action] = err;
        let (delta1, delta2) = self.backward_hidden(&trace, &delta_q);
        outer_accumulate(&mut grads[2], &delta_q, &trace.act2);
        outer_accumulate(&mut grads[1], &delta2, &trace.act1);
        outer_accumulate(&mut grads[0], &delta1, state);
        err
    }
}

#[inline]
fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

fn mask_relu(delta: &mut [f64], pre: &[f64]) {
    for (d, &z) in delta.iter_mut().zip(pre) {
        if z <= 0.0 {
            *d = 0.0;
        }
    }
}

fn outer_accumulate(grad: &mut Layer, delta: &[f64], input: &[f64]) {
    for (o, &d) in delta.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        grad.bias[o] += d;
        let row = &mut grad.weights[o * grad.inputs..(o + 1) * grad.inputs];
        for (g, x) in row.iter_mut().zip(input) {
            *g += d * x;
        }
    }
}

impl QFunction for MlpPolicy {
    fn state_dim(&self) -> usize {
        self.layers[0].inputs
    }

    fn action_count(&self) -> usize {
        self.layers[2].outputs
    }

    fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.forward(state)
    }
}

impl Differentiable for MlpPolicy {
    /// Exact `dQ[action]/dstate` by reverse accumulation.
    fn input_gradient(&self, state: &[f64], action: usize) -> Result<Vec<f64>> {
        check_dim("state", self.layers[0].inputs, state.len())?;
        if action >= self.action_count() {
            return Err(input_err!("action {action} out of range for {} actions", self.action_count()));
        }
        let trace = self.trace(state);
        let mut delta_q = vec![0.0; trace.q.len()];
        delta_q[action] = 1.0;
        let (delta1, _) = self.backward_hidden(&trace, &delta_q);
        let mut grad = vec![0.0; state.len()];
        self.layers[0].apply_transpose(&delta1, &mut grad);
        Ok(grad)
    }
}
