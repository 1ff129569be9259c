//! Dense feed-forward network with hand-written backpropagation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::surrogate::Activation;

/// Fully connected layer. `weights` holds `outputs × inputs` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        Dense {
            inputs,
            outputs,
            weights: (0..inputs * outputs)
                .map(|_| rng.random_range(-limit..limit))
                .collect(),
            bias: vec![0.0; outputs],
        }
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, out_o) in out.iter_mut().enumerate() {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            *out_o = self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }
}

/// Hidden layers apply the activation; the last layer is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<Dense>,
    pub activation: Activation,
}

/// Parameter gradients, laid out like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    fn zeros_like(net: &Network) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| Dense::zeros(l.inputs, l.outputs))
                .collect(),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }
}

impl Network {
    /// Glorot-initialised hidden layers and a zero output head, so an
    /// untrained network predicts exactly zero.
    pub fn init(dims: &[usize], activation: Activation, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                if i == last {
                    Dense::zeros(w[0], w[1])
                } else {
                    Dense::glorot(w[0], w[1], &mut rng)
                }
            })
            .collect();
        Network { layers, activation }
    }

    /// Every parameter drawn from `N(0, scale²)`, used by gradient checks.
    pub fn random(dims: &[usize], activation: Activation, scale: f64, rng: &mut impl Rng) -> Self {
        let layers = dims
            .windows(2)
            .map(|w| {
                let mut d = Dense::zeros(w[0], w[1]);
                for p in d.weights.iter_mut().chain(d.bias.iter_mut()) {
                    *p = scale * rng.sample::<f64, _>(StandardNormal);
                }
                d
            })
            .collect();
        Network { layers, activation }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut next = vec![0.0; layer.outputs];
            layer.forward_into(&cur, &mut next);
            if i != last {
                next.iter_mut().for_each(|v| *v = self.activation.apply(*v));
            }
            cur = next;
        }
        cur
    }

    /// Mean squared error over the batch and its gradient with respect to
    /// every parameter. Each target row has `output_dim` entries.
    pub fn loss_and_gradients(&self, inputs: &[&[f64]], targets: &[&[f64]]) -> (f64, Gradients) {
        let mut grads = Gradients::zeros_like(self);
        let loss = self.accumulate(inputs, targets, &mut grads);
        (loss, grads)
    }

    pub(crate) fn accumulate(&self, inputs: &[&[f64]], targets: &[&[f64]], grads: &mut Gradients) -> f64 {
        for g in &mut grads.layers {
            g.weights.iter_mut().for_each(|v| *v = 0.0);
            g.bias.iter_mut().for_each(|v| *v = 0.0);
        }
        let n_layers = self.layers.len();
        let batch = inputs.len() as f64;
        let norm = batch * self.output_dim() as f64;
        let mut loss = 0.0;
        // activations[0] = input, activations[i + 1] = output of layer i.
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(n_layers + 1);
        activations.push(Vec::new());
        for l in &self.layers {
            activations.push(vec![0.0; l.outputs]);
        }
        let mut delta: Vec<f64> = Vec::new();
        let mut prev_delta: Vec<f64> = Vec::new();

        for (x, y) in inputs.iter().zip(targets) {
            activations[0].clear();
            activations[0].extend_from_slice(x);
            for (i, layer) in self.layers.iter().enumerate() {
                let (before, after) = activations.split_at_mut(i + 1);
                let out = &mut after[0];
                layer.forward_into(&before[i], out);
                if i != n_layers - 1 {
                    out.iter_mut().for_each(|v| *v = self.activation.apply(*v));
                }
            }
            let out = &activations[n_layers];
            delta.clear();
            for (o, t) in out.iter().zip(y.iter()) {
                let e = o - t;
                loss += e * e;
                delta.push(2.0 * e / norm);
            }
            for i in (0..n_layers).rev() {
                let layer = &self.layers[i];
                let input = &activations[i];
                let g = &mut grads.layers[i];
                for (o, &d) in delta.iter().enumerate() {
                    g.bias[o] += d;
                    let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (w, &a) in row.iter_mut().zip(input) {
                        *w += d * a;
                    }
                }
                if i > 0 {
                    prev_delta.clear();
                    prev_delta.resize(layer.inputs, 0.0);
                    for (o, &d) in delta.iter().enumerate() {
                        let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                        for (p, &w) in prev_delta.iter_mut().zip(row) {
                            *p += d * w;
                        }
                    }
                    for (p, &a) in prev_delta.iter_mut().zip(input) {
                        *p *= self.activation.derivative_from_output(a);
                    }
                    std::mem::swap(&mut delta, &mut prev_delta);
                }
            }
        }
        loss / norm
    }

    pub fn mse(&self, inputs: &[&[f64]], targets: &[&[f64]]) -> f64 {
        let norm = (inputs.len() * self.output_dim()) as f64;
        inputs
            .iter()
            .zip(targets)
            .map(|(x, y)| {
                self.forward(x)
                    .iter()
                    .zip(y.iter())
                    .map(|(o, t)| (o - t).powi(2))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / norm
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(param_count: usize, learning_rate: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Adam {
            learning_rate,
            beta1,
            beta2,
            eps,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
        }
    }

    pub fn step(&mut self, net: &mut Network, grads: &Gradients) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        let g_iter = grads
            .layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias));
        for (((p, g), m), v) in net
            .params_mut()
            .zip(g_iter)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Largest relative difference between analytic and central-difference
/// gradients, `|a − n| / max(|a|, |n|, 1e-8)`. `flip_sign` negates the
/// analytic gradient, which a correct check must flag with an error near 2.
pub(crate) fn max_gradient_error(net: &Network, inputs: &[&[f64]], targets: &[&[f64]], step: f64, flip_sign: bool) -> f64 {
    let (_, grads) = net.loss_and_gradients(inputs, targets);
    let mut analytic = grads.flatten();
    if flip_sign {
        analytic.iter_mut().for_each(|g| *g = -*g);
    }
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for (k, a) in analytic.iter().enumerate() {
        let original = {
            let p = probe.params_mut().nth(k).unwrap();
            let o = *p;
            *p = o + step;
            o
        };
        let plus = probe.mse(inputs, targets);
        *probe.params_mut().nth(k).unwrap() = original - step;
        let minus = probe.mse(inputs, targets);
        *probe.params_mut().nth(k).unwrap() = original;
        let numeric = (plus - minus) / (2.0 * step);
        let denom = a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((a - numeric).abs() / denom);
    }
    worst
}
