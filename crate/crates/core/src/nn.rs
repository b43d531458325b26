//! Scalar-in, scalar-out dense networks with ELU hidden layers, exact
//! reverse-mode gradients of the mean squared error, and Adam.
//!
//! Parameters live in one flat buffer. Layer `l` owns a row-major weight block
//! of shape `(layer_sizes[l + 1], layer_sizes[l])` followed by its bias vector,
//! so gradients and Adam moments are plain vectors of the same length.

use alloc::vec;
use alloc::vec::Vec;

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::invalid;
use crate::{Error, Result};

pub const DEFAULT_ELU_ALPHA: f64 = 1.0;
pub const DEFAULT_LEARNING_RATE: f64 = 0.0002;
pub const DEFAULT_BATCH_SIZE: usize = 100;

/// Exponential linear unit: `x` for `x > 0`, `alpha * (e^x - 1)` otherwise.
#[inline]
pub fn elu(x: f64, alpha: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        alpha * libm::expm1(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerSlots {
    inputs: usize,
    outputs: usize,
    weights: usize,
    biases: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork {
    layer_sizes: Vec<usize>,
    slots: Vec<LayerSlots>,
    params: Vec<f64>,
    alpha: f64,
}

fn layout(layer_sizes: &[usize]) -> Result<(Vec<LayerSlots>, usize)> {
    if layer_sizes.len() < 2 {
        return Err(invalid("a network needs at least an input and an output layer"));
    }
    if layer_sizes.contains(&0) {
        return Err(invalid("layer sizes must be positive"));
    }
    let mut slots = Vec::with_capacity(layer_sizes.len() - 1);
    let mut offset = 0;
    for pair in layer_sizes.windows(2) {
        let (inputs, outputs) = (pair[0], pair[1]);
        let weights = offset;
        let biases = weights + inputs * outputs;
        offset = biases + outputs;
        slots.push(LayerSlots { inputs, outputs, weights, biases });
    }
    Ok((slots, offset))
}

/// Builds a network with uniform Glorot weights `U[-sqrt(6/(fan_in+fan_out)), +...]`
/// and zero biases. Equal seeds give bit-identical parameters.
pub fn init_network(layer_sizes: &[usize], seed: u64) -> Result<DenseNetwork> {
    let mut net = DenseNetwork::zeros(layer_sizes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for slot in net.slots.clone() {
        let limit = libm::sqrt(6.0 / (slot.inputs + slot.outputs) as f64);
        let dist = Uniform::new_inclusive(-limit, limit);
        for w in &mut net.params[slot.weights..slot.biases] {
            *w = dist.sample(&mut rng);
        }
    }
    Ok(net)
}

impl DenseNetwork {
    /// All-zero parameters.
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        let (slots, len) = layout(layer_sizes)?;
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            slots,
            params: vec![0.0; len],
            alpha: DEFAULT_ELU_ALPHA,
        })
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("ELU alpha must be positive and finite"));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn layer_count(&self) -> usize {
        self.slots.len()
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Row-major `(outputs, inputs)` weight block of `layer`.
    pub fn weights(&self, layer: usize) -> &[f64] {
        let s = self.slots[layer];
        &self.params[s.weights..s.biases]
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        let s = self.slots[layer];
        &mut self.params[s.weights..s.biases]
    }

    pub fn biases(&self, layer: usize) -> &[f64] {
        let s = self.slots[layer];
        &self.params[s.biases..s.biases + s.outputs]
    }

    pub fn biases_mut(&mut self, layer: usize) -> &mut [f64] {
        let s = self.slots[layer];
        &mut self.params[s.biases..s.biases + s.outputs]
    }

    fn widest(&self) -> usize {
        self.layer_sizes.iter().copied().max().unwrap_or(1)
    }

    /// Evaluates the network at `x`.
    pub fn forward(&self, x: f64) -> Result<f64> {
        let mut ws = Workspace::new(self);
        let y = ws.forward(self, x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite("network output"))
        }
    }

    /// Evaluates the network at every input, reusing one scratch buffer.
    pub fn predict(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        let mut ws = Workspace::new(self);
        let out: Vec<f64> = inputs.iter().map(|&x| ws.forward(self, x)).collect();
        if out.iter().all(|y| y.is_finite()) {
            Ok(out)
        } else {
            Err(Error::NonFinite("network output"))
        }
    }
}

/// Per-sample activations kept for the backward pass.
///
/// `acts[l]` is the input to layer `l` (so `acts[0] = [x]`) and `pre[l]` the
/// affine output of layer `l` before its activation.
#[derive(Debug, Clone)]
struct Workspace {
    acts: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_in: Vec<f64>,
}

impl Workspace {
    fn new(net: &DenseNetwork) -> Self {
        let sizes = &net.layer_sizes;
        Self {
            acts: sizes[..sizes.len() - 1].iter().map(|&s| vec![0.0; s]).collect(),
            pre: sizes[1..].iter().map(|&s| vec![0.0; s]).collect(),
            delta: vec![0.0; net.widest()],
            delta_in: vec![0.0; net.widest()],
        }
    }

    fn forward(&mut self, net: &DenseNetwork, x: f64) -> f64 {
        let last = net.slots.len() - 1;
        self.acts[0][0] = x;
        for (l, slot) in net.slots.iter().enumerate() {
            let w = &net.params[slot.weights..slot.biases];
            let b = &net.params[slot.biases..slot.biases + slot.outputs];
            let input = &self.acts[l];
            for (o, zo) in self.pre[l].iter_mut().enumerate() {
                *zo = b[o] + dot(&w[o * slot.inputs..(o + 1) * slot.inputs], input);
            }
            if l < last {
                for (a, &zv) in self.acts[l + 1].iter_mut().zip(&self.pre[l]) {
                    *a = elu(zv, net.alpha);
                }
            }
        }
        self.pre[last][0]
    }

    /// Accumulates `d(loss)/d(params)` for one sample whose output-layer
    /// derivative is `d_out`. Must follow `forward` on the same sample.
    fn backward(&mut self, net: &DenseNetwork, d_out: f64, grad: &mut [f64]) {
        let last = net.slots.len() - 1;
        self.delta[0] = d_out;
        for l in (0..=last).rev() {
            let slot = net.slots[l];
            let delta = &self.delta[..slot.outputs];
            let input = &self.acts[l];
            let (gw, gb) = grad[slot.weights..slot.biases + slot.outputs].split_at_mut(slot.biases - slot.weights);
            for (o, &d) in delta.iter().enumerate() {
                gb[o] += d;
                axpy(d, input, &mut gw[o * slot.inputs..(o + 1) * slot.inputs]);
            }
            if l == 0 {
                break;
            }
            let w = &net.params[slot.weights..slot.biases];
            let din = &mut self.delta_in[..slot.inputs];
            din.fill(0.0);
            for (o, &d) in delta.iter().enumerate() {
                axpy(d, &w[o * slot.inputs..(o + 1) * slot.inputs], din);
            }
            // ELU'(z) = 1 for z > 0, elu(z) + alpha otherwise.
            for ((di, &z), &a) in din.iter_mut().zip(&self.pre[l - 1]).zip(&self.acts[l]) {
                if z <= 0.0 {
                    *di *= a + net.alpha;
                }
            }
            core::mem::swap(&mut self.delta, &mut self.delta_in);
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Paired `(input, target)` samples a network is trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl TrainingSet {
    pub fn new(inputs: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(invalid("training set is empty"));
        }
        if inputs.len() != targets.len() {
            return Err(invalid("inputs and targets differ in length"));
        }
        if !inputs.iter().chain(&targets).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("training set"));
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}

/// Gradient of the loss, laid out exactly like [`DenseNetwork::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<f64>);

impl Gradients {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn batch_loss_and_gradient(
    net: &DenseNetwork,
    ws: &mut Workspace,
    data: &TrainingSet,
    batch: Option<&[usize]>,
    grad: &mut [f64],
) -> f64 {
    grad.fill(0.0);
    let count = batch.map_or(data.len(), <[usize]>::len);
    let scale = 2.0 / count as f64;
    let mut sse = 0.0;
    let mut visit = |i: usize| {
        let y = ws.forward(net, data.inputs[i]);
        let r = y - data.targets[i];
        sse += r * r;
        ws.backward(net, scale * r, grad);
    };
    match batch {
        Some(idx) => idx.iter().for_each(|&i| visit(i)),
        None => (0..data.len()).for_each(visit),
    }
    sse / count as f64
}

/// Mean squared error over `batch` and its exact gradient.
pub fn loss_and_gradient(net: &DenseNetwork, batch: &TrainingSet) -> Result<(f64, Gradients)> {
    let mut ws = Workspace::new(net);
    let mut grad = vec![0.0; net.param_count()];
    let loss = batch_loss_and_gradient(net, &mut ws, batch, None, &mut grad);
    if loss.is_finite() {
        Ok((loss, Gradients(grad)))
    } else {
        Err(Error::NonFinite("loss"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Zeroed moments for a network with `param_count` parameters and the
    /// usual defaults (`beta1 = 0.9`, `beta2 = 0.999`, `epsilon = 1e-8`).
    pub fn new(param_count: usize) -> Self {
        Self {
            first_moment: vec![0.0; param_count],
            second_moment: vec![0.0; param_count],
            step_count: 0,
            learning_rate: DEFAULT_LEARNING_RATE,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn for_network(net: &DenseNetwork) -> Self {
        Self::new(net.param_count())
    }

    pub fn with_learning_rate(mut self, learning_rate: f64) -> Self {
        self.learning_rate = learning_rate;
        self
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(net: &mut DenseNetwork, state: &mut AdamState, gradients: &Gradients) -> Result<()> {
    adam_update(&mut net.params, state, &gradients.0)
}

fn adam_update(params: &mut [f64], state: &mut AdamState, grad: &[f64]) -> Result<()> {
    if grad.len() != params.len()
        || state.first_moment.len() != params.len()
        || state.second_moment.len() != params.len()
    {
        return Err(invalid("gradient or moment shape does not match the network"));
    }
    state.step_count += 1;
    let t = state.step_count as f64;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - libm::pow(b1, t);
    let c2 = 1.0 - libm::pow(b2, t);
    let lr = state.learning_rate;
    let eps = state.epsilon;
    for (((p, m), v), &g) in params
        .iter_mut()
        .zip(state.first_moment.iter_mut())
        .zip(state.second_moment.iter_mut())
        .zip(grad)
    {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (libm::sqrt(v_hat) + eps);
    }
    Ok(())
}

/// A network, its optimizer state and its data, advanced in resumable chunks.
///
/// Each step uses `min(batch_size, data.len())` points. A full-size batch is
/// the whole set in order; smaller batches are drawn without replacement by a
/// partial Fisher-Yates shuffle on a generator seeded once at construction,
/// so chunked and one-shot training produce the same parameters.
#[derive(Debug, Clone)]
pub struct Trainer {
    net: DenseNetwork,
    adam: AdamState,
    data: TrainingSet,
    batch_size: usize,
    rng: ChaCha8Rng,
    order: Vec<usize>,
    grad: Vec<f64>,
    ws: Workspace,
    last_loss: Option<f64>,
}

impl Trainer {
    pub fn new(net: DenseNetwork, adam: AdamState, data: TrainingSet, batch_size: usize, seed: u64) -> Result<Self> {
        if batch_size == 0 {
            return Err(invalid("batch size must be at least 1"));
        }
        if adam.first_moment.len() != net.param_count() {
            return Err(invalid("optimizer state does not match the network"));
        }
        let ws = Workspace::new(&net);
        Ok(Self {
            grad: vec![0.0; net.param_count()],
            order: (0..data.len()).collect(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            net,
            adam,
            data,
            batch_size,
            ws,
            last_loss: None,
        })
    }

    /// Runs one update and returns the batch loss it was computed from.
    pub fn step(&mut self) -> Result<f64> {
        let n = self.data.len();
        let loss = if self.batch_size >= n {
            batch_loss_and_gradient(&self.net, &mut self.ws, &self.data, None, &mut self.grad)
        } else {
            for i in 0..self.batch_size {
                let j = self.rng.gen_range(i..n);
                self.order.swap(i, j);
            }
            let batch = &self.order[..self.batch_size];
            batch_loss_and_gradient(&self.net, &mut self.ws, &self.data, Some(batch), &mut self.grad)
        };
        if !loss.is_finite() {
            return Err(Error::NonFinite("training loss"));
        }
        adam_update(&mut self.net.params, &mut self.adam, &self.grad)?;
        self.last_loss = Some(loss);
        Ok(loss)
    }

    pub fn advance(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    pub fn network(&self) -> &DenseNetwork {
        &self.net
    }

    pub fn adam(&self) -> &AdamState {
        &self.adam
    }

    pub fn data(&self) -> &TrainingSet {
        &self.data
    }

    pub fn updates(&self) -> u64 {
        self.adam.step_count
    }

    pub fn last_loss(&self) -> Option<f64> {
        self.last_loss
    }

    pub fn into_parts(self) -> (DenseNetwork, AdamState) {
        (self.net, self.adam)
    }
}

/// Runs `updates` Adam steps and returns the trained network, its optimizer
/// state and the per-update batch losses.
pub fn train(
    net: DenseNetwork,
    state: AdamState,
    data: &TrainingSet,
    updates: usize,
    batch_size: usize,
    seed: u64,
) -> Result<(DenseNetwork, AdamState, Vec<f64>)> {
    let mut trainer = Trainer::new(net, state, data.clone(), batch_size, seed)?;
    let mut history = Vec::with_capacity(updates);
    for _ in 0..updates {
        history.push(trainer.step()?);
    }
    let (net, state) = trainer.into_parts();
    Ok((net, state, history))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Straightforward evaluator that shares nothing with `Workspace`.
    fn naive_forward(net: &DenseNetwork, x: f64) -> f64 {
        let mut a = vec![x];
        let last = net.layer_count() - 1;
        for l in 0..net.layer_count() {
            let w = net.weights(l);
            let b = net.biases(l);
            let n_in = a.len();
            let mut z = vec![0.0; b.len()];
            for o in 0..b.len() {
                let mut s = b[o];
                for i in 0..n_in {
                    s += w[o * n_in + i] * a[i];
                }
                z[o] = s;
            }
            a = if l < last {
                z.iter().map(|&v| if v > 0.0 { v } else { v.exp() - 1.0 }).collect()
            } else {
                z
            };
        }
        a[0]
    }

    fn fd_gradient(net: &DenseNetwork, data: &TrainingSet, step: f64) -> Vec<f64> {
        let loss = |n: &DenseNetwork| -> f64 {
            data.inputs()
                .iter()
                .zip(data.targets())
                .map(|(&x, &t)| (naive_forward(n, x) - t).powi(2))
                .sum::<f64>()
                / data.len() as f64
        };
        let mut probe = net.clone();
        (0..net.param_count())
            .map(|p| {
                let orig = probe.params()[p];
                probe.params_mut()[p] = orig + step;
                let up = loss(&probe);
                probe.params_mut()[p] = orig - step;
                let down = loss(&probe);
                probe.params_mut()[p] = orig;
                (up - down) / (2.0 * step)
            })
            .collect()
    }

    #[test]
    fn elu_values() {
        assert_eq!(elu(0.0, 1.0), 0.0);
        assert_eq!(elu(3.0, 1.0), 3.0);
        assert!((elu(-1.0, 1.0) - (libm::exp(-1.0) - 1.0)).abs() < 1e-15);
        assert!((elu(-1.0, 1.0) + 0.6321).abs() < 1e-4);
        let h = 1e-8;
        assert!((elu(h, 1.0) - elu(-h, 1.0)).abs() < 1e-7);
    }

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let a = init_network(&[1, 40, 40, 40, 1], 42).unwrap();
        let b = init_network(&[1, 40, 40, 40, 1], 42).unwrap();
        let bits = |n: &DenseNetwork| n.params().iter().map(|p| p.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let c = init_network(&[1, 2, 1], 7).unwrap();
        for l in 0..c.layer_count() {
            assert!(c.biases(l).iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn init_respects_glorot_bound() {
        for seed in 0..20 {
            let net = init_network(&[1, 5, 1], seed).unwrap();
            // fan_in + fan_out = 6 for both layers
            for l in 0..2 {
                assert!(net.weights(l).iter().all(|w| w.abs() <= 1.0));
            }
        }
    }

    #[test]
    fn init_rejects_bad_shapes() {
        assert!(init_network(&[1], 0).is_err());
        assert!(init_network(&[1, 0, 1], 0).is_err());
        assert!(init_network(&[], 0).is_err());
    }

    #[test]
    fn forward_zero_and_affine() {
        let zero = DenseNetwork::zeros(&[1, 40, 40, 40, 1]).unwrap();
        for x in [-3.0, 0.0, 0.7] {
            assert_eq!(zero.forward(x).unwrap(), 0.0);
        }
        let mut lin = DenseNetwork::zeros(&[1, 1]).unwrap();
        lin.weights_mut(0)[0] = 2.5;
        lin.biases_mut(0)[0] = -0.75;
        assert_eq!(lin.forward(0.4).unwrap(), 2.5 * 0.4 - 0.75);
    }

    #[test]
    fn forward_matches_naive_evaluator() {
        for seed in 0..10 {
            let mut net = init_network(&[1, 5, 1], seed).unwrap();
            for (i, b) in net.biases_mut(0).iter_mut().enumerate() {
                *b = 0.1 * i as f64 - 0.2;
            }
            let y = net.forward(0.3).unwrap();
            assert!((y - naive_forward(&net, 0.3)).abs() < 1e-14);
        }
    }

    #[test]
    fn forward_reports_non_finite() {
        let mut net = DenseNetwork::zeros(&[1, 1]).unwrap();
        net.biases_mut(0)[0] = f64::INFINITY;
        assert!(matches!(net.forward(0.0), Err(Error::NonFinite(_))));
    }

    #[test]
    fn zero_net_perfect_fit() {
        let net = DenseNetwork::zeros(&[1, 3, 1]).unwrap();
        let data = TrainingSet::new(vec![0.5], vec![0.0]).unwrap();
        let (loss, grad) = loss_and_gradient(&net, &data).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.0.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn self_consistent_batch_has_zero_loss() {
        let net = init_network(&[1, 8, 8, 1], 3).unwrap();
        let xs: Vec<f64> = (0..9).map(|i| -1.0 + 0.25 * i as f64).collect();
        let ys = net.predict(&xs).unwrap();
        let (loss, _) = loss_and_gradient(&net, &TrainingSet::new(xs, ys).unwrap()).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut net = init_network(&[1, 5, 5, 1], 5).unwrap();
        for p in net.params_mut() {
            *p += rng.gen_range(-0.2..0.2);
        }
        let xs: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ts: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let data = TrainingSet::new(xs, ts).unwrap();
        let (_, grad) = loss_and_gradient(&net, &data).unwrap();
        let fd = fd_gradient(&net, &data, 1e-6);
        for (a, n) in grad.0.iter().zip(&fd) {
            let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-6);
            assert!(rel < 1e-4, "analytic {a} vs numeric {n}");
        }
    }

    #[test]
    fn adam_zero_gradient_is_fixed_point() {
        let mut net = init_network(&[1, 4, 1], 1).unwrap();
        let before = net.clone();
        let mut state = AdamState::for_network(&net);
        let zero = Gradients(vec![0.0; net.param_count()]);
        adam_step(&mut net, &mut state, &zero).unwrap();
        assert_eq!(net, before);
        assert_eq!(state.step_count, 1);
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        // At t = 1: m_hat = g, v_hat = g^2, step = lr * g / (|g| + eps).
        for g in [0.37, -2.0, 0.05] {
            let mut net = DenseNetwork::zeros(&[1, 3, 1]).unwrap();
            let mut state = AdamState::for_network(&net);
            let lr = state.learning_rate;
            let grad = Gradients(vec![g; net.param_count()]);
            adam_step(&mut net, &mut state, &grad).unwrap();
            for &p in net.params() {
                assert!((p + lr * g.signum()).abs() < 1e-6 * lr, "g = {g}, p = {p}");
            }
        }
    }

    #[test]
    fn adam_rejects_shape_mismatch() {
        let mut net = DenseNetwork::zeros(&[1, 3, 1]).unwrap();
        let mut state = AdamState::for_network(&net);
        assert!(adam_step(&mut net, &mut state, &Gradients(vec![0.0; 2])).is_err());
    }

    #[test]
    fn train_zero_updates_is_noop() {
        let net = init_network(&[1, 4, 1], 9).unwrap();
        let data = TrainingSet::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        let (trained, state, hist) = train(net.clone(), AdamState::for_network(&net), &data, 0, 100, 0).unwrap();
        assert_eq!(trained, net);
        assert_eq!(state.step_count, 0);
        assert!(hist.is_empty());
    }

    #[test]
    fn small_sets_train_full_batch() {
        let xs: Vec<f64> = (0..11).map(|k| -1.0 + 0.2 * k as f64).collect();
        let ts: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let data = TrainingSet::new(xs, ts).unwrap();
        let net = init_network(&[1, 6, 1], 2).unwrap();
        // Full batch ignores the seed entirely.
        let a = train(net.clone(), AdamState::for_network(&net), &data, 5, 100, 1).unwrap();
        let b = train(net.clone(), AdamState::for_network(&net), &data, 5, 100, 999).unwrap();
        assert_eq!(a.0, b.0);
        let (full_loss, _) = loss_and_gradient(&net, &data).unwrap();
        assert_eq!(a.2[0], full_loss);
    }

    #[test]
    fn chunked_training_matches_one_shot() {
        let xs: Vec<f64> = (0..300).map(|k| k as f64 / 150.0 - 1.0).collect();
        let ts: Vec<f64> = xs.iter().map(|x| libm::sin(3.0 * x)).collect();
        let data = TrainingSet::new(xs, ts).unwrap();
        let net = init_network(&[1, 8, 8, 1], 4).unwrap();
        let (one, _, _) = train(net.clone(), AdamState::for_network(&net), &data, 30, 100, 17).unwrap();
        let mut chunked = Trainer::new(net.clone(), AdamState::for_network(&net), data, 100, 17).unwrap();
        chunked.advance(10).unwrap();
        chunked.advance(20).unwrap();
        assert_eq!(chunked.network(), &one);
    }

    #[test]
    fn empty_training_set_is_rejected() {
        assert!(TrainingSet::new(vec![], vec![]).is_err());
        assert!(TrainingSet::new(vec![1.0], vec![]).is_err());
        assert!(TrainingSet::new(vec![f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn learns_a_linear_target() {
        let xs: Vec<f64> = (0..64).map(|k| -1.0 + 2.0 * k as f64 / 63.0).collect();
        let ts: Vec<f64> = xs.iter().map(|x| 0.2 * x).collect();
        let data = TrainingSet::new(xs, ts).unwrap();
        let net = init_network(&[1, 40, 40, 40, 1], 0).unwrap();
        let (initial, _) = loss_and_gradient(&net, &data).unwrap();
        let (trained, _, _) = train(net.clone(), AdamState::for_network(&net), &data, 2000, 100, 0).unwrap();
        let (fin, _) = loss_and_gradient(&trained, &data).unwrap();
        assert!(fin < 1e-4, "final mse {fin}");
        assert!(initial / fin >= 100.0, "initial {initial} final {fin}");
    }
}
