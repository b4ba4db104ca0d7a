//! Feed-forward network with hand-written reverse-mode gradients.

use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

static NEXT_STAMP: AtomicU64 = AtomicU64::new(1);

fn fresh_stamp() -> u64 {
    NEXT_STAMP.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Linear,
    Tanh,
}

/// Dense layer; `weights` is row-major `[outputs][inputs]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn affine(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.outputs {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            out.push(self.biases[o] + dot(row, input));
        }
    }
}

/// Dot product with four independent partial sums so the loop vectorizes;
/// the summation order is fixed, keeping results bit-reproducible.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// ReLU hidden layers followed by a linear or tanh head.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Layer>,
    output: OutputActivation,
    /// Identifies the current parameter values; forward caches carry it so a
    /// backward pass against modified parameters is refused.
    #[serde(skip, default = "fresh_stamp")]
    stamp: u64,
}

impl PartialEq for Mlp {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers && self.output == other.output
    }
}

/// Activations recorded by [`Mlp::forward_cached`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    stamp: u64,
    input: Vec<f64>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        &self.post[self.post.len() - 1]
    }
}

/// Parameter gradients laid out like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]))
                .collect(),
        }
    }

    pub fn scale(&mut self, k: f64) {
        for (w, b) in &mut self.layers {
            w.iter_mut().chain(b.iter_mut()).for_each(|g| *g *= k);
        }
    }

    /// Gradient of the `i`-th parameter in [`Mlp::param`] order.
    pub fn get(&self, mut i: usize) -> f64 {
        for (w, b) in &self.layers {
            if i < w.len() {
                return w[i];
            }
            i -= w.len();
            if i < b.len() {
                return b[i];
            }
            i -= b.len();
        }
        panic!("gradient index out of range");
    }
}

impl Mlp {
    /// Random network with weights and biases uniform in ±1/√fan_in.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], output: OutputActivation, rng: &mut R) -> Result<Self> {
        Self::build(sizes, output, |fan_in| {
            let bound = 1.0 / libm::sqrt(fan_in as f64);
            rng.random_range(-bound..=bound)
        })
    }

    pub fn zeros(sizes: &[usize], output: OutputActivation) -> Result<Self> {
        Self::build(sizes, output, |_| 0.0)
    }

    fn build(sizes: &[usize], output: OutputActivation, mut init: impl FnMut(usize) -> f64) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::invalid("network needs at least an input and an output layer of non-zero width"));
        }
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (i, o) = (w[0], w[1]);
                let weights = (0..i * o).map(|_| init(i)).collect();
                let biases = (0..o).map(|_| init(i)).collect();
                Layer {
                    inputs: i,
                    outputs: o,
                    weights,
                    biases,
                }
            })
            .collect();
        Ok(Mlp {
            layers,
            output,
            stamp: fresh_stamp(),
        })
    }

    /// Assembles a network from explicit layers.
    pub fn from_layers(layers: Vec<Layer>, output: OutputActivation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("network needs at least one layer"));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs || l.outputs == 0 {
                return Err(Error::invalid(alloc::format!("layer {k} has inconsistent shape")));
            }
            if k > 0 && layers[k - 1].outputs != l.inputs {
                return Err(Error::invalid(alloc::format!("layer {k} does not chain with its predecessor")));
            }
            if l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()) {
                return Err(Error::invalid(alloc::format!("layer {k} has non-finite parameters")));
            }
        }
        Ok(Mlp {
            layers,
            output,
            stamp: fresh_stamp(),
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_dim()];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::invalid(alloc::format!(
                "network expects {} inputs, got {}",
                self.input_dim(),
                input.len()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut a = input.to_vec();
        let mut z = Vec::new();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            layer.affine(&a, &mut z);
            if k == last {
                self.activate_output(&mut z);
            } else {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            core::mem::swap(&mut a, &mut z);
        }
        Ok(a)
    }

    fn activate_output(&self, z: &mut [f64]) {
        if self.output == OutputActivation::Tanh {
            z.iter_mut().for_each(|v| *v = libm::tanh(*v));
        }
    }

    /// Forward pass that keeps what [`Mlp::backward`] needs.
    pub fn forward_cached(&self, input: &[f64]) -> Result<ForwardCache> {
        self.check_input(input)?;
        let last = self.layers.len() - 1;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for (k, layer) in self.layers.iter().enumerate() {
            let a = if k == 0 { input } else { &post[k - 1] };
            let mut z = Vec::with_capacity(layer.outputs);
            layer.affine(a, &mut z);
            let mut out = z.clone();
            if k == last {
                self.activate_output(&mut out);
            } else {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            pre.push(z);
            post.push(out);
        }
        Ok(ForwardCache {
            stamp: self.stamp,
            input: input.to_vec(),
            pre,
            post,
        })
    }

    fn check_cache(&self, cache: &ForwardCache, grad_out: &[f64]) -> Result<()> {
        if cache.stamp != self.stamp || cache.pre.len() != self.layers.len() {
            return Err(Error::Usage("forward cache is stale or belongs to another network".into()));
        }
        if grad_out.len() != self.output_dim() {
            return Err(Error::invalid("output gradient has the wrong dimension"));
        }
        Ok(())
    }

    fn output_delta(&self, cache: &ForwardCache, grad_out: &[f64]) -> Vec<f64> {
        match self.output {
            OutputActivation::Linear => grad_out.to_vec(),
            OutputActivation::Tanh => grad_out
                .iter()
                .zip(cache.output())
                .map(|(g, y)| g * (1.0 - y * y))
                .collect(),
        }
    }

    /// Exact gradients of `grad_out · f(input)` with respect to every
    /// parameter and to the input.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &[f64]) -> Result<(Gradients, Vec<f64>)> {
        let mut grads = Gradients::zeros_like(self);
        let gin = self.backward_accumulate(cache, grad_out, &mut grads)?;
        Ok((grads, gin))
    }

    /// As [`Mlp::backward`], adding parameter gradients into `acc`.
    pub fn backward_accumulate(&self, cache: &ForwardCache, grad_out: &[f64], acc: &mut Gradients) -> Result<Vec<f64>> {
        self.check_cache(cache, grad_out)?;
        let mut delta = self.output_delta(cache, grad_out);
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let a = if k == 0 { &cache.input } else { &cache.post[k - 1] };
            let (gw, gb) = &mut acc.layers[k];
            for o in 0..layer.outputs {
                let d = delta[o];
                gb[o] += d;
                if d != 0.0 {
                    let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                    for (g, x) in row.iter_mut().zip(a) {
                        *g += d * x;
                    }
                }
            }
            let mut below = self.transpose_mul(layer, &delta);
            if k > 0 {
                for (g, z) in below.iter_mut().zip(&cache.pre[k - 1]) {
                    if *z <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            delta = below;
        }
        Ok(delta)
    }

    /// Gradient with respect to the input only.
    pub fn input_gradient(&self, cache: &ForwardCache, grad_out: &[f64]) -> Result<Vec<f64>> {
        self.check_cache(cache, grad_out)?;
        let mut delta = self.output_delta(cache, grad_out);
        for k in (0..self.layers.len()).rev() {
            let mut below = self.transpose_mul(&self.layers[k], &delta);
            if k > 0 {
                for (g, z) in below.iter_mut().zip(&cache.pre[k - 1]) {
                    if *z <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            delta = below;
        }
        Ok(delta)
    }

    fn transpose_mul(&self, layer: &Layer, delta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; layer.inputs];
        for o in 0..layer.outputs {
            let d = delta[o];
            if d == 0.0 {
                continue;
            }
            let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
            for (g, w) in out.iter_mut().zip(row) {
                *g += d * w;
            }
        }
        out
    }

    /// Plain SGD step `θ ← θ − lr·g`.
    pub fn apply_sgd(&mut self, grads: &Gradients, lr: f64) {
        for (layer, (gw, gb)) in self.layers.iter_mut().zip(&grads.layers) {
            for (w, g) in layer.weights.iter_mut().zip(gw) {
                *w -= lr * g;
            }
            for (b, g) in layer.biases.iter_mut().zip(gb) {
                *b -= lr * g;
            }
        }
        self.stamp = fresh_stamp();
    }

    pub fn copy_from(&mut self, src: &Mlp) {
        self.layers.clone_from(&src.layers);
        self.output = src.output;
        self.stamp = fresh_stamp();
    }

    /// `θ ← τ·θ_src + (1 − τ)·θ`.
    pub fn soft_update_from(&mut self, src: &Mlp, tau: f64) {
        for (dst, s) in self.layers.iter_mut().zip(&src.layers) {
            for (d, v) in dst.weights.iter_mut().zip(&s.weights) {
                *d = tau * v + (1.0 - tau) * *d;
            }
            for (d, v) in dst.biases.iter_mut().zip(&s.biases) {
                *d = tau * v + (1.0 - tau) * *d;
            }
        }
        self.stamp = fresh_stamp();
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Parameters enumerated layer by layer, weights before biases.
    pub fn param(&self, mut i: usize) -> f64 {
        for l in &self.layers {
            if i < l.weights.len() {
                return l.weights[i];
            }
            i -= l.weights.len();
            if i < l.biases.len() {
                return l.biases[i];
            }
            i -= l.biases.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, mut i: usize, v: f64) {
        self.stamp = fresh_stamp();
        for l in &mut self.layers {
            if i < l.weights.len() {
                l.weights[i] = v;
                return;
            }
            i -= l.weights.len();
            if i < l.biases.len() {
                l.biases[i] = v;
                return;
            }
            i -= l.biases.len();
        }
        panic!("parameter index out of range");
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }
}
