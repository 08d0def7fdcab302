//! Dense feed-forward networks with hand-written reverse-mode gradients.
//!
//! Weights are stored `(in, out)` so a layer computes `Y = act(X W + b)` on a
//! row-major batch `X`. [`forward`] records a [`Tape`] that [`backward`]
//! consumes; the tape carries a fingerprint of the parameters it was
//! recorded against so it cannot be replayed on a mutated network.

use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
    Sigmoid,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative expressed through the activation's output `y`.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
            Activation::Tanh => 2,
            Activation::Sigmoid => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            0 => Activation::Identity,
            1 => Activation::Relu,
            2 => Activation::Tanh,
            3 => Activation::Sigmoid,
            _ => return None,
        })
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    weight: Matrix,
    bias: Vec<f64>,
    activation: Activation,
}

impl Layer {
    pub fn new(weight: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weight.cols() {
            return Err(Error::Shape(format!(
                "bias has {} entries for a layer with {} outputs",
                bias.len(),
                weight.cols()
            )));
        }
        if bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("layer bias"));
        }
        Ok(Self {
            weight,
            bias,
            activation,
        })
    }

    pub fn input_width(&self) -> usize {
        self.weight.rows()
    }

    pub fn output_width(&self) -> usize {
        self.weight.cols()
    }

    pub fn weight(&self) -> &Matrix {
        &self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<Layer>,
}

impl DenseNet {
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("a network needs at least one layer".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].output_width() != pair[1].input_width() {
                return Err(Error::Dimension {
                    layer: i + 1,
                    expected: pair[0].output_width(),
                    found: pair[1].input_width(),
                });
            }
        }
        Ok(Self { layers })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(
        input_width: usize,
        spec: &[(usize, Activation)],
        rng: &mut R,
    ) -> Result<Self> {
        let mut layers = Vec::with_capacity(spec.len());
        let mut fan_in = input_width;
        for &(fan_out, activation) in spec {
            if fan_in == 0 || fan_out == 0 {
                return Err(Error::Shape("layer widths must be positive".into()));
            }
            let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-s, s).expect("finite bound");
            let data = (0..fan_in * fan_out).map(|_| dist.sample(rng)).collect();
            layers.push(Layer {
                weight: Matrix::from_raw(fan_in, fan_out, data),
                bias: vec![0.0; fan_out],
                activation,
            });
            fan_in = fan_out;
        }
        Self::from_layers(layers)
    }

    /// Fresh Glorot-initialized network with the same layer shapes and activations.
    pub fn reinitialized<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Self> {
        let spec: Vec<(usize, Activation)> = self
            .layers
            .iter()
            .map(|l| (l.output_width(), l.activation))
            .collect();
        Self::init(self.input_width(), &spec, rng)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].input_width()
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].output_width()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.as_slice().len() + l.bias.len())
            .sum()
    }

    /// Parameter arrays in layer order, named `layer<i>.weight` / `layer<i>.bias`.
    pub fn named_params(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for (i, l) in self.layers.iter().enumerate() {
            out.push((format!("layer{i}.weight"), l.weight.as_slice()));
            out.push((format!("layer{i}.bias"), l.bias.as_slice()));
        }
        out
    }

    /// All parameters flattened in `named_params` order.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.weight.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    /// Replaces every parameter from a flat vector in `named_params` order.
    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parameters"));
        }
        let mut offset = 0;
        for l in &mut self.layers {
            let w = l.weight.as_mut_slice();
            w.copy_from_slice(&values[offset..offset + w.len()]);
            offset += w.len();
            let n = l.bias.len();
            l.bias.copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    pub(crate) fn param_slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers.iter_mut().flat_map(|l| {
            [l.weight.as_mut_slice(), l.bias.as_mut_slice()].into_iter()
        })
    }

    /// True when both nets have the same layer widths and activations.
    pub fn same_architecture(&self, other: &DenseNet) -> bool {
        self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.weight.shape() == b.weight.shape() && a.activation == b.activation
            })
    }

    /// FNV-1a over shapes, activations and parameter bits.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for l in &self.layers {
            eat(l.weight.rows() as u64);
            eat(l.weight.cols() as u64);
            eat(u64::from(l.activation.tag()));
            for v in l.weight.as_slice().iter().chain(&l.bias) {
                eat(v.to_bits());
            }
        }
        h
    }

    /// Convenience forward pass that drops the tape.
    pub fn predict(&self, batch: &Matrix) -> Result<Matrix> {
        forward(self, batch).map(|(out, _)| out)
    }
}

/// Cached activations from one forward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    fingerprint: u64,
    /// `activations[0]` is the input batch, `activations[i + 1]` the output of layer `i`.
    activations: Vec<Matrix>,
}

impl Tape {
    pub fn output(&self) -> &Matrix {
        self.activations.last().expect("tape holds the input")
    }
}

pub fn forward(net: &DenseNet, batch: &Matrix) -> Result<(Matrix, Tape)> {
    if batch.cols() != net.input_width() {
        return Err(Error::Dimension {
            layer: 0,
            expected: net.input_width(),
            found: batch.cols(),
        });
    }
    let mut activations = Vec::with_capacity(net.layers.len() + 1);
    activations.push(batch.clone());
    for layer in &net.layers {
        let x = activations.last().expect("non-empty");
        activations.push(layer_forward(layer, x));
    }
    let output = activations.last().expect("non-empty").clone();
    if !output.is_finite() {
        return Err(Error::NonFinite("forward output"));
    }
    Ok((
        output,
        Tape {
            fingerprint: net.fingerprint(),
            activations,
        },
    ))
}

fn layer_forward(layer: &Layer, x: &Matrix) -> Matrix {
    let n = x.rows();
    let d_out = layer.output_width();
    let w = layer.weight.as_slice();
    let mut out = Vec::with_capacity(n * d_out);
    for r in 0..n {
        let start = out.len();
        out.extend_from_slice(&layer.bias);
        let acc = &mut out[start..];
        for (k, &xv) in x.row(r).iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            let wrow = &w[k * d_out..(k + 1) * d_out];
            for (a, &wv) in acc.iter_mut().zip(wrow) {
                *a += xv * wv;
            }
        }
        for a in acc.iter_mut() {
            *a = layer.activation.apply(*a);
        }
    }
    Matrix::from_raw(n, d_out, out)
}

/// Per-layer parameter gradients aligned with a [`DenseNet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    layers: Vec<LayerGrad>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weight: Matrix::zeros(l.weight.rows(), l.weight.cols()),
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    pub fn layers(&self) -> &[LayerGrad] {
        &self.layers
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(l.weight.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub(crate) fn slices(&self) -> impl Iterator<Item = &[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weight.as_slice(), l.bias.as_slice()].into_iter())
    }

    pub(crate) fn slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weight.as_mut_slice(), l.bias.as_mut_slice()].into_iter())
    }

    pub fn matches(&self, net: &DenseNet) -> bool {
        self.layers.len() == net.layers.len()
            && self.layers.iter().zip(&net.layers).all(|(g, l)| {
                g.weight.shape() == l.weight.shape() && g.bias.len() == l.bias.len()
            })
    }

    /// Element-wise `self += other`.
    pub fn accumulate(&mut self, other: &Gradients) -> Result<()> {
        if self.layers.len() != other.layers.len()
            || self
                .layers
                .iter()
                .zip(&other.layers)
                .any(|(a, b)| a.weight.shape() != b.weight.shape())
        {
            return Err(Error::Shape("gradient structures differ".into()));
        }
        for (a, b) in self.slices_mut().zip(other.slices()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.slices().all(|s| s.iter().all(|v| v.is_finite()))
    }
}

/// Parameter gradients plus the gradient with respect to the network input.
#[derive(Debug, Clone)]
pub struct Backprop {
    pub grads: Gradients,
    pub input_grad: Matrix,
}

/// Reverse-mode pass for the scalar whose gradient w.r.t. the output is `output_grad`.
pub fn backward(net: &DenseNet, tape: &Tape, output_grad: &Matrix) -> Result<Gradients> {
    backward_with_input(net, tape, output_grad).map(|b| b.grads)
}

pub fn backward_with_input(net: &DenseNet, tape: &Tape, output_grad: &Matrix) -> Result<Backprop> {
    if tape.fingerprint != net.fingerprint() || tape.activations.len() != net.layers.len() + 1 {
        return Err(Error::InvalidTape);
    }
    if output_grad.shape() != tape.output().shape() {
        return Err(Error::Shape(format!(
            "output gradient is {:?}, network output is {:?}",
            output_grad.shape(),
            tape.output().shape()
        )));
    }
    if !output_grad.is_finite() {
        return Err(Error::NonFinite("output gradient"));
    }

    let mut grads = Gradients::zeros_like(net);
    let mut upstream = output_grad.clone();
    for (i, layer) in net.layers.iter().enumerate().rev() {
        let x = &tape.activations[i];
        let y = &tape.activations[i + 1];
        let (n, d_in) = x.shape();
        let d_out = layer.output_width();

        // dL/dz = dL/dy * act'(z)
        let mut dz = upstream.into_vec();
        for (g, &yv) in dz.iter_mut().zip(y.as_slice()) {
            *g *= layer.activation.derivative_from_output(yv);
        }

        let lg = &mut grads.layers[i];
        let dw = lg.weight.as_mut_slice();
        for r in 0..n {
            let dzr = &dz[r * d_out..(r + 1) * d_out];
            for (b, &g) in lg.bias.iter_mut().zip(dzr) {
                *b += g;
            }
            for (k, &xv) in x.row(r).iter().enumerate() {
                if xv == 0.0 {
                    continue;
                }
                for (w, &g) in dw[k * d_out..(k + 1) * d_out].iter_mut().zip(dzr) {
                    *w += xv * g;
                }
            }
        }

        let w = layer.weight.as_slice();
        let mut dx = vec![0.0; n * d_in];
        for r in 0..n {
            let dzr = &dz[r * d_out..(r + 1) * d_out];
            for k in 0..d_in {
                let wrow = &w[k * d_out..(k + 1) * d_out];
                dx[r * d_in + k] = wrow.iter().zip(dzr).map(|(a, b)| a * b).sum();
            }
        }
        upstream = Matrix::from_raw(n, d_in, dx);
    }

    if !grads.is_finite() || !upstream.is_finite() {
        return Err(Error::NonFinite("gradients"));
    }
    Ok(Backprop {
        grads,
        input_grad: upstream,
    })
}
