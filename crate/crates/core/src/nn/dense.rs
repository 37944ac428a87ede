use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sigmoid,
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation output `a`.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }

    /// Global Lipschitz constant of the scalar activation.
    pub fn max_slope(self) -> f64 {
        match self {
            Activation::Sigmoid => 0.25,
            Activation::Relu | Activation::Tanh => 1.0,
        }
    }
}

/// Affine layer acting on row batches: `out = input * weight + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `fan_in x fan_out`
    pub weight: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl Layer {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weight: DMatrix::zeros(fan_in, fan_out),
            bias: DVector::zeros(fan_out),
        }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        Self {
            weight: DMatrix::from_fn(fan_in, fan_out, |_, _| rng.random_range(-bound..bound)),
            bias: DVector::zeros(fan_out),
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weight.nrows()
    }

    pub fn fan_out(&self) -> usize {
        self.weight.ncols()
    }

    fn n_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

/// Feed-forward network with one activation between layers and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<Layer>,
    activation: Activation,
}

/// Intermediate values of a forward pass, consumed by [`DenseNet::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `inputs[l]` is the input to layer `l`; the last entry is the network output.
    activations: Vec<DMatrix<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &DMatrix<f64> {
        self.activations
            .last()
            .expect("cache always holds the input")
    }
}

/// Gradients of a scalar loss with respect to parameters and input.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
    pub input: DMatrix<f64>,
}

impl Gradients {
    /// Parameter gradients in the order of [`DenseNet::params`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.layers.iter().map(Layer::n_params).sum());
        for l in &self.layers {
            out.extend(l.weight.iter());
            out.extend(l.bias.iter());
        }
        out
    }
}

impl DenseNet {
    pub fn new(layers: Vec<Layer>, activation: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Parameter("network needs at least one layer".into()));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].fan_out() != pair[1].fan_in() {
                return Err(Error::dims(
                    format!("layer {} fan_in {}", k + 1, pair[0].fan_out()),
                    pair[1].fan_in(),
                ));
            }
        }
        for l in &layers {
            if l.bias.len() != l.fan_out() {
                return Err(Error::dims(l.fan_out(), l.bias.len()));
            }
            if l.weight.iter().chain(l.bias.iter()).any(|v| !v.is_finite()) {
                return Err(Error::Input("network parameters must be finite".into()));
            }
        }
        Ok(Self { layers, activation })
    }

    /// Glorot-initialized network with the given layer widths.
    pub fn random<R: Rng + ?Sized>(
        widths: &[usize],
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::Parameter(
                "need at least input and output widths".into(),
            ));
        }
        let layers = widths
            .windows(2)
            .map(|w| Layer::glorot(w[0], w[1], rng))
            .collect();
        Self::new(layers, activation)
    }

    pub fn zeros(widths: &[usize], activation: Activation) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::Parameter(
                "need at least input and output widths".into(),
            ));
        }
        let layers = widths
            .windows(2)
            .map(|w| Layer::zeros(w[0], w[1]))
            .collect();
        Self::new(layers, activation)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(Layer::fan_out).unwrap_or(0)
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Layer::n_params).sum()
    }

    /// All parameters flattened: per layer, weight (column-major) then bias.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend(l.weight.iter());
            out.extend(l.bias.iter());
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::dims(self.n_params(), flat.len()));
        }
        let mut offset = 0;
        for l in &mut self.layers {
            let nw = l.weight.len();
            l.weight
                .as_mut_slice()
                .copy_from_slice(&flat[offset..offset + nw]);
            offset += nw;
            let nb = l.bias.len();
            l.bias
                .as_mut_slice()
                .copy_from_slice(&flat[offset..offset + nb]);
            offset += nb;
        }
        Ok(())
    }

    fn check_batch(&self, batch: &DMatrix<f64>) -> Result<()> {
        if batch.ncols() != self.input_dim() {
            return Err(Error::dims(
                format!("{} input columns", self.input_dim()),
                batch.ncols(),
            ));
        }
        Ok(())
    }

    /// Output for every row of `batch`.
    pub fn forward(&self, batch: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_batch(batch)?;
        let last = self.layers.len() - 1;
        let mut a = self.affine(0, batch);
        for k in 1..=last {
            a.apply(|v| *v = self.activation.apply(*v));
            a = self.affine(k, &a);
        }
        Ok(a)
    }

    fn affine(&self, k: usize, input: &DMatrix<f64>) -> DMatrix<f64> {
        let layer = &self.layers[k];
        let mut z = input * &layer.weight;
        for (mut col, b) in z.column_iter_mut().zip(layer.bias.iter()) {
            col.add_scalar_mut(*b);
        }
        z
    }

    pub fn forward_cached(&self, batch: &DMatrix<f64>) -> Result<ForwardCache> {
        self.check_batch(batch)?;
        let last = self.layers.len() - 1;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(batch.clone());
        for k in 0..=last {
            let mut z = self.affine(k, activations.last().unwrap());
            if k < last {
                z.apply(|v| *v = self.activation.apply(*v));
            }
            activations.push(z);
        }
        Ok(ForwardCache { activations })
    }

    /// Reverse-mode gradients of `sum(upstream ∘ output)`.
    pub fn backward(&self, cache: &ForwardCache, upstream: &DMatrix<f64>) -> Result<Gradients> {
        self.backward_impl(cache, upstream, true)
    }

    /// Like [`DenseNet::backward`] but skips the input gradient (left empty).
    pub fn backward_params(
        &self,
        cache: &ForwardCache,
        upstream: &DMatrix<f64>,
    ) -> Result<Gradients> {
        self.backward_impl(cache, upstream, false)
    }

    fn backward_impl(
        &self,
        cache: &ForwardCache,
        upstream: &DMatrix<f64>,
        need_input: bool,
    ) -> Result<Gradients> {
        let out = cache.output();
        if upstream.shape() != out.shape() {
            return Err(Error::dims(
                format!("{}x{}", out.nrows(), out.ncols()),
                format!("{}x{}", upstream.nrows(), upstream.ncols()),
            ));
        }
        let mut grads: Vec<Layer> = Vec::with_capacity(self.layers.len());
        let mut g = upstream.clone();
        for k in (0..self.layers.len()).rev() {
            let input = &cache.activations[k];
            let weight_grad = input.transpose() * &g;
            let bias_grad = DVector::from_iterator(g.ncols(), g.column_iter().map(|c| c.sum()));
            if k == 0 && !need_input {
                grads.push(Layer {
                    weight: weight_grad,
                    bias: bias_grad,
                });
                g = DMatrix::zeros(0, 0);
                break;
            }
            let mut g_in = &g * self.layers[k].weight.transpose();
            if k > 0 {
                let act = self.activation;
                g_in.zip_apply(input, |gv, a| *gv *= act.derivative_from_output(a));
            }
            grads.push(Layer {
                weight: weight_grad,
                bias: bias_grad,
            });
            g = g_in;
        }
        grads.reverse();
        Ok(Gradients {
            layers: grads,
            input: g,
        })
    }

    /// Clamp every weight and bias into `[-c, c]`.
    pub fn clip_params(&mut self, c: f64) {
        let c = c.max(0.0);
        for l in &mut self.layers {
            l.weight.apply(|v| *v = v.clamp(-c, c));
            l.bias.apply(|v| *v = v.clamp(-c, c));
        }
    }

    pub fn max_abs_param(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weight.iter().chain(l.bias.iter()))
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Upper bound on the Euclidean Lipschitz constant: the product of layer
    /// Frobenius norms times the activation slope between layers.
    pub fn lipschitz_upper_bound(&self) -> f64 {
        let slope = self
            .activation
            .max_slope()
            .powi(self.layers.len() as i32 - 1);
        self.layers.iter().map(|l| l.weight.norm()).product::<f64>() * slope
    }
}

/// Free-function form of [`DenseNet::clip_params`].
pub fn clip_params(net: &mut DenseNet, c: f64) {
    net.clip_params(c);
}
