//! The DAG-fitting model `f_theta` and the critic `T_phi`.

use nalgebra::DMatrix;
use rand::Rng;

use super::dense::{Activation, DenseNet, ForwardCache};
use crate::error::{Error, Result};
use crate::graph::WeightedAdjacency;

/// How the learner treats one entry of the fitting model's parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamRole {
    /// Carries an edge weight: L1-penalized and sign-split, enters `h`.
    Sparse,
    /// Self-influence; held at zero.
    Fixed,
    /// Ordinary unconstrained parameter.
    Free,
}

/// Data-fitting model `X_hat = f(X)`.
#[derive(Debug, Clone, PartialEq)]
pub enum FittingModel {
    /// `X_hat = X W`.
    Linear { weight: DMatrix<f64> },
    /// One network per node; net `j` maps a full row to `X_hat_j`.
    Mlp { nets: Vec<DenseNet> },
}

#[derive(Debug, Clone)]
pub struct FitCache {
    output: DMatrix<f64>,
    input: Option<DMatrix<f64>>,
    nets: Vec<ForwardCache>,
}

impl FitCache {
    pub fn output(&self) -> &DMatrix<f64> {
        &self.output
    }
}

impl FittingModel {
    /// All-zero `d x d` linear model.
    pub fn linear(d: usize) -> Self {
        FittingModel::Linear {
            weight: DMatrix::zeros(d, d),
        }
    }

    /// Per-node networks `d -> hidden -> 1`, Glorot-initialized, with each
    /// net's weights on its own node's input zeroed.
    pub fn mlp<R: Rng + ?Sized>(
        d: usize,
        hidden: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if d == 0 || hidden == 0 {
            return Err(Error::Parameter(
                "MLP fitting model needs d >= 1 and hidden >= 1".into(),
            ));
        }
        let mut nets = Vec::with_capacity(d);
        for j in 0..d {
            let mut net = DenseNet::random(&[d, hidden, 1], activation, rng)?;
            net.layers_mut()[0].weight.row_mut(j).fill(0.0);
            nets.push(net);
        }
        Ok(FittingModel::Mlp { nets })
    }

    pub fn from_nets(nets: Vec<DenseNet>) -> Result<Self> {
        let d = nets.len();
        for net in &nets {
            if net.input_dim() != d || net.output_dim() != 1 {
                return Err(Error::dims(
                    format!("nets mapping R^{d} -> R"),
                    format!("R^{} -> R^{}", net.input_dim(), net.output_dim()),
                ));
            }
        }
        Ok(FittingModel::Mlp { nets })
    }

    pub fn d(&self) -> usize {
        match self {
            FittingModel::Linear { weight } => weight.nrows(),
            FittingModel::Mlp { nets } => nets.len(),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, FittingModel::Linear { .. })
    }

    pub fn n_params(&self) -> usize {
        match self {
            FittingModel::Linear { weight } => weight.len(),
            FittingModel::Mlp { nets } => nets.iter().map(DenseNet::n_params).sum(),
        }
    }

    /// Flat parameters: the linear weight column-major, or each net's
    /// [`DenseNet::params`] in node order.
    pub fn params(&self) -> Vec<f64> {
        match self {
            FittingModel::Linear { weight } => weight.as_slice().to_vec(),
            FittingModel::Mlp { nets } => nets.iter().flat_map(|n| n.params()).collect(),
        }
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::dims(self.n_params(), flat.len()));
        }
        match self {
            FittingModel::Linear { weight } => weight.as_mut_slice().copy_from_slice(flat),
            FittingModel::Mlp { nets } => {
                let mut offset = 0;
                for net in nets {
                    let k = net.n_params();
                    net.set_params(&flat[offset..offset + k])?;
                    offset += k;
                }
            }
        }
        Ok(())
    }

    pub fn param_roles(&self) -> Vec<ParamRole> {
        match self {
            FittingModel::Linear { weight } => {
                let d = weight.nrows();
                // column-major: index = i + j d
                (0..d * d)
                    .map(|k| {
                        if k % d == k / d {
                            ParamRole::Fixed
                        } else {
                            ParamRole::Sparse
                        }
                    })
                    .collect()
            }
            FittingModel::Mlp { nets } => {
                let mut roles = Vec::with_capacity(self.n_params());
                for (j, net) in nets.iter().enumerate() {
                    for (l, layer) in net.layers().iter().enumerate() {
                        let rows = layer.weight.nrows();
                        for k in 0..layer.weight.len() {
                            roles.push(match (l, k % rows == j) {
                                (0, true) => ParamRole::Fixed,
                                (0, false) => ParamRole::Sparse,
                                _ => ParamRole::Free,
                            });
                        }
                        roles.extend(std::iter::repeat_n(ParamRole::Free, layer.bias.len()));
                    }
                }
                roles
            }
        }
    }

    /// True for weights (L2-regularized), false for biases.
    pub fn weight_mask(&self) -> Vec<bool> {
        match self {
            FittingModel::Linear { weight } => vec![true; weight.len()],
            FittingModel::Mlp { nets } => {
                let mut mask = Vec::with_capacity(self.n_params());
                for net in nets {
                    for layer in net.layers() {
                        mask.extend(std::iter::repeat_n(true, layer.weight.len()));
                        mask.extend(std::iter::repeat_n(false, layer.bias.len()));
                    }
                }
                mask
            }
        }
    }

    fn check_input(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.ncols() != self.d() {
            return Err(Error::dims(format!("{} columns", self.d()), x.ncols()));
        }
        Ok(())
    }

    pub fn forward(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_input(x)?;
        match self {
            FittingModel::Linear { weight } => Ok(x * weight),
            FittingModel::Mlp { nets } => {
                let mut out = DMatrix::zeros(x.nrows(), nets.len());
                for (j, net) in nets.iter().enumerate() {
                    out.set_column(j, &net.forward(x)?.column(0));
                }
                Ok(out)
            }
        }
    }

    pub fn forward_cached(&self, x: &DMatrix<f64>) -> Result<FitCache> {
        self.check_input(x)?;
        match self {
            FittingModel::Linear { weight } => Ok(FitCache {
                output: x * weight,
                input: Some(x.clone()),
                nets: Vec::new(),
            }),
            FittingModel::Mlp { nets } => {
                let mut output = DMatrix::zeros(x.nrows(), nets.len());
                let mut caches = Vec::with_capacity(nets.len());
                for (j, net) in nets.iter().enumerate() {
                    let cache = net.forward_cached(x)?;
                    output.set_column(j, &cache.output().column(0));
                    caches.push(cache);
                }
                Ok(FitCache {
                    output,
                    input: None,
                    nets: caches,
                })
            }
        }
    }

    /// Parameter gradient of `sum(upstream ∘ X_hat)`, in [`FittingModel::params`] order.
    pub fn backward(&self, cache: &FitCache, upstream: &DMatrix<f64>) -> Result<Vec<f64>> {
        if upstream.shape() != cache.output.shape() {
            return Err(Error::dims(
                format!("{}x{}", cache.output.nrows(), cache.output.ncols()),
                format!("{}x{}", upstream.nrows(), upstream.ncols()),
            ));
        }
        match self {
            FittingModel::Linear { .. } => {
                let x = cache.input.as_ref().expect("linear cache keeps its input");
                Ok((x.transpose() * upstream).as_slice().to_vec())
            }
            FittingModel::Mlp { nets } => {
                let mut grads = Vec::with_capacity(self.n_params());
                for (j, net) in nets.iter().enumerate() {
                    let up = upstream.columns(j, 1).into_owned();
                    grads.extend(net.backward_params(&cache.nets[j], &up)?.flat());
                }
                Ok(grads)
            }
        }
    }

    /// Hadamard square `A = W ∘ W` of the weighted adjacency, computed
    /// directly from the parameters (sums of squares for the MLP).
    pub fn adjacency_square(&self) -> DMatrix<f64> {
        match self {
            FittingModel::Linear { weight } => weight.component_mul(weight),
            FittingModel::Mlp { nets } => {
                let d = nets.len();
                DMatrix::from_fn(d, d, |i, j| {
                    nets[j].layers()[0].weight.row(i).norm_squared()
                })
            }
        }
    }

    /// `W_ij`: the linear weight, or the Euclidean norm of net `j`'s
    /// first-layer weights reading input `i`.
    pub fn extract_weighted_adjacency(&self) -> WeightedAdjacency {
        let m = match self {
            FittingModel::Linear { weight } => weight.clone(),
            FittingModel::Mlp { .. } => self.adjacency_square().map(f64::sqrt),
        };
        WeightedAdjacency::new(m).expect("model parameters stay finite")
    }

    /// Chain a gradient with respect to `A = W ∘ W` back to the parameters.
    pub fn square_gradient_to_params(&self, grad_a: &DMatrix<f64>) -> Vec<f64> {
        match self {
            FittingModel::Linear { weight } => {
                (grad_a.component_mul(weight) * 2.0).as_slice().to_vec()
            }
            FittingModel::Mlp { nets } => {
                let mut out = Vec::with_capacity(self.n_params());
                for (j, net) in nets.iter().enumerate() {
                    for (l, layer) in net.layers().iter().enumerate() {
                        if l == 0 {
                            let g = DMatrix::from_fn(
                                layer.weight.nrows(),
                                layer.weight.ncols(),
                                |i, k| 2.0 * layer.weight[(i, k)] * grad_a[(i, j)],
                            );
                            out.extend(g.iter());
                        } else {
                            out.extend(std::iter::repeat_n(0.0, layer.weight.len()));
                        }
                        out.extend(std::iter::repeat_n(0.0, layer.bias.len()));
                    }
                }
                out
            }
        }
    }

    /// Sum of absolute values of the edge-carrying parameters.
    pub fn sparse_l1(&self) -> f64 {
        self.params()
            .iter()
            .zip(self.param_roles())
            .filter(|(_, r)| *r == ParamRole::Sparse)
            .map(|(p, _)| p.abs())
            .sum()
    }

    /// Half the sum of squared weights (biases excluded).
    pub fn weight_l2(&self) -> f64 {
        0.5 * self
            .params()
            .iter()
            .zip(self.weight_mask())
            .filter(|(_, w)| *w)
            .map(|(p, _)| p * p)
            .sum::<f64>()
    }
}

/// Scalar critic `T_phi: R^d -> R` with its current clip bound.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticModel {
    pub net: DenseNet,
    pub clip_bound: f64,
}

impl CriticModel {
    /// `d -> hidden -> 1` tanh network, Glorot-initialized and unclipped.
    pub fn new<R: Rng + ?Sized>(d: usize, hidden: usize, rng: &mut R) -> Result<Self> {
        let net = DenseNet::random(&[d, hidden, 1], Activation::Tanh, rng)?;
        Ok(Self {
            clip_bound: f64::INFINITY,
            net,
        })
    }

    pub fn from_net(net: DenseNet) -> Result<Self> {
        if net.output_dim() != 1 {
            return Err(Error::dims("scalar critic output", net.output_dim()));
        }
        Ok(Self {
            net,
            clip_bound: f64::INFINITY,
        })
    }

    pub fn d(&self) -> usize {
        self.net.input_dim()
    }

    /// Clamp all parameters into `[-c, c]` and remember `c`.
    pub fn clip(&mut self, c: f64) {
        self.clip_bound = c.max(0.0);
        self.net.clip_params(self.clip_bound);
    }

    pub fn is_within_bound(&self, c: f64) -> bool {
        self.net.max_abs_param() <= c
    }
}

pub fn extract_weighted_adjacency(model: &FittingModel) -> WeightedAdjacency {
    model.extract_weighted_adjacency()
}
