//! Score functions: penalized least squares, the augmented-Lagrangian DAG
//! penalty and the critic-based score.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::WeightedAdjacency;
use crate::nn::{CriticModel, FittingModel, ParamRole};
use crate::sem::Dataset;

/// `(1/2n) ||X - X W||_F^2 + lambda1 * sum |W_ij|`.
pub fn least_squares_score(x: &Dataset, w: &WeightedAdjacency, lambda1: f64) -> Result<f64> {
    if x.d() != w.d() {
        return Err(Error::dims(format!("{}x{} weights", x.d(), x.d()), w.d()));
    }
    let residual = x.values() - x.values() * w.matrix();
    Ok(residual.norm_squared() / (2.0 * x.n() as f64) + lambda1 * w.l1_norm())
}

/// `alpha h + (mu / 2) h^2`.
pub fn dag_penalty(h: f64, alpha: f64, mu: f64) -> f64 {
    alpha * h + 0.5 * mu * h * h
}

/// Critic score of a fitting model and its gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreEval {
    /// `distance + sparsity`.
    pub value: f64,
    /// `mean T(X) - mean T(X_hat)`.
    pub distance: f64,
    /// `lambda1` times the L1 norm of the edge-carrying parameters.
    pub sparsity: f64,
    /// Gradient with respect to [`FittingModel::params`]; the L1 term uses `sign(0) = 0`.
    pub theta_grad: Vec<f64>,
    /// Gradient with respect to the critic parameters.
    pub phi_grad: Vec<f64>,
}

/// Mean critic output over the rows of `x`, plus a cache for backprop.
pub(crate) fn critic_mean(
    critic: &CriticModel,
    x: &DMatrix<f64>,
) -> Result<(f64, crate::nn::ForwardCache)> {
    let cache = critic.net.forward_cached(x)?;
    let mean = cache.output().mean();
    Ok((mean, cache))
}

/// Gradient of `mean T(X) - mean T(X_hat)` with respect to the critic parameters.
pub(crate) fn critic_distance_grad(
    critic: &CriticModel,
    real: &crate::nn::ForwardCache,
    fake: &crate::nn::ForwardCache,
) -> Result<Vec<f64>> {
    let n_real = real.output().nrows();
    let n_fake = fake.output().nrows();
    let g_real = critic
        .net
        .backward_params(real, &DMatrix::from_element(n_real, 1, 1.0 / n_real as f64))?
        .flat();
    let g_fake = critic
        .net
        .backward_params(fake, &DMatrix::from_element(n_fake, 1, 1.0 / n_fake as f64))?
        .flat();
    Ok(g_real.iter().zip(&g_fake).map(|(a, b)| a - b).collect())
}

/// Critic score `mean T(X) - mean T(f(X)) + lambda1 * R_sparse` with exact
/// gradients for both the fitting model (through `X_hat` into the critic)
/// and the critic.
pub fn casper_score(
    x: &Dataset,
    model: &FittingModel,
    critic: &CriticModel,
    lambda1: f64,
) -> Result<ScoreEval> {
    if model.d() != x.d() || critic.d() != x.d() {
        return Err(Error::dims(
            format!("model and critic over {} variables", x.d()),
            format!("model {} / critic {}", model.d(), critic.d()),
        ));
    }
    let n = x.n() as f64;
    let fit = model.forward_cached(x.values())?;
    let (real_mean, real_cache) = critic_mean(critic, x.values())?;
    let (fake_mean, fake_cache) = critic_mean(critic, fit.output())?;
    let distance = real_mean - fake_mean;

    // d(-mean T(X_hat)) / d X_hat
    let upstream = critic
        .net
        .backward(&fake_cache, &DMatrix::from_element(x.n(), 1, -1.0 / n))?
        .input;
    let mut theta_grad = model.backward(&fit, &upstream)?;
    let params = model.params();
    for ((g, p), role) in theta_grad.iter_mut().zip(&params).zip(model.param_roles()) {
        if role == ParamRole::Sparse && *p != 0.0 {
            *g += lambda1 * p.signum();
        }
    }
    let phi_grad = critic_distance_grad(critic, &real_cache, &fake_cache)?;
    let sparsity = lambda1 * model.sparse_l1();
    Ok(ScoreEval {
        value: distance + sparsity,
        distance,
        sparsity,
        theta_grad,
        phi_grad,
    })
}
