//! Augmented-Lagrangian engine shared by every gradient-based learner.
//!
//! Each subproblem minimizes, over the fitting model,
//!
//! ```text
//! rec(X, f(X)) + [mean T(X) - mean T(f(X))] + lambda1 L1 + lambda2 L2 + alpha h + mu/2 h^2
//! ```
//!
//! with projected L-BFGS on the sign-split parameters. With a critic the
//! solve is cut into rounds: `theta_iters_per_round` iterations with the
//! critic fixed, then `k_inner` critic ascent steps on the bracketed
//! distance, each followed by clipping every critic parameter to
//! `±log(1 + h)` at the current fitting model.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{CasperConfig, ModelKind};
use super::lbfgs::{Lbfgs, LbfgsOptions};
use super::result::{EpochRecord, TrainResult, WeightedAdjacencyRecord};
use super::score::{critic_distance_grad, critic_mean};
use super::split::SplitLayout;
use crate::error::{Error, Result};
use crate::graph::{h_and_square_gradient, prune};
use crate::nn::{Activation, CriticModel, FittingModel, OptimizerState};
use crate::sem::Dataset;

const CRITIC_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// `g(h) = log(1 + h)`, the critic's parameter bound for violation `h`.
pub fn critic_clip_bound(h: f64) -> f64 {
    h.max(0.0).ln_1p()
}

/// `k_inner` Adam ascent steps on `mean T(X) - mean T(X_hat)`, each followed
/// by clipping every critic parameter into `[-bound, bound]`.
fn critic_ascent(
    x: &DMatrix<f64>,
    x_hat: &DMatrix<f64>,
    critic: &mut CriticModel,
    optimizer: &mut OptimizerState,
    k_inner: usize,
    bound: f64,
) -> Result<()> {
    for _ in 0..k_inner {
        let (_, real) = critic_mean(critic, x)?;
        let (_, fake) = critic_mean(critic, x_hat)?;
        let grad = critic_distance_grad(critic, &real, &fake)?;
        let ascent: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut params = critic.net.params();
        optimizer.step(&mut params, &ascent)?;
        critic.net.set_params(&params)?;
        critic.clip(bound);
    }
    Ok(())
}

/// Inner loop of the bilevel scheme: improve the critic against the frozen
/// fitting model, keeping it inside the `log(1 + current_h)` box.
pub fn critic_inner_loop(
    x: &Dataset,
    model: &FittingModel,
    critic: &mut CriticModel,
    optimizer: &mut OptimizerState,
    k_inner: usize,
    current_h: f64,
) -> Result<()> {
    if k_inner == 0 {
        return Err(Error::Parameter("k_inner must be at least 1".into()));
    }
    if !(current_h >= 0.0) {
        return Err(Error::Parameter(format!(
            "h must be non-negative, got {current_h}"
        )));
    }
    if model.d() != x.d() || critic.d() != x.d() {
        return Err(Error::dims(
            x.d(),
            format!("model {} / critic {}", model.d(), critic.d()),
        ));
    }
    let x_hat = model.forward(x.values())?;
    critic_ascent(
        x.values(),
        &x_hat,
        critic,
        optimizer,
        k_inner,
        critic_clip_bound(current_h),
    )
}

struct CriticState {
    model: CriticModel,
    optimizer: OptimizerState,
    initial: CriticModel,
}

/// One evaluation of the augmented objective.
struct Eval {
    objective: f64,
    score: f64,
    distance: f64,
    grad: Vec<f64>,
}

/// Evaluates the objective at optimization coordinates `opt`.
struct Objective<'a> {
    x: &'a DMatrix<f64>,
    cfg: &'a CasperConfig,
    layout: &'a SplitLayout,
    model: FittingModel,
    /// The critic and its (fixed) mean over the data.
    critic: Option<(&'a CriticModel, f64)>,
    penalty: Option<(f64, f64)>,
}

impl Objective<'_> {
    fn eval(&mut self, opt: &[f64]) -> Result<Eval> {
        let infinite = || Eval {
            objective: f64::INFINITY,
            score: f64::INFINITY,
            distance: 0.0,
            grad: vec![0.0; opt.len()],
        };
        if opt.iter().any(|v| !v.is_finite()) {
            return Ok(infinite());
        }
        self.model.set_params(&self.layout.decode(opt))?;
        let fit = self.model.forward_cached(self.x)?;
        let n = self.x.nrows() as f64;
        let residual = fit.output() - self.x;
        let rec = residual.norm_squared() / (2.0 * n);
        let mut upstream = residual / n;

        let mut distance = 0.0;
        if let Some((critic, real_mean)) = self.critic {
            let (fake_mean, fake) = critic_mean(critic, fit.output())?;
            distance = real_mean - fake_mean;
            let seed = DMatrix::from_element(self.x.nrows(), 1, -1.0 / n);
            upstream += critic.net.backward(&fake, &seed)?.input;
        }

        let mut grad = self.model.backward(&fit, &upstream)?;
        let mut l2 = 0.0;
        if !self.model.is_linear() && self.cfg.lambda2 > 0.0 {
            l2 = self.cfg.lambda2 * self.model.weight_l2();
            let params = self.model.params();
            for ((g, p), is_weight) in grad.iter_mut().zip(&params).zip(self.model.weight_mask()) {
                if is_weight {
                    *g += self.cfg.lambda2 * p;
                }
            }
        }

        let mut dag = 0.0;
        if let Some((alpha, mu)) = self.penalty {
            let a = self.model.adjacency_square();
            if a.iter().any(|v| !v.is_finite()) {
                return Ok(infinite());
            }
            let (h, grad_a) = h_and_square_gradient(&a, self.cfg.acyclicity_form)?;
            dag = alpha * h + 0.5 * mu * h * h;
            let scaled = grad_a * (alpha + mu * h);
            for (g, hg) in grad
                .iter_mut()
                .zip(self.model.square_gradient_to_params(&scaled))
            {
                *g += hg;
            }
        }

        let score = rec + distance + self.cfg.lambda1 * self.layout.l1(opt) + l2;
        Ok(Eval {
            objective: score + dag,
            score,
            distance,
            grad: self.layout.gradient(&grad, self.cfg.lambda1),
        })
    }
}

/// Result of one subproblem solve.
struct Solve {
    iterations: usize,
    rounds: usize,
    score: f64,
    distance: f64,
    /// Largest `max|phi| - bound` seen at the start of a round.
    critic_excess: (f64, f64, f64),
}

pub(crate) struct Engine<'a> {
    x: &'a DMatrix<f64>,
    cfg: &'a CasperConfig,
    model: FittingModel,
    layout: SplitLayout,
    bounded: Vec<bool>,
    opt: Vec<f64>,
    critic: Option<CriticState>,
}

impl<'a> Engine<'a> {
    pub fn new(data: &'a Dataset, cfg: &'a CasperConfig, with_critic: bool) -> Result<Self> {
        cfg.validate()?;
        let d = data.d();
        if d == 0 || data.n() == 0 {
            return Err(Error::Input("dataset is empty".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let model = match cfg.model {
            ModelKind::Linear => FittingModel::linear(d),
            ModelKind::Mlp { hidden } => {
                FittingModel::mlp(d, hidden, Activation::Sigmoid, &mut rng)?
            }
        };
        let layout = SplitLayout::new(&model.param_roles());
        let opt = layout.encode(&model.params());
        let critic = if with_critic {
            let mut crng = ChaCha8Rng::seed_from_u64(cfg.seed ^ CRITIC_SEED_SALT);
            let model = CriticModel::new(d, cfg.critic_hidden, &mut crng)?;
            let optimizer = OptimizerState::new(model.net.n_params(), cfg.lr_phi);
            Some(CriticState {
                initial: model.clone(),
                model,
                optimizer,
            })
        } else {
            None
        };
        Ok(Self {
            x: data.values(),
            cfg,
            bounded: layout.bounded(),
            model,
            layout,
            opt,
            critic,
        })
    }

    fn sync_model(&mut self) {
        let params = self.layout.decode(&self.opt);
        self.model
            .set_params(&params)
            .expect("layout matches model");
    }

    fn current_h(&self) -> Result<f64> {
        Ok(h_and_square_gradient(&self.model.adjacency_square(), self.cfg.acyclicity_form)?.0)
    }

    fn diverged(&self, reason: &str) -> Error {
        Error::Diverged {
            reason: reason.to_string(),
            last_finite: Some(self.model.extract_weighted_adjacency()),
        }
    }

    /// Runs at most `max_iter` L-BFGS iterations with the critic fixed.
    /// Returns `(iterations, converged, final evaluation)`.
    fn lbfgs(
        &mut self,
        solver: &mut Lbfgs,
        penalty: Option<(f64, f64)>,
        max_iter: usize,
    ) -> Result<(usize, bool, Eval)> {
        let critic = match &self.critic {
            Some(state) => Some((&state.model, critic_mean(&state.model, self.x)?.0)),
            None => None,
        };
        let mut objective = Objective {
            x: self.x,
            cfg: self.cfg,
            layout: &self.layout,
            model: self.model.clone(),
            critic,
            penalty,
        };
        let opts = LbfgsOptions {
            memory: self.cfg.lbfgs_memory,
            max_iter,
            ftol: self.cfg.solver_ftol,
            ..LbfgsOptions::default()
        };
        let outcome = solver.minimize(&mut self.opt, &self.bounded, opts, |p| {
            let e = objective.eval(p)?;
            Ok((e.objective, e.grad))
        })?;
        let Some(outcome) = outcome else {
            return Err(self.diverged("objective is not finite at the start of a solve"));
        };
        let last = objective.eval(&self.opt)?;
        self.sync_model();
        Ok((outcome.iterations, outcome.converged, last))
    }

    /// `k_inner` clipped critic steps against the current fitting model.
    fn critic_round(&mut self) -> Result<()> {
        let h = self.current_h()?;
        let Some(state) = self.critic.as_mut() else {
            return Ok(());
        };
        let x_hat = self.model.forward(self.x)?;
        critic_ascent(
            self.x,
            &x_hat,
            &mut state.model,
            &mut state.optimizer,
            self.cfg.k_inner,
            critic_clip_bound(h),
        )
    }

    /// Fitting-model iterations on the score alone, critic frozen.
    fn pretrain(&mut self) -> Result<()> {
        if self.critic.is_none() || self.cfg.pretrain_epochs == 0 {
            return Ok(());
        }
        self.lbfgs(&mut Lbfgs::new(), None, self.cfg.pretrain_epochs)?;
        // Enter the constrained phase inside the box of the pretrained graph.
        let bound = critic_clip_bound(self.current_h()?);
        if let Some(state) = self.critic.as_mut() {
            state.model.clip(bound);
        }
        Ok(())
    }

    fn solve_subproblem(&mut self, alpha: f64, mu: f64) -> Result<Solve> {
        if self.cfg.reset_critic {
            let bound = critic_clip_bound(self.current_h()?);
            if let Some(state) = self.critic.as_mut() {
                state.model = state.initial.clone();
                state.model.clip(bound);
                state.optimizer.reset();
            }
        }
        let mut solver = Lbfgs::new();
        let Some(_) = self.critic else {
            let (iterations, _, eval) =
                self.lbfgs(&mut solver, Some((alpha, mu)), self.cfg.solver_max_iter)?;
            return Ok(Solve {
                iterations,
                rounds: 0,
                score: eval.score,
                distance: 0.0,
                critic_excess: (f64::NEG_INFINITY, 0.0, 0.0),
            });
        };

        let mut iterations = 0;
        let mut rounds = 0;
        let mut excess = (f64::NEG_INFINITY, 0.0, 0.0);
        loop {
            let bound = critic_clip_bound(self.current_h()?);
            let max_abs = self
                .critic
                .as_ref()
                .map_or(0.0, |c| c.model.net.max_abs_param());
            if max_abs - bound > excess.0 {
                excess = (max_abs - bound, max_abs, bound);
            }
            let budget = self
                .cfg
                .theta_iters_per_round
                .min(self.cfg.solver_max_iter - iterations);
            let (taken, converged, eval) = self.lbfgs(&mut solver, Some((alpha, mu)), budget)?;
            iterations += taken;
            rounds += 1;
            self.critic_round()?;
            if converged || iterations >= self.cfg.solver_max_iter {
                return Ok(Solve {
                    iterations,
                    rounds,
                    score: eval.score,
                    distance: eval.distance,
                    critic_excess: excess,
                });
            }
        }
    }

    pub fn run(mut self, method: &str) -> Result<TrainResult> {
        let started = Instant::now();
        self.pretrain()?;
        let sched = self.cfg.lagrangian;
        let mut alpha = sched.alpha0;
        let mut mu = sched.mu0;
        let mut h = f64::INFINITY;
        let mut history = Vec::new();
        let mut outer = 0;
        let mut accepted_opt = self.opt.clone();

        for _ in 0..self.cfg.k_outer_max {
            let mut h_new;
            loop {
                self.opt = accepted_opt.clone();
                self.sync_model();
                let solve = self.solve_subproblem(alpha, mu)?;
                h_new = self.current_h()?;
                let accepted = h_new <= sched.progress_ratio * h || mu >= sched.mu_cap;
                history.push(EpochRecord {
                    outer,
                    iterations: solve.iterations,
                    critic_rounds: solve.rounds,
                    score: solve.score,
                    h: h_new,
                    alpha,
                    mu,
                    critic_distance: solve.distance,
                    critic_max_abs: solve.critic_excess.1,
                    critic_bound: solve.critic_excess.2,
                    accepted,
                });
                log::debug!(
                    "{method} solve {outer}: h={h_new:.3e} mu={mu:.1e} iters={}",
                    solve.iterations
                );
                outer += 1;
                if accepted {
                    break;
                }
                mu = (mu * sched.mu_growth).min(sched.mu_cap);
            }
            accepted_opt = self.opt.clone();
            h = h_new;
            alpha += mu * h;
            if h <= sched.h_tolerance || mu >= sched.mu_cap {
                break;
            }
        }

        let weighted = self.model.extract_weighted_adjacency();
        let pruned = prune(&weighted, self.cfg.omega)?;
        Ok(TrainResult {
            method: method.to_string(),
            config: self.cfg.clone(),
            weighted: WeightedAdjacencyRecord::from(&weighted),
            pruned,
            history,
            final_h: h,
            converged: h <= sched.h_tolerance,
            hit_mu_cap: h > sched.h_tolerance && mu >= sched.mu_cap,
            wall_time_seconds: started.elapsed().as_secs_f64(),
            model: Some(self.model),
        })
    }
}
