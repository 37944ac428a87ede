use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AcyclicityForm;

/// Augmented-Lagrangian coefficient schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LagrangianSchedule {
    /// Initial multiplier `alpha`.
    pub alpha0: f64,
    /// Initial penalty weight `mu`.
    pub mu0: f64,
    /// Factor applied to `mu` when `h` does not shrink enough.
    pub mu_growth: f64,
    /// A subproblem is accepted once `h <= progress_ratio * h_prev`.
    pub progress_ratio: f64,
    pub h_tolerance: f64,
    pub mu_cap: f64,
}

impl Default for LagrangianSchedule {
    fn default() -> Self {
        Self {
            alpha0: 0.0,
            mu0: 1.0,
            mu_growth: 10.0,
            progress_ratio: 0.25,
            h_tolerance: 1e-8,
            mu_cap: 1e16,
        }
    }
}

impl LagrangianSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu0 > 0.0) {
            return Err(Error::Parameter(format!(
                "mu0 must be positive, got {}",
                self.mu0
            )));
        }
        if !(self.mu_growth > 1.0) {
            return Err(Error::Parameter(format!(
                "mu_growth must exceed 1, got {}",
                self.mu_growth
            )));
        }
        if !(self.progress_ratio > 0.0 && self.progress_ratio < 1.0) {
            return Err(Error::Parameter(format!(
                "progress_ratio must lie in (0, 1), got {}",
                self.progress_ratio
            )));
        }
        if !(self.h_tolerance > 0.0) || !(self.mu_cap >= self.mu0) || !self.alpha0.is_finite() {
            return Err(Error::Parameter(
                "invalid h_tolerance, mu_cap or alpha0".into(),
            ));
        }
        Ok(())
    }
}

/// Fitting-model family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelKind {
    /// Single `d x d` weight matrix.
    #[default]
    Linear,
    /// One `d -> hidden -> 1` sigmoid network per node.
    Mlp { hidden: usize },
}

/// Hyperparameters shared by the CASPER learner and the NOTEARS baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CasperConfig {
    /// L1 weight on the edge-carrying parameters.
    pub lambda1: f64,
    /// L2 weight on all network weights (MLP model only).
    pub lambda2: f64,
    /// Critic ascent steps after every round of fitting-model iterations.
    pub k_inner: usize,
    /// Cap on accepted Lagrangian subproblems.
    pub k_outer_max: usize,
    /// Fitting-model iterations on the score alone before the constrained phase.
    pub pretrain_epochs: usize,
    /// Pruning threshold.
    pub omega: f64,
    pub acyclicity_form: AcyclicityForm,
    pub lagrangian: LagrangianSchedule,
    pub seed: u64,
    pub model: ModelKind,
    /// Maximum L-BFGS iterations per subproblem.
    pub solver_max_iter: usize,
    /// Relative objective decrease below which the L-BFGS solve stops.
    pub solver_ftol: f64,
    pub lbfgs_memory: usize,
    /// Fitting-model iterations between two critic rounds.
    pub theta_iters_per_round: usize,
    pub lr_phi: f64,
    pub critic_hidden: usize,
    /// Re-initialize the critic at the start of every subproblem.
    pub reset_critic: bool,
}

impl Default for CasperConfig {
    fn default() -> Self {
        Self {
            lambda1: 0.01,
            lambda2: 0.01,
            k_inner: 3,
            k_outer_max: 100,
            pretrain_epochs: 10,
            omega: 0.3,
            acyclicity_form: AcyclicityForm::MatrixExponential,
            lagrangian: LagrangianSchedule::default(),
            seed: 0,
            model: ModelKind::Linear,
            solver_max_iter: 1000,
            solver_ftol: 2.2e-9,
            lbfgs_memory: 10,
            theta_iters_per_round: 20,
            lr_phi: 0.005,
            critic_hidden: 16,
            reset_critic: false,
        }
    }
}

impl CasperConfig {
    /// Defaults for the one-hidden-layer MLP fitting model.
    pub fn nonlinear() -> Self {
        Self {
            model: ModelKind::Mlp { hidden: 10 },
            lambda1: 0.005,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= 0.0) || !(self.lambda2 >= 0.0) {
            return Err(Error::Parameter(
                "lambda1 and lambda2 must be non-negative".into(),
            ));
        }
        if self.k_inner == 0 {
            return Err(Error::Parameter("k_inner must be at least 1".into()));
        }
        if !(self.omega > 0.0) {
            return Err(Error::Parameter(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if self.k_outer_max == 0 || self.solver_max_iter == 0 || self.theta_iters_per_round == 0 {
            return Err(Error::Parameter(
                "k_outer_max, solver_max_iter and theta_iters_per_round must be positive".into(),
            ));
        }
        if self.lbfgs_memory == 0 || !(self.solver_ftol >= 0.0) {
            return Err(Error::Parameter(
                "lbfgs_memory must be positive and solver_ftol non-negative".into(),
            ));
        }
        if !(self.lr_phi > 0.0) {
            return Err(Error::Parameter("lr_phi must be positive".into()));
        }
        if self.critic_hidden == 0 {
            return Err(Error::Parameter("critic_hidden must be positive".into()));
        }
        if let ModelKind::Mlp { hidden: 0 } = self.model {
            return Err(Error::Parameter("MLP hidden width must be positive".into()));
        }
        self.acyclicity_form.validate()?;
        self.lagrangian.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        CasperConfig::default().validate().unwrap();
        CasperConfig::nonlinear().validate().unwrap();
    }

    #[test]
    fn invalid_values_rejected() {
        let bad = [
            CasperConfig {
                k_inner: 0,
                ..Default::default()
            },
            CasperConfig {
                omega: 0.0,
                ..Default::default()
            },
            CasperConfig {
                lambda1: -1.0,
                ..Default::default()
            },
            CasperConfig {
                lagrangian: LagrangianSchedule {
                    mu_growth: 1.0,
                    ..Default::default()
                },
                ..Default::default()
            },
            CasperConfig {
                lagrangian: LagrangianSchedule {
                    progress_ratio: 1.0,
                    ..Default::default()
                },
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg: CasperConfig =
            serde_json::from_str(r#"{"lambda1": 0.05, "model": {"kind": "mlp", "hidden": 8}}"#)
                .unwrap();
        assert_eq!(cfg.lambda1, 0.05);
        assert_eq!(cfg.k_inner, 3);
        assert_eq!(cfg.model, ModelKind::Mlp { hidden: 8 });
    }
}
