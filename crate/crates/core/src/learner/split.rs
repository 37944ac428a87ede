//! Sign-split parameterization of the fitting model.
//!
//! Every edge-carrying parameter `p` is optimized as `p = pos - neg` with
//! `pos, neg >= 0`, which turns the L1 penalty into the linear term
//! `lambda1 * (pos + neg)` and lets projection put weights exactly at zero.
//! Self-influence parameters are dropped from the optimization vector.

use crate::nn::ParamRole;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Free(usize),
    Split(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct SplitLayout {
    slots: Vec<Slot>,
    n_params: usize,
    n_opt: usize,
}

impl SplitLayout {
    pub fn new(roles: &[ParamRole]) -> Self {
        let mut slots = Vec::with_capacity(roles.len());
        let mut n_opt = 0;
        for (k, role) in roles.iter().enumerate() {
            match role {
                ParamRole::Sparse => {
                    slots.push(Slot::Split(k));
                    n_opt += 2;
                }
                ParamRole::Free => {
                    slots.push(Slot::Free(k));
                    n_opt += 1;
                }
                ParamRole::Fixed => {}
            }
        }
        Self {
            slots,
            n_params: roles.len(),
            n_opt,
        }
    }

    pub fn encode(&self, params: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_opt);
        for slot in &self.slots {
            match *slot {
                Slot::Free(k) => out.push(params[k]),
                Slot::Split(k) => {
                    out.push(params[k].max(0.0));
                    out.push((-params[k]).max(0.0));
                }
            }
        }
        out
    }

    pub fn decode(&self, opt: &[f64]) -> Vec<f64> {
        let mut params = vec![0.0; self.n_params];
        let mut o = 0;
        for slot in &self.slots {
            match *slot {
                Slot::Free(k) => {
                    params[k] = opt[o];
                    o += 1;
                }
                Slot::Split(k) => {
                    params[k] = opt[o] - opt[o + 1];
                    o += 2;
                }
            }
        }
        params
    }

    /// Gradient in optimization coordinates, including the L1 term.
    pub fn gradient(&self, grad: &[f64], lambda1: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_opt);
        for slot in &self.slots {
            match *slot {
                Slot::Free(k) => out.push(grad[k]),
                Slot::Split(k) => {
                    out.push(grad[k] + lambda1);
                    out.push(-grad[k] + lambda1);
                }
            }
        }
        out
    }

    /// Per optimization coordinate: `true` when bounded below by zero.
    pub fn bounded(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.n_opt);
        for slot in &self.slots {
            match slot {
                Slot::Free(_) => out.push(false),
                Slot::Split(_) => out.extend([true, true]),
            }
        }
        out
    }

    /// `sum(pos + neg)`.
    pub fn l1(&self, opt: &[f64]) -> f64 {
        let mut total = 0.0;
        let mut o = 0;
        for slot in &self.slots {
            match slot {
                Slot::Free(_) => o += 1,
                Slot::Split(_) => {
                    total += opt[o] + opt[o + 1];
                    o += 2;
                }
            }
        }
        total
    }
}
