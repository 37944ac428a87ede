//! Projected L-BFGS for objectives whose variables are either free or
//! bounded below by zero.
//!
//! Each iteration fixes the variables sitting on their bound with a gradient
//! pointing outward, applies the two-loop recursion to the rest and runs a
//! backtracking Armijo search along the projected path.

use std::collections::VecDeque;

use crate::error::Result;

#[derive(Debug, Clone, Copy)]
pub(crate) struct LbfgsOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop once `(f_old - f_new) / max(|f_old|, |f_new|, 1) <= ftol`.
    pub ftol: f64,
    /// Stop once the projected gradient's max-norm is at most `gtol`.
    pub gtol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iter: 1000,
            ftol: 2.2e-9,
            gtol: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LbfgsOutcome {
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Stopped on a tolerance or a failed line search rather than the iteration budget.
    pub converged: bool,
}

type Pairs = VecDeque<(Vec<f64>, Vec<f64>, f64)>;

/// Curvature memory that can outlive one call, for objectives that drift
/// slowly between calls.
#[derive(Debug, Clone, Default)]
pub(crate) struct Lbfgs {
    history: Pairs,
}

impl Lbfgs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn minimize<F>(
        &mut self,
        x: &mut Vec<f64>,
        bounded: &[bool],
        opts: LbfgsOptions,
        f: F,
    ) -> Result<Option<LbfgsOutcome>>
    where
        F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    {
        run(&mut self.history, x, bounded, opts, f)
    }
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project(x: &mut [f64], bounded: &[bool]) {
    for (v, &b) in x.iter_mut().zip(bounded) {
        if b && *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// Variables held at their bound for this iteration.
fn active_set(x: &[f64], g: &[f64], bounded: &[bool]) -> Vec<bool> {
    x.iter()
        .zip(g)
        .zip(bounded)
        .map(|((&xi, &gi), &b)| b && xi <= 0.0 && gi > 0.0)
        .collect()
}

/// Minimizes `f` from `x` in place. `f` returns `(value, gradient)`; a
/// non-finite value is treated as "too far" by the line search. Returns
/// `Ok(None)` when `f` is not finite at the starting point.
#[cfg(test)]
pub(crate) fn minimize<F>(
    x: &mut Vec<f64>,
    bounded: &[bool],
    opts: LbfgsOptions,
    f: F,
) -> Result<Option<LbfgsOutcome>>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    Lbfgs::new().minimize(x, bounded, opts, f)
}

fn run<F>(
    history: &mut Pairs,
    x: &mut Vec<f64>,
    bounded: &[bool],
    opts: LbfgsOptions,
    mut f: F,
) -> Result<Option<LbfgsOutcome>>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    project(x, bounded);
    let (mut fx, mut g) = f(x)?;
    let mut evaluations = 1;
    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Ok(None);
    }
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        let active = active_set(x, &g, bounded);
        let pg_norm = g
            .iter()
            .zip(&active)
            .map(|(gi, &a)| if a { 0.0 } else { gi.abs() })
            .fold(0.0, f64::max);
        if pg_norm <= opts.gtol {
            converged = true;
            break;
        }

        let mut dir = two_loop(&g, &active, history);
        if !(dot(&g, &dir) < 0.0) {
            history.clear();
            dir = g
                .iter()
                .zip(&active)
                .map(|(gi, &a)| if a { 0.0 } else { -gi })
                .collect();
        }
        let mut t = if history.is_empty() {
            (1.0 / dir.iter().map(|v| v.abs()).fold(0.0, f64::max)).min(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
            project(&mut trial, bounded);
            let step: Vec<f64> = trial.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
            let decrease = dot(&g, &step);
            let (ft, gt) = f(&trial)?;
            evaluations += 1;
            let finite = ft.is_finite() && gt.iter().all(|v| v.is_finite());
            if finite && ft <= fx + ARMIJO_C1 * decrease.min(0.0) && decrease < 0.0 {
                accepted = Some((trial, step, ft, gt));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, s, ft, gt)) = accepted else {
            converged = true;
            break;
        };
        iterations += 1;
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            while history.len() >= opts.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let rel = (fx - ft) / fx.abs().max(ft.abs()).max(1.0);
        *x = trial;
        fx = ft;
        g = gt;
        if rel <= opts.ftol {
            converged = true;
            break;
        }
    }
    Ok(Some(LbfgsOutcome {
        value: fx,
        iterations,
        evaluations,
        converged,
    }))
}

/// `-H g` on the free variables, zero on the active ones.
fn two_loop(g: &[f64], active: &[bool], history: &Pairs) -> Vec<f64> {
    let masked = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .zip(active)
            .map(|(x, &a)| if a { 0.0 } else { *x })
            .collect()
    };
    let mut q = masked(g);
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for ((qi, yi), &act) in q.iter_mut().zip(y).zip(active) {
            if !act {
                *qi -= a * yi;
            }
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for ((qi, si), &act) in q.iter_mut().zip(s).zip(active) {
            if !act {
                *qi += (a - b) * si;
            }
        }
    }
    q.iter()
        .zip(active)
        .map(|(v, &a)| if a { 0.0 } else { -v })
        .collect()
}
