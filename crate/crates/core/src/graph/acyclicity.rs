//! Smooth acyclicity functionals `h(W)`.
//!
//! Both forms act on the Hadamard square `A = W ∘ W`, whose support equals
//! the support of `W`, so `h(W) = 0` exactly when that support has no cycle.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::WeightedAdjacency;
use crate::error::{Error, Result};

/// Relative truncation tolerance of the Taylor series in [`expm`].
pub const EXPM_TOLERANCE: f64 = 1e-12;

/// Which acyclicity functional to use.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AcyclicityForm {
    /// `tr(exp(W ∘ W)) - d`
    #[default]
    MatrixExponential,
    /// `tr((I + alpha W ∘ W)^d) - d`
    Polynomial { alpha: f64 },
}

impl AcyclicityForm {
    /// Polynomial form with `alpha = 1/d`, which keeps the power bounded.
    pub fn polynomial_for(d: usize) -> Self {
        AcyclicityForm::Polynomial {
            alpha: 1.0 / d.max(1) as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AcyclicityForm::MatrixExponential => Ok(()),
            AcyclicityForm::Polynomial { alpha } if alpha > 0.0 && alpha.is_finite() => Ok(()),
            AcyclicityForm::Polynomial { alpha } => Err(Error::Parameter(format!(
                "polynomial acyclicity form needs alpha > 0, got {alpha}"
            ))),
        }
    }
}

fn checked_square(w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !w.is_square() {
        return Err(Error::dims(
            "square matrix",
            format!("{}x{}", w.nrows(), w.ncols()),
        ));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input(
            "acyclicity functional needs finite weights".into(),
        ));
    }
    Ok(w.component_mul(w))
}

/// `exp(A) - I` by scaling and squaring a truncated Taylor series.
///
/// Working with `exp(A) - I` instead of `exp(A)` keeps the small traces that
/// matter near a DAG free of cancellation against the identity.
fn expm_minus_identity(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a
        .column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    // scale so that ||A / 2^s||_1 <= 1/2
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = a / 2f64.powi(squarings as i32);

    let mut sum = scaled.clone();
    let mut term = scaled.clone();
    for k in 2..64 {
        term = &term * &scaled / k as f64;
        sum += &term;
        let term_norm = term.iter().map(|v| v.abs()).sum::<f64>();
        let sum_norm = sum.iter().map(|v| v.abs()).sum::<f64>();
        if term_norm <= EXPM_TOLERANCE * sum_norm.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    // (F + I)^2 - I = F^2 + 2F
    for _ in 0..squarings {
        sum = &sum * &sum + &sum * 2.0;
    }
    debug_assert_eq!(sum.nrows(), n);
    sum
}

/// Matrix exponential of a square matrix.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    expm_minus_identity(a) + DMatrix::identity(n, n)
}

fn matrix_power(m: &DMatrix<f64>, mut exp: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let mut result = DMatrix::identity(n, n);
    let mut base = m.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            result = &result * &base;
        }
        exp >>= 1;
        if exp > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Acyclicity violation `h(W) >= 0`; zero iff the support of `W` is a DAG.
pub fn h_value(w: &WeightedAdjacency, form: AcyclicityForm) -> Result<f64> {
    h_value_matrix(w.matrix(), form)
}

pub(crate) fn h_value_matrix(w: &DMatrix<f64>, form: AcyclicityForm) -> Result<f64> {
    form.validate()?;
    let a = checked_square(w)?;
    let d = a.nrows();
    let h = match form {
        AcyclicityForm::MatrixExponential => expm_minus_identity(&a).trace(),
        AcyclicityForm::Polynomial { alpha } => {
            let m = DMatrix::identity(d, d) + a * alpha;
            matrix_power(&m, d).trace() - d as f64
        }
    };
    Ok(h.max(0.0))
}

/// Gradient of [`h_value`] with respect to `W`.
pub fn h_gradient(w: &WeightedAdjacency, form: AcyclicityForm) -> Result<DMatrix<f64>> {
    h_value_and_gradient(w.matrix(), form).map(|(_, g)| g)
}

/// `h` and its gradient in one pass, sharing the matrix function evaluation.
pub(crate) fn h_value_and_gradient(
    w: &DMatrix<f64>,
    form: AcyclicityForm,
) -> Result<(f64, DMatrix<f64>)> {
    let a = checked_square(w)?;
    let (h, grad_a) = h_and_square_gradient(&a, form)?;
    Ok((h, grad_a.component_mul(w) * 2.0))
}

/// `h` as a function of the Hadamard square `A = W ∘ W`, with `dh/dA`.
///
/// The chain rule `dh/dW = dh/dA ∘ 2W` is left to the caller so that models
/// whose adjacency is a sum of squares can reuse it.
pub(crate) fn h_and_square_gradient(
    a: &DMatrix<f64>,
    form: AcyclicityForm,
) -> Result<(f64, DMatrix<f64>)> {
    form.validate()?;
    if !a.is_square() || a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input(
            "acyclicity functional needs a finite square matrix".into(),
        ));
    }
    let d = a.nrows();
    match form {
        AcyclicityForm::MatrixExponential => {
            let e_minus_i = expm_minus_identity(a);
            let h = e_minus_i.trace().max(0.0);
            let e = e_minus_i + DMatrix::identity(d, d);
            Ok((h, e.transpose()))
        }
        AcyclicityForm::Polynomial { alpha } => {
            let m = DMatrix::identity(d, d) + a * alpha;
            let m_pow = matrix_power(&m, d.saturating_sub(1));
            let h = ((&m_pow * &m).trace() - d as f64).max(0.0);
            Ok((h, m_pow.transpose() * (d as f64 * alpha)))
        }
    }
}
