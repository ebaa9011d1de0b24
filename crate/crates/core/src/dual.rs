//! Closed-form quantities of the duality theory.
//!
//! The dual variable `alpha` lives in the feasible set of the per-sample
//! conjugates. With `eta(alpha) = -X' alpha / (2 lambda2)` and the activity
//! threshold `eta0`, the primal-dual link is the thresholding map `B`, the
//! dual objective is `D(alpha) = -sum_i l*(alpha_i) + sum_j Psi(eta_j)`, and
//! the duality gap `P - D` bounds the distance of `alpha` to the dual
//! optimum through a ball of radius `sqrt(2 gap / gamma)`.

use crate::error::Error;
use crate::loss::LossModel;
use crate::problem::{Hyperparams, ProblemData};
use crate::Result;
use alloc::vec::Vec;
use libm::sqrt;

/// `eta(alpha) = -X' alpha / (2 lambda2)`.
pub fn eta(alpha: &[f64], data: &ProblemData, hp: &Hyperparams) -> Result<Vec<f64>> {
    hp.require_dual()?;
    let mut v = data.xt_dot(alpha)?;
    let s = -1.0 / (2.0 * hp.lambda2());
    for x in &mut v {
        *x *= s;
    }
    Ok(v)
}

/// The thresholding link `B` applied to one coordinate of `eta`.
///
/// The tie `|eta_j| = eta0` resolves to the nonzero branch.
#[inline]
pub fn primal_from_dual_scalar(eta_j: f64, hp: &Hyperparams) -> f64 {
    if eta_j.abs() >= hp.eta0() {
        eta_j.signum() * (eta_j.abs() - hp.lambda1() / (2.0 * hp.lambda2()))
    } else {
        0.0
    }
}

/// Vectorized `B`, mapping a full `eta` to a primal vector.
pub fn primal_from_dual(eta: &[f64], hp: &Hyperparams) -> Vec<f64> {
    eta.iter()
        .map(|&e| primal_from_dual_scalar(e, hp))
        .collect()
}

/// Per-coordinate dual penalty term `Psi(eta_j)`.
#[inline]
pub fn psi(eta_j: f64, hp: &Hyperparams) -> f64 {
    if eta_j.abs() >= hp.eta0() {
        let d = eta_j.abs() - hp.lambda1() / (2.0 * hp.lambda2());
        -hp.lambda2() * d * d + hp.lambda0()
    } else {
        0.0
    }
}

/// Primal objective
/// `P(beta) = sum_i l(x_i' beta, y_i) + lambda1 ||beta||_1 + lambda2 ||beta||_2^2 + lambda0 ||beta||_0`.
///
/// The l0 term counts exact nonzeros; the thresholding operators produce
/// exact zeros by construction.
pub fn primal_objective(
    beta: &[f64],
    data: &ProblemData,
    hp: &Hyperparams,
    loss: LossModel,
) -> Result<f64> {
    loss.check_labels(data.y())?;
    let u = data.predictions(beta)?;
    let mut v = 0.0;
    for (ui, yi) in u.iter().zip(data.y()) {
        v += loss.value_raw(*ui, *yi);
    }
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    let mut l0 = 0usize;
    for &b in beta {
        if b != 0.0 {
            l0 += 1;
            l1 += b.abs();
            l2 += b * b;
        }
    }
    Ok(v + hp.lambda1() * l1 + hp.lambda2() * l2 + hp.lambda0() * l0 as f64)
}

/// Dual objective `D(alpha) = -sum_i l*(alpha_i) + sum_j Psi(eta_j(alpha))`.
pub fn dual_objective(
    alpha: &[f64],
    data: &ProblemData,
    hp: &Hyperparams,
    loss: LossModel,
) -> Result<f64> {
    hp.require_dual()?;
    let mut conj = 0.0;
    for (ai, yi) in alpha.iter().zip(data.y()) {
        conj += loss.conjugate_value(*ai, *yi)?;
    }
    let e = eta(alpha, data, hp)?;
    let psi_sum: f64 = e.iter().map(|&ej| psi(ej, hp)).sum();
    Ok(-conj + psi_sum)
}

/// Square-loss specialization `D(alpha) = -alpha'alpha/2 - y'alpha + sum Psi`.
///
/// Kept as a second algebraic route; it must agree with [`dual_objective`]
/// for the square loss to machine precision.
pub fn dual_objective_square(alpha: &[f64], data: &ProblemData, hp: &Hyperparams) -> Result<f64> {
    hp.require_dual()?;
    if alpha.len() != data.n() {
        return Err(Error::ShapeMismatch {
            expected: data.n(),
            got: alpha.len(),
        });
    }
    let quad: f64 = alpha.iter().map(|a| a * a).sum();
    let lin: f64 = alpha.iter().zip(data.y()).map(|(a, y)| a * y).sum();
    let e = eta(alpha, data, hp)?;
    let psi_sum: f64 = e.iter().map(|&ej| psi(ej, hp)).sum();
    Ok(-0.5 * quad - lin + psi_sum)
}

/// Duality gap `P(beta) - D(alpha)`.
pub fn duality_gap(
    beta: &[f64],
    alpha: &[f64],
    data: &ProblemData,
    hp: &Hyperparams,
    loss: LossModel,
) -> Result<f64> {
    Ok(primal_objective(beta, data, hp, loss)? - dual_objective(alpha, data, hp, loss)?)
}

/// Gap via the conjugate identity `sum_i (l + l*) - alpha' X beta`.
///
/// Valid when `beta` is produced from `alpha` through the link `B`; used as
/// an independent cross-check of [`duality_gap`].
pub fn gap_via_conjugates(
    beta: &[f64],
    alpha: &[f64],
    data: &ProblemData,
    loss: LossModel,
) -> Result<f64> {
    if alpha.len() != data.n() {
        return Err(Error::ShapeMismatch {
            expected: data.n(),
            got: alpha.len(),
        });
    }
    let u = data.predictions(beta)?;
    let mut acc = 0.0;
    for ((ui, ai), yi) in u.iter().zip(alpha).zip(data.y()) {
        acc += loss.value(*ui, *yi)? + loss.conjugate_value(*ai, *yi)? - ai * ui;
    }
    Ok(acc)
}

/// Super-gradient of the dual, `g_i = x_i' beta - l*'(alpha_i)`.
pub fn super_gradient(
    beta: &[f64],
    alpha: &[f64],
    data: &ProblemData,
    loss: LossModel,
) -> Result<Vec<f64>> {
    if alpha.len() != data.n() {
        return Err(Error::ShapeMismatch {
            expected: data.n(),
            got: alpha.len(),
        });
    }
    let u = data.predictions(beta)?;
    let mut g = Vec::with_capacity(data.n());
    for ((ui, ai), yi) in u.iter().zip(alpha).zip(data.y()) {
        g.push(ui - loss.conjugate_derivative(*ai, *yi)?);
    }
    Ok(g)
}

/// Dual point induced by a primal vector: `alpha_i = l'(x_i' beta, y_i)`
/// projected onto the feasible set. For the square loss this is exactly
/// `X beta - y`.
pub fn dual_from_primal(beta: &[f64], data: &ProblemData, loss: LossModel) -> Result<Vec<f64>> {
    loss.check_labels(data.y())?;
    let u = data.predictions(beta)?;
    Ok(u.iter()
        .zip(data.y())
        .map(|(ui, yi)| loss.project_feasible(loss.derivative_raw(*ui, *yi), *yi))
        .collect())
}

/// Dual ball radius `sqrt(2 gap / gamma)`; callers pass `gamma =
/// smoothness_mu()` so the screening stays safe. Tiny negative gaps from
/// roundoff are clamped to zero.
pub fn ball_radius(gap: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain("ball radius needs gamma > 0"));
    }
    Ok(sqrt(2.0 * gap.max(0.0) / gamma))
}
