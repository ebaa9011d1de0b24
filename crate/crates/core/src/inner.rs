//! Inner solver: alternating dual super-gradient ascent and primal
//! coordinate descent on a (sub-)problem.
//!
//! Each iteration ascends the dual with a feasible projection, maps the dual
//! back to the primal through the thresholding link, optionally runs cyclic
//! coordinate-descent sweeps on the primal (square loss only), and records
//! the sub-problem duality gap. The best-gap iterate is returned; ascent on
//! the non-smooth concave dual is not monotone.

use crate::dual;
use crate::error::Error;
use crate::loss::LossModel;
use crate::problem::{Hyperparams, ProblemData};
use crate::Result;
use alloc::vec::Vec;
use libm::sqrt;

/// Step-size rule for the dual ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    /// Constant step `omega`.
    Fixed(f64),
    /// Decreasing `omega_t = 1 / (t gamma)`.
    InverseT(f64),
}

impl StepSchedule {
    #[inline]
    fn step(&self, t: usize) -> f64 {
        match *self {
            StepSchedule::Fixed(w) => w,
            StepSchedule::InverseT(gamma) => 1.0 / (t as f64 * gamma),
        }
    }
}

/// Configuration of the inner solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerConfig {
    pub step_schedule: StepSchedule,
    pub max_iters: usize,
    /// Stop when the gap drops to this value (epsilon).
    pub gap_tol: f64,
    /// Stop when `|gap^{t-2} - gap^t|` drops to this value (zeta).
    pub gap_change_tol: f64,
    pub cd_passes_per_iter: usize,
    /// Record a trace point every iteration when true.
    pub record_trace: bool,
}

impl Default for InnerConfig {
    fn default() -> Self {
        InnerConfig {
            step_schedule: StepSchedule::Fixed(5e-4),
            max_iters: 10_000,
            gap_tol: 1e-6,
            gap_change_tol: 1e-6,
            cd_passes_per_iter: 1,
            record_trace: false,
        }
    }
}

impl InnerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok_sched = match self.step_schedule {
            StepSchedule::Fixed(w) => w > 0.0 && w.is_finite(),
            StepSchedule::InverseT(g) => g > 0.0 && g.is_finite(),
        };
        if !ok_sched {
            return Err(Error::InvalidHyperparams("step size must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidHyperparams("max_iters must be positive"));
        }
        if !(self.gap_tol > 0.0) || !(self.gap_change_tol > 0.0) {
            return Err(Error::InvalidHyperparams("tolerances must be positive"));
        }
        if self.cd_passes_per_iter == 0 {
            return Err(Error::InvalidHyperparams(
                "cd_passes_per_iter must be positive",
            ));
        }
        Ok(())
    }
}

/// One recorded iteration of the inner solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub gap: f64,
    pub primal: f64,
}

/// Outcome of an inner solve.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerResult {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gap: f64,
    pub iterations: usize,
    pub trace: Vec<TracePoint>,
}

/// Thresholding operator of the coordinate-descent step.
///
/// `beta_tilde` is the partial residual correlation `(y - X beta)' x_.j +
/// beta_j x_.j' x_.j`. The update divides by `x_.j' x_.j + 2 lambda2`; with
/// unit-norm columns the denominator collapses to `1 + 2 lambda2`. A
/// negative soft-thresholded magnitude always maps to zero.
#[inline]
pub fn cd_threshold(beta_tilde: f64, col_sq_norm: f64, hp: &Hyperparams) -> f64 {
    let denom = col_sq_norm + 2.0 * hp.lambda2();
    if denom <= 0.0 {
        return 0.0;
    }
    let s = (beta_tilde.abs() - hp.lambda1()) / denom;
    if s >= sqrt(2.0 * hp.lambda0() / denom) && s > 0.0 {
        beta_tilde.signum() * s
    } else {
        0.0
    }
}

/// One cyclic sweep in index order over all columns of `data`, updating
/// `beta` and the residual `y - X beta` in place. Square loss only.
pub(crate) fn cd_sweep(
    beta: &mut [f64],
    residual: &mut [f64],
    data: &ProblemData,
    hp: &Hyperparams,
) -> f64 {
    let mut max_change = 0.0f64;
    for j in 0..data.p() {
        let q = data.col_norm(j) * data.col_norm(j);
        let old = beta[j];
        let bt = data.col_dot(j, residual) + old * q;
        let new = cd_threshold(bt, q, hp);
        if new != old {
            let delta = new - old;
            for (r, x) in residual.iter_mut().zip(data.column(j)) {
                *r -= delta * x;
            }
            beta[j] = new;
            max_change = max_change.max(delta.abs());
        }
    }
    max_change
}

/// One full coordinate-descent pass; never increases the primal objective.
pub fn cd_pass(beta: &[f64], data: &ProblemData, hp: &Hyperparams) -> Result<Vec<f64>> {
    let u = data.predictions(beta)?;
    let mut residual: Vec<f64> = data.y().iter().zip(&u).map(|(y, ui)| y - ui).collect();
    let mut out = beta.to_vec();
    cd_sweep(&mut out, &mut residual, data, hp);
    Ok(out)
}

/// Algorithm state shared by the primal-dual inner solver and the pure
/// dual-ascent baseline (`use_cd = false`).
pub(crate) fn solve_loop(
    data: &ProblemData,
    hp: &Hyperparams,
    loss: LossModel,
    config: &InnerConfig,
    alpha0: &[f64],
    beta0: &[f64],
    use_cd: bool,
) -> Result<InnerResult> {
    hp.require_dual()?;
    config.validate()?;
    loss.check_labels(data.y())?;
    if alpha0.len() != data.n() {
        return Err(Error::ShapeMismatch {
            expected: data.n(),
            got: alpha0.len(),
        });
    }
    if beta0.len() != data.p() {
        return Err(Error::ShapeMismatch {
            expected: data.p(),
            got: beta0.len(),
        });
    }

    let cd_enabled = use_cd && loss == LossModel::Square;
    let inv_2l2 = -1.0 / (2.0 * hp.lambda2());

    let mut alpha: Vec<f64> = alpha0
        .iter()
        .zip(data.y())
        .map(|(a, y)| loss.project_feasible(*a, *y))
        .collect();
    let mut beta = beta0.to_vec();

    let mut best_gap = f64::INFINITY;
    let mut best_alpha = alpha.clone();
    let mut best_beta = beta.clone();
    let mut gap_hist: Vec<f64> = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = 0;

    for t in 1..=config.max_iters {
        iterations = t;

        // super-gradient g_i = x_i' beta - l*'(alpha_i)
        let u = data.predictions(&beta)?;
        let omega = config.step_schedule.step(t);
        for ((ai, ui), yi) in alpha.iter_mut().zip(&u).zip(data.y()) {
            let g = ui - loss.conjugate_derivative_raw(*ai, *yi);
            *ai = loss.project_feasible(*ai + omega * g, *yi);
        }

        // primal-dual link beta = B(eta(alpha))
        for j in 0..data.p() {
            let ej = data.col_dot(j, &alpha) * inv_2l2;
            beta[j] = dual::primal_from_dual_scalar(ej, hp);
        }

        if cd_enabled {
            let u = data.predictions(&beta)?;
            let mut residual: Vec<f64> =
                data.y().iter().zip(&u).map(|(y, ui)| y - ui).collect();
            for _ in 0..config.cd_passes_per_iter {
                cd_sweep(&mut beta, &mut residual, data, hp);
            }
        }

        let primal = dual::primal_objective(&beta, data, hp, loss)?;
        let dual_val = dual::dual_objective(&alpha, data, hp, loss)?;
        let gap = primal - dual_val;
        if !gap.is_finite() {
            return Err(Error::Diverged { iteration: t });
        }
        if config.record_trace {
            trace.push(TracePoint {
                iteration: t,
                gap,
                primal,
            });
        }
        if gap < best_gap {
            best_gap = gap;
            best_alpha.clone_from(&alpha);
            best_beta.clone_from(&beta);
        }
        gap_hist.push(gap);
        if gap <= config.gap_tol {
            break;
        }
        let k = gap_hist.len();
        if k >= 3 && (gap_hist[k - 3] - gap_hist[k - 1]).abs() <= config.gap_change_tol {
            break;
        }
    }

    Ok(InnerResult {
        alpha: best_alpha,
        beta: best_beta,
        gap: best_gap,
        iterations,
        trace,
    })
}

/// Runs Algorithm 1 on `data` (usually a column-restricted sub-problem).
///
/// Iterates dual ascent with feasible projection, the primal-dual link, and
/// `cd_passes_per_iter` coordinate-descent sweeps (square loss; other losses
/// skip the sweeps). Stops at `gap <= gap_tol`, when the gap change
/// `|gap^{t-2} - gap^t|` falls to `gap_change_tol`, or at `max_iters`.
pub fn inner_solve(
    data: &ProblemData,
    hp: &Hyperparams,
    loss: LossModel,
    config: &InnerConfig,
    alpha0: &[f64],
    beta0: &[f64],
) -> Result<InnerResult> {
    solve_loop(data, hp, loss, config, alpha0, beta0, true)
}
