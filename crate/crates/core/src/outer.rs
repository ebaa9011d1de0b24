//! Outer loop: incremental active sets with safe screening.
//!
//! Each step solves the sub-problem restricted to the active set (warm
//! started), embeds the sub-solution into the full coefficient vector,
//! computes the full-problem duality gap and the dual ball radius, screens
//! features, and adds a batch of the most correlated remaining features.
//! Two dual candidates are evaluated for the global gap: the sub-problem
//! dual iterate and the dual point induced by the primal vector; the one
//! with the larger dual value (smaller gap) is used.

use crate::active_set::{batch_size, certified_active_count, FeatureSets};
use crate::dual;
use crate::error::Error;
use crate::inner::{self, InnerConfig};
use crate::loss::LossModel;
use crate::problem::{Hyperparams, ProblemData};
use crate::Result;
use alloc::vec;
use alloc::vec::Vec;

/// Configuration of the outer loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterConfig {
    /// Global duality-gap stopping threshold (xi).
    pub global_gap_tol: f64,
    pub inner: InnerConfig,
    /// Batch constant `c` in `h = ceil(c ln p)`.
    pub add_c: f64,
    /// Initial active-set size; `None` uses the adding batch size.
    pub init_size: Option<usize>,
    pub max_outer_iters: usize,
    /// Rescale columns to unit norm before solving, mapping the solution
    /// back to original coordinates in the report.
    pub normalize_columns: bool,
}

impl Default for OuterConfig {
    fn default() -> Self {
        OuterConfig {
            global_gap_tol: 1e-6,
            inner: InnerConfig::default(),
            add_c: 4.0,
            init_size: None,
            max_outer_iters: 200,
            normalize_columns: false,
        }
    }
}

impl OuterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.global_gap_tol > 0.0) {
            return Err(Error::InvalidHyperparams("global_gap_tol must be > 0"));
        }
        if !(self.add_c > 0.0) {
            return Err(Error::InvalidHyperparams("add_c must be > 0"));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::InvalidHyperparams("max_outer_iters must be > 0"));
        }
        if self.init_size == Some(0) {
            return Err(Error::InvalidHyperparams("init_size must be > 0"));
        }
        self.inner.validate()
    }
}

/// One outer step of the trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterTraceStep {
    pub active_len: usize,
    pub screened_len: usize,
    pub gap: f64,
    pub primal: f64,
    pub dual: f64,
}

/// Final report of an outer solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Full-length coefficient vector (original coordinates).
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub primal_value: f64,
    /// Full-problem duality gap at the reported iterate.
    pub gap: f64,
    pub support: Vec<usize>,
    /// Features permanently discarded by screening, over all steps.
    pub screened: Vec<usize>,
    pub outer_iters: usize,
    pub inner_iters_total: usize,
    /// Filled by callers that time the solve; the core sets 0.
    pub wall_time_s: f64,
    /// False when `max_outer_iters` was exhausted before `gap <
    /// global_gap_tol`.
    pub converged: bool,
    /// Features certified in the optimal support by the lower bound at the
    /// last step (diagnostic).
    pub certified_active: usize,
    pub trace: Vec<OuterTraceStep>,
}

struct GapEval {
    gap: f64,
    dual_value: f64,
    alpha: Vec<f64>,
}

/// Full-problem gap with the better of the two dual candidates.
fn evaluate_gap(
    beta: &[f64],
    alpha_sub: &[f64],
    primal: f64,
    data: &ProblemData,
    hp: &Hyperparams,
    loss: LossModel,
) -> Result<GapEval> {
    let d1 = dual::dual_objective(alpha_sub, data, hp, loss)?;
    let alpha2 = dual::dual_from_primal(beta, data, loss)?;
    let d2 = dual::dual_objective(&alpha2, data, hp, loss)?;
    if d2 > d1 {
        Ok(GapEval {
            gap: primal - d2,
            dual_value: d2,
            alpha: alpha2,
        })
    } else {
        Ok(GapEval {
            gap: primal - d1,
            dual_value: d1,
            alpha: alpha_sub.to_vec(),
        })
    }
}

/// Runs the full primal-dual method with incremental active sets.
pub fn solve(
    data: &ProblemData,
    hp: &Hyperparams,
    loss: LossModel,
    config: &OuterConfig,
) -> Result<SolveReport> {
    config.validate()?;
    hp.require_dual()?;
    loss.check_labels(data.y())?;

    let normalized;
    let scales;
    let work: &ProblemData = if config.normalize_columns {
        let (nd, sc) = data.normalize_columns();
        normalized = nd;
        scales = sc;
        &normalized
    } else {
        scales = Vec::new();
        data
    };

    let p = work.p();
    let n = work.n();
    let mu = loss.smoothness_mu();
    let init_size = config
        .init_size
        .unwrap_or_else(|| batch_size(config.add_c, p))
        .min(p);
    let mut sets = FeatureSets::init(work, loss, init_size)?;

    let mut alpha = vec![0.0; n];
    let mut beta_full = vec![0.0; p];
    let mut prev_primal = f64::INFINITY;
    let mut do_add = true;

    let mut best: Option<(f64, Vec<f64>, Vec<f64>, f64, f64)> = None; // gap, beta, alpha, primal, dual
    let mut trace = Vec::new();
    let mut inner_iters_total = 0;
    let mut outer_iters = 0;
    let mut converged = false;
    let mut certified = 0;

    for _s in 0..config.max_outer_iters {
        outer_iters += 1;

        let sub = work.select_columns(sets.active());
        let beta_sub: Vec<f64> = sets.active().iter().map(|&j| beta_full[j]).collect();
        let result = inner::inner_solve(&sub, hp, loss, &config.inner, &alpha, &beta_sub)?;
        inner_iters_total += result.iterations;
        alpha = result.alpha;

        // embed the sub-solution, keeping the previous iterate when it has
        // the better primal value (the ascent side is not monotone)
        let mut candidate = vec![0.0; p];
        for (&j, &b) in sets.active().iter().zip(&result.beta) {
            candidate[j] = b;
        }
        let p_cand = dual::primal_objective(&candidate, work, hp, loss)?;
        let primal = if p_cand <= prev_primal {
            beta_full = candidate;
            p_cand
        } else {
            prev_primal
        };
        prev_primal = primal;

        let eval = evaluate_gap(&beta_full, &alpha, primal, work, hp, loss)?;
        if !eval.gap.is_finite() {
            return Err(Error::Diverged {
                iteration: outer_iters,
            });
        }
        trace.push(OuterTraceStep {
            active_len: sets.active().len(),
            screened_len: sets.screened().len(),
            gap: eval.gap,
            primal,
            dual: eval.dual_value,
        });
        let radius = dual::ball_radius(eval.gap, mu)?;
        certified = certified_active_count(&eval.alpha, radius, work, hp);
        if best.as_ref().map_or(true, |(g, ..)| eval.gap < *g) {
            best = Some((
                eval.gap,
                beta_full.clone(),
                eval.alpha.clone(),
                primal,
                eval.dual_value,
            ));
        }
        if eval.gap < config.global_gap_tol {
            converged = true;
            break;
        }

        let dropped = sets.screen(&eval.alpha, radius, work, hp);
        if !dropped.is_empty() {
            for &j in &dropped {
                beta_full[j] = 0.0;
            }
            prev_primal = dual::primal_objective(&beta_full, work, hp, loss)?;
        }
        if do_add {
            if sets.adding_exhausted(&eval.alpha, radius, work, hp) {
                do_add = false;
            } else {
                sets.add_features(&eval.alpha, work, config.add_c);
            }
        }
    }

    let (gap, beta, alpha, primal_value, _dual_value) =
        best.expect("at least one outer step ran");

    // map back to the original coordinates when columns were rescaled
    let beta = if config.normalize_columns {
        beta.iter().zip(&scales).map(|(b, s)| b / s).collect()
    } else {
        beta
    };
    let support: Vec<usize> = beta
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| j)
        .collect();

    Ok(SolveReport {
        beta,
        alpha,
        primal_value,
        gap,
        support,
        screened: sets.screened().to_vec(),
        outer_iters,
        inner_iters_total,
        wall_time_s: 0.0,
        converged,
        certified_active: certified,
        trace,
    })
}
