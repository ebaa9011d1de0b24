//! Reference solvers: pure dual ascent, full-problem coordinate descent, and
//! an exhaustive best-subset oracle for small `p`.

use crate::dual;
use crate::error::Error;
use crate::inner::{self, InnerConfig, InnerResult};
use crate::loss::LossModel;
use crate::problem::{Hyperparams, ProblemData};
use crate::Result;
use alloc::vec;
use alloc::vec::Vec;

/// Dual super-gradient ascent on the full problem, without the interleaved
/// coordinate-descent sweeps and without active sets. Starts from `alpha =
/// 0`, `beta = 0`.
pub fn dual_ascent_solve(
    data: &ProblemData,
    hp: &Hyperparams,
    loss: LossModel,
    config: &InnerConfig,
) -> Result<InnerResult> {
    let alpha0 = vec![0.0; data.n()];
    let beta0 = vec![0.0; data.p()];
    inner::solve_loop(data, hp, loss, config, &alpha0, &beta0, false)
}

/// Configuration of the standalone coordinate-descent solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdConfig {
    pub max_sweeps: usize,
    /// Stop when the largest coordinate change in a sweep drops below this.
    pub change_tol: f64,
}

impl Default for CdConfig {
    fn default() -> Self {
        CdConfig {
            max_sweeps: 1_000,
            change_tol: 1e-10,
        }
    }
}

/// Outcome of a coordinate-descent solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CdResult {
    pub beta: Vec<f64>,
    pub primal_value: f64,
    pub sweeps: usize,
    /// Duality gap at the induced dual point `X beta - y`; `None` when
    /// `lambda2 = 0`, where the dual is undefined.
    pub gap: Option<f64>,
}

/// Cyclic coordinate descent over all features, square loss, starting from
/// `beta = 0`. Monotone in the primal objective.
pub fn cd_solve(data: &ProblemData, hp: &Hyperparams, config: &CdConfig) -> Result<CdResult> {
    if config.max_sweeps == 0 {
        return Err(Error::InvalidHyperparams("max_sweeps must be positive"));
    }
    if !(config.change_tol >= 0.0) {
        return Err(Error::InvalidHyperparams("change_tol must be >= 0"));
    }
    let mut beta = vec![0.0; data.p()];
    let mut residual = data.y().to_vec();
    let mut sweeps = 0;
    for _ in 0..config.max_sweeps {
        sweeps += 1;
        let change = inner::cd_sweep(&mut beta, &mut residual, data, hp);
        if change <= config.change_tol {
            break;
        }
    }
    let primal_value = dual::primal_objective(&beta, data, hp, LossModel::Square)?;
    let gap = if hp.lambda2() > 0.0 {
        let alpha = dual::dual_from_primal(&beta, data, LossModel::Square)?;
        Some(primal_value - dual::dual_objective(&alpha, data, hp, LossModel::Square)?)
    } else {
        None
    };
    Ok(CdResult {
        beta,
        primal_value,
        sweeps,
        gap,
    })
}

/// Outcome of the exhaustive oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub beta: Vec<f64>,
    pub support: Vec<usize>,
    pub objective: f64,
    pub supports_evaluated: usize,
}

const ORACLE_MAX_P: usize = 15;

/// Exact minimizer by support enumeration, square loss with `lambda1 = 0`.
///
/// For each support the restricted problem is a ridge regression solved
/// through its normal equations; supports whose Gram matrix is not positive
/// definite are skipped (only possible at `lambda2 = 0`). Ties in the
/// objective resolve toward the smaller support, then lexicographically.
pub fn oracle_solve(data: &ProblemData, hp: &Hyperparams) -> Result<OracleResult> {
    if data.p() > ORACLE_MAX_P {
        return Err(Error::Unsupported("oracle limited to p <= 15"));
    }
    if hp.lambda1() != 0.0 {
        return Err(Error::Unsupported("oracle requires lambda1 = 0"));
    }
    let p = data.p();
    let mut masks: Vec<u32> = (0..(1u32 << p)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));

    let mut best_obj = f64::INFINITY;
    let mut best_beta = vec![0.0; p];
    let mut evaluated = 0;
    for mask in masks {
        let support: Vec<usize> = (0..p).filter(|j| mask >> j & 1 == 1).collect();
        let sub = data.select_columns(&support);
        let Some(beta_s) = ridge_exact(&sub, hp.lambda2()) else {
            continue;
        };
        evaluated += 1;
        let mut beta = vec![0.0; p];
        for (&j, &b) in support.iter().zip(&beta_s) {
            beta[j] = b;
        }
        let obj = dual::primal_objective(&beta, data, hp, LossModel::Square)?;
        if obj < best_obj - 1e-12 {
            best_obj = obj;
            best_beta = beta;
        }
    }
    let support: Vec<usize> = best_beta
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| j)
        .collect();
    Ok(OracleResult {
        beta: best_beta,
        support,
        objective: best_obj,
        supports_evaluated: evaluated,
    })
}

/// Solves `(X'X + 2 lambda2 I) b = X'y` by Cholesky; `None` when the matrix
/// is not positive definite.
fn ridge_exact(data: &ProblemData, lambda2: f64) -> Option<Vec<f64>> {
    let k = data.p();
    if k == 0 {
        return Some(Vec::new());
    }
    let mut g = vec![0.0; k * k];
    for a in 0..k {
        for b in a..k {
            let v = data.col_dot(a, data.column(b));
            g[a * k + b] = v;
            g[b * k + a] = v;
        }
        g[a * k + a] += 2.0 * lambda2;
    }
    let rhs: Vec<f64> = (0..k).map(|j| data.col_dot(j, data.y())).collect();
    cholesky_solve(&mut g, rhs, k)
}

fn cholesky_solve(g: &mut [f64], mut b: Vec<f64>, k: usize) -> Option<Vec<f64>> {
    // in-place lower-triangular factor
    for i in 0..k {
        for j in 0..=i {
            let mut s = g[i * k + j];
            for t in 0..j {
                s -= g[i * k + t] * g[j * k + t];
            }
            if i == j {
                if s <= 1e-12 {
                    return None;
                }
                g[i * k + i] = libm::sqrt(s);
            } else {
                g[i * k + j] = s / g[j * k + j];
            }
        }
    }
    // forward then back substitution
    for i in 0..k {
        let mut s = b[i];
        for t in 0..i {
            s -= g[i * k + t] * b[t];
        }
        b[i] = s / g[i * k + i];
    }
    for i in (0..k).rev() {
        let mut s = b[i];
        for t in i + 1..k {
            s -= g[t * k + i] * b[t];
        }
        b[i] = s / g[i * k + i];
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner::StepSchedule;

    #[test]
    fn oracle_worked_instance() {
        let data = ProblemData::from_rows(2, 1, &[1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let hp = Hyperparams::new(0.01, 0.0, 0.5).unwrap();
        let r = oracle_solve(&data, &hp).unwrap();
        assert_eq!(r.support, vec![0]);
        assert!((r.beta[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.objective - 0.343_333_333_333_333_3).abs() < 1e-12);
        assert_eq!(r.supports_evaluated, 2);
    }

    #[test]
    fn oracle_prefers_empty_support_under_heavy_l0() {
        let data = ProblemData::from_rows(2, 2, &[1.0, 0.5, 1.0, -0.5], vec![1.0, 1.0]).unwrap();
        let hp = Hyperparams::new(100.0, 0.0, 0.0).unwrap();
        let r = oracle_solve(&data, &hp).unwrap();
        assert!(r.support.is_empty());
        assert_eq!(r.objective, 1.0);
    }

    #[test]
    fn oracle_handles_rank_deficiency_without_ridge() {
        // duplicated column: the full support has a singular Gram matrix at
        // lambda2 = 0 and must be skipped, not crash
        let data = ProblemData::from_rows(2, 2, &[1.0, 1.0, 2.0, 2.0], vec![1.0, 2.0]).unwrap();
        let hp = Hyperparams::new(0.0, 0.0, 0.0).unwrap();
        let r = oracle_solve(&data, &hp).unwrap();
        assert!(r.supports_evaluated < 4);
        assert!(r.objective < 1e-12);
        assert_eq!(r.support.len(), 1);
    }

    #[test]
    fn oracle_rejects_large_p_and_l1() {
        let data = ProblemData::from_columns(1, 16, vec![0.0; 16], vec![1.0]).unwrap();
        let hp = Hyperparams::new(0.1, 0.0, 1.0).unwrap();
        assert!(oracle_solve(&data, &hp).is_err());
        let small = ProblemData::from_rows(1, 1, &[1.0], vec![1.0]).unwrap();
        let hp1 = Hyperparams::new(0.1, 0.1, 1.0).unwrap();
        assert!(oracle_solve(&small, &hp1).is_err());
    }

    #[test]
    fn cd_solve_matches_oracle_on_small_instance() {
        let data = ProblemData::from_rows(
            3,
            2,
            &[1.0, 0.1, 0.2, 1.1, -0.3, 0.9],
            vec![1.2, 0.3, -0.4],
        )
        .unwrap();
        let hp = Hyperparams::new(0.02, 0.0, 0.3).unwrap();
        let cd = cd_solve(&data, &hp, &CdConfig::default()).unwrap();
        let or = oracle_solve(&data, &hp).unwrap();
        assert!(cd.primal_value <= or.objective + 1e-8);
        assert!(cd.gap.unwrap() >= -1e-10);
    }

    #[test]
    fn dual_ascent_converges_on_worked_instance() {
        let data = ProblemData::from_rows(2, 1, &[1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let hp = Hyperparams::new(0.01, 0.0, 0.5).unwrap();
        let config = InnerConfig {
            step_schedule: StepSchedule::Fixed(0.25),
            gap_tol: 1e-8,
            gap_change_tol: 1e-14,
            max_iters: 50_000,
            ..InnerConfig::default()
        };
        let r = dual_ascent_solve(&data, &hp, LossModel::Square, &config).unwrap();
        assert!(r.gap <= 1e-8, "gap = {}", r.gap);
        assert!((r.beta[0] - 2.0 / 3.0).abs() < 1e-3);
    }
}
