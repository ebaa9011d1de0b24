//! Working-set bookkeeping: safe screening, incremental feature adding, and
//! active-set initialization.
//!
//! Features are partitioned into `active` (used by the sub-problem solver),
//! `remaining` (candidates), and `screened` (permanently discarded). A
//! feature is screened when `|x_.j' alpha| + ||x_.j|| r < 2 sqrt(lambda0
//! lambda2) + lambda1`, which certifies it outside the optimal support for
//! any dual point within distance `r` of the optimum.

use crate::loss::LossModel;
use crate::problem::{Hyperparams, ProblemData};
use crate::Result;
use alloc::vec::Vec;
use libm::{ceil, log};

/// Adding batch size `h = ceil(c ln p)` (natural log).
pub fn batch_size(c: f64, p: usize) -> usize {
    if p <= 1 {
        return 1;
    }
    ceil(c * log(p as f64)) as usize
}

/// Ordered partition of the feature indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSets {
    active: Vec<usize>,
    remaining: Vec<usize>,
    screened: Vec<usize>,
}

impl FeatureSets {
    /// Seeds the active set with the `size` features scoring highest on
    /// `|x_.j' l'(0)|`, where `l'(0)` is the per-sample loss derivative at
    /// `beta = 0`. Ties break toward the lower index.
    pub fn init(data: &ProblemData, loss: LossModel, size: usize) -> Result<FeatureSets> {
        loss.check_labels(data.y())?;
        let grad0: Vec<f64> = data
            .y()
            .iter()
            .map(|&yi| loss.derivative_raw(0.0, yi))
            .collect();
        let mut order: Vec<usize> = (0..data.p()).collect();
        let scores: Vec<f64> = (0..data.p())
            .map(|j| data.col_dot(j, &grad0).abs())
            .collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let size = size.min(data.p()).max(1);
        let mut active = order[..size].to_vec();
        let mut remaining = order[size..].to_vec();
        active.sort_unstable();
        remaining.sort_unstable();
        Ok(FeatureSets {
            active,
            remaining,
            screened: Vec::new(),
        })
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn remaining(&self) -> &[usize] {
        &self.remaining
    }

    pub fn screened(&self) -> &[usize] {
        &self.screened
    }

    /// Moves the `min(h, |remaining|)` remaining features with the largest
    /// `|x_.j' alpha|` into the active set, `h = ceil(c ln p)`.
    pub fn add_features(&mut self, alpha: &[f64], data: &ProblemData, c: f64) {
        if self.remaining.is_empty() {
            return;
        }
        let h = batch_size(c, data.p()).min(self.remaining.len());
        let mut scored: Vec<(f64, usize)> = self
            .remaining
            .iter()
            .map(|&j| (data.col_dot(j, alpha).abs(), j))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let chosen: Vec<usize> = scored[..h].iter().map(|&(_, j)| j).collect();
        self.remaining.retain(|j| !chosen.contains(j));
        self.active.extend_from_slice(&chosen);
        self.active.sort_unstable();
    }

    /// Applies the screening rule to both active and remaining features;
    /// screened features never return. Returns the indices removed from the
    /// active set by this call.
    pub fn screen(
        &mut self,
        alpha: &[f64],
        radius: f64,
        data: &ProblemData,
        hp: &Hyperparams,
    ) -> Vec<usize> {
        let thr = hp.screening_threshold();
        let rule = |j: usize| data.col_dot(j, alpha).abs() + data.col_norm(j) * radius < thr;
        let mut dropped_active = Vec::new();
        self.active.retain(|&j| {
            if rule(j) {
                dropped_active.push(j);
                false
            } else {
                true
            }
        });
        let screened = &mut self.screened;
        self.remaining.retain(|&j| {
            if rule(j) {
                screened.push(j);
                false
            } else {
                true
            }
        });
        screened.extend_from_slice(&dropped_active);
        screened.sort_unstable();
        dropped_active
    }

    /// True when every remaining feature satisfies the screening inequality,
    /// so feature adding can stop.
    pub fn adding_exhausted(
        &self,
        alpha: &[f64],
        radius: f64,
        data: &ProblemData,
        hp: &Hyperparams,
    ) -> bool {
        let thr = hp.screening_threshold();
        self.remaining
            .iter()
            .all(|&j| data.col_dot(j, alpha).abs() + data.col_norm(j) * radius < thr)
    }

    /// Partition sanity check: disjoint and covering `{0..p-1}`.
    pub fn is_partition(&self, p: usize) -> bool {
        let mut seen = alloc::vec![false; p];
        for &j in self
            .active
            .iter()
            .chain(&self.remaining)
            .chain(&self.screened)
        {
            if j >= p || seen[j] {
                return false;
            }
            seen[j] = true;
        }
        seen.iter().all(|&s| s)
    }
}

/// Count of features certified inside the optimal support by the lower
/// bound `|x_.j' alpha| - ||x_.j|| r > 2 sqrt(lambda0 lambda2) + lambda1`.
/// Diagnostic only; the outer loop never consumes it.
pub fn certified_active_count(
    alpha: &[f64],
    radius: f64,
    data: &ProblemData,
    hp: &Hyperparams,
) -> usize {
    let thr = hp.screening_threshold();
    (0..data.p())
        .filter(|&j| data.col_dot(j, alpha).abs() - data.col_norm(j) * radius > thr)
        .count()
}
