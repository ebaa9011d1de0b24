//! Replicated solver comparisons with CSV output.

use crate::data::{generate_synthetic, SyntheticSpec};
use l0pd_core::baselines::{self, CdConfig};
use l0pd_core::{outer, Error, Hyperparams, InnerConfig, LossModel, OuterConfig, ProblemData};
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

/// `||beta - beta_true|| / ||beta_true||`.
pub fn estimation_error(beta: &[f64], beta_true: &[f64]) -> Result<f64, Error> {
    if beta.len() != beta_true.len() {
        return Err(Error::ShapeMismatch {
            expected: beta_true.len(),
            got: beta.len(),
        });
    }
    let norm_true: f64 = beta_true.iter().map(|b| b * b).sum::<f64>().sqrt();
    if norm_true == 0.0 {
        return Err(Error::Domain("estimation error undefined for zero truth"));
    }
    let diff: f64 = beta
        .iter()
        .zip(beta_true)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / norm_true)
}

/// Exact support equality.
pub fn support_recovered(beta: &[f64], beta_true: &[f64]) -> bool {
    beta.len() == beta_true.len()
        && beta
            .iter()
            .zip(beta_true)
            .all(|(a, b)| (*a == 0.0) == (*b == 0.0))
}

/// One benchmark result row.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub solver: SolverKind,
    pub n: usize,
    pub p: usize,
    pub snr: f64,
    pub replicate: usize,
    pub wall_time_s: f64,
    pub gap: f64,
    pub nnz: usize,
    pub support_recovered: bool,
    pub est_error: f64,
    pub primal_value: f64,
    pub status: Status,
    /// Recovered coefficients, for post-hoc checks; not part of the CSV.
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Diverged,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Diverged => "diverged",
        }
    }
}

/// Fraction of rows with the support recovered exactly.
pub fn pssr(rows: &[MetricRow]) -> Result<f64, Error> {
    if rows.is_empty() {
        return Err(Error::Domain("pssr of an empty row set"));
    }
    let hits = rows.iter().filter(|r| r.support_recovered).count();
    Ok(hits as f64 / rows.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    PrimDual,
    DualAst,
    Cd,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::PrimDual => "PrimDual",
            SolverKind::DualAst => "DualAst",
            SolverKind::Cd => "CD",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "PrimDual" | "primdual" => Ok(SolverKind::PrimDual),
            "DualAst" | "dualast" => Ok(SolverKind::DualAst),
            "CD" | "cd" => Ok(SolverKind::Cd),
            _ => Err(format!("unknown solver {s:?}")),
        }
    }
}

/// Grid of experiment settings, the solvers to run, and solver options.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    pub p: usize,
    pub rho: f64,
    /// Per-SNR regularization weights; one setting per `(n, snr)` pair.
    pub snr_values: Vec<(f64, Hyperparams)>,
    pub solvers: Vec<SolverKind>,
    pub replicates: usize,
    pub base_seed: u64,
    pub support_fraction: f64,
    pub outer: OuterConfig,
    pub dual_ast: InnerConfig,
    pub cd: CdConfig,
    /// When false, wall_time_s is written as 0 so identical configurations
    /// produce byte-identical CSVs.
    pub record_time: bool,
    /// Solve on the rescaled problem (unit-norm columns, `y / sqrt(n)`), so
    /// regularization weights act per sample; coefficients are mapped back to
    /// original coordinates before computing recovery metrics. `gap` and
    /// `primal_value` refer to the rescaled objective.
    pub standardize: bool,
}

impl ExperimentConfig {
    pub fn new(
        n_values: Vec<usize>,
        p: usize,
        rho: f64,
        snr_values: Vec<(f64, Hyperparams)>,
        solvers: Vec<SolverKind>,
        replicates: usize,
        base_seed: u64,
    ) -> Result<Self, Error> {
        if replicates == 0 {
            return Err(Error::InvalidData("replicates must be >= 1"));
        }
        if n_values.is_empty() || snr_values.is_empty() || solvers.is_empty() {
            return Err(Error::InvalidData("empty experiment grid"));
        }
        Ok(ExperimentConfig {
            n_values,
            p,
            rho,
            snr_values,
            solvers,
            replicates,
            base_seed,
            support_fraction: 0.03,
            outer: OuterConfig::default(),
            dual_ast: InnerConfig::default(),
            cd: CdConfig::default(),
            record_time: true,
            standardize: false,
        })
    }
}

/// Runs one solver on one instance; wall time covers the solve only.
pub fn run_single(
    solver: SolverKind,
    data: &ProblemData,
    hp: &Hyperparams,
    config: &ExperimentConfig,
) -> Result<(Vec<f64>, f64, f64, f64, Status), Error> {
    let start = Instant::now();
    let solved = match solver {
        SolverKind::PrimDual => outer::solve(data, hp, LossModel::Square, &config.outer)
            .map(|r| (r.beta, r.gap, r.primal_value)),
        SolverKind::DualAst => {
            baselines::dual_ascent_solve(data, hp, LossModel::Square, &config.dual_ast).map(|r| {
                let primal = l0pd_core::dual::primal_objective(&r.beta, data, hp, LossModel::Square)
                    .unwrap_or(f64::NAN);
                (r.beta, r.gap, primal)
            })
        }
        SolverKind::Cd => baselines::cd_solve(data, hp, &config.cd)
            .map(|r| (r.beta, r.gap.unwrap_or(f64::NAN), r.primal_value)),
    };
    let elapsed = start.elapsed().as_secs_f64();
    match solved {
        Ok((beta, gap, primal)) => Ok((beta, elapsed, gap, primal, Status::Ok)),
        Err(Error::Diverged { .. }) => Ok((
            vec![0.0; data.p()],
            elapsed,
            f64::NAN,
            f64::NAN,
            Status::Diverged,
        )),
        Err(e) => Err(e),
    }
}

/// Runs the full grid and returns the rows in deterministic order
/// (setting, solver, replicate), regardless of scheduling.
///
/// Jobs run on `min(L0PD_THREADS, logical cores)` worker threads; each job
/// regenerates its own data from `base_seed + replicate` so rows are
/// independent of thread assignment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<MetricRow>, Error> {
    struct Job {
        n: usize,
        snr: f64,
        hp: Hyperparams,
        solver: SolverKind,
        replicate: usize,
    }
    let mut jobs = Vec::new();
    for &n in &config.n_values {
        for &(snr, hp) in &config.snr_values {
            for &solver in &config.solvers {
                for replicate in 0..config.replicates {
                    jobs.push(Job {
                        n,
                        snr,
                        hp,
                        solver,
                        replicate,
                    });
                }
            }
        }
    }

    let workers = thread_count().min(jobs.len()).max(1);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<MetricRow, Error>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let job = &jobs[i];
                let row = run_job(job.n, job.snr, &job.hp, job.solver, job.replicate, config);
                slots.lock().unwrap()[i] = Some(row);
            });
        }
    });

    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("all jobs completed"))
        .collect()
}

fn run_job(
    n: usize,
    snr: f64,
    hp: &Hyperparams,
    solver: SolverKind,
    replicate: usize,
    config: &ExperimentConfig,
) -> Result<MetricRow, Error> {
    let spec = SyntheticSpec {
        support_fraction: config.support_fraction,
        ..SyntheticSpec::new(
            n,
            config.p,
            config.rho,
            snr,
            config.base_seed + replicate as u64,
        )?
    };
    let (data, beta_true) = generate_synthetic(&spec)?;
    let (beta, elapsed, gap, primal, status) = if config.standardize {
        let (std, col_scales, y_scale) = crate::data::standardize(&data);
        let (beta_std, elapsed, gap, primal, status) = run_single(solver, &std, hp, config)?;
        let beta = crate::data::unstandardize_beta(&beta_std, &col_scales, y_scale);
        (beta, elapsed, gap, primal, status)
    } else {
        run_single(solver, &data, hp, config)?
    };
    let nnz = beta.iter().filter(|b| **b != 0.0).count();
    Ok(MetricRow {
        solver,
        n,
        p: config.p,
        snr,
        replicate,
        wall_time_s: if config.record_time { elapsed } else { 0.0 },
        gap,
        nnz,
        support_recovered: support_recovered(&beta, &beta_true),
        // undefined for an all-zero truth; recorded as nan in the CSV
        est_error: estimation_error(&beta, &beta_true).unwrap_or(f64::NAN),
        primal_value: primal,
        status,
        beta,
    })
}

fn thread_count() -> usize {
    let cores = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    match std::env::var("L0PD_THREADS") {
        Ok(v) => v.parse().ok().filter(|&t| t >= 1).unwrap_or(cores),
        Err(_) => cores,
    }
}

pub const CSV_HEADER: &str =
    "solver,n,p,snr,replicate,wall_time_s,gap,nnz,support_recovered,est_error,primal_value,status";

fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.9e}")
    }
}

/// Renders rows as CSV (UTF-8, LF, 10-significant-digit floats).
pub fn to_csv(rows: &[MetricRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.solver.as_str(),
            r.n,
            r.p,
            fmt_float(r.snr),
            r.replicate,
            fmt_float(r.wall_time_s),
            fmt_float(r.gap),
            r.nnz,
            r.support_recovered,
            fmt_float(r.est_error),
            fmt_float(r.primal_value),
            r.status.as_str(),
        )
        .unwrap();
    }
    out
}
