//! Command-line front end: generate / solve / bench / oracle.

use clap::{Args, Parser, Subcommand};
use l0pd::bench::{self, ExperimentConfig, SolverKind};
use l0pd::config::Settings;
use l0pd::data::{self, SyntheticSpec};
use l0pd_core::baselines::{self, CdConfig};
use l0pd_core::inner::StepSchedule;
use l0pd_core::{dual, outer, Error, Hyperparams, InnerConfig, LossModel, OuterConfig};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "l0pd", about = "Best-subset selection with l0/l1/l2 regularization")]
struct Cli {
    /// Settings file with key=value lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic problem in libsvm format plus a .beta sidecar.
    Generate(GenerateArgs),
    /// Solve a problem from a libsvm file and print a summary.
    Solve(SolveArgs),
    /// Run a replicated solver comparison and write a CSV.
    Bench(BenchArgs),
    /// Exhaustive small-p solve; optionally compare against a .beta file.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    support_fraction: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    /// square | logistic | huber:<gamma>
    #[arg(long)]
    loss: Option<String>,
    /// PrimDual | DualAst | CD
    #[arg(long)]
    solver: Option<String>,
    /// Dual ascent step size.
    #[arg(long)]
    omega: Option<f64>,
    /// Inner duality-gap tolerance.
    #[arg(long)]
    eps: Option<f64>,
    /// Gap-change stagnation tolerance.
    #[arg(long)]
    zeta: Option<f64>,
    /// Global duality-gap tolerance of the outer loop.
    #[arg(long)]
    xi: Option<f64>,
    /// Feature-adding batch constant.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    normalize: bool,
    /// Write the coefficient vector here, one value per line.
    #[arg(long)]
    beta_output: Option<PathBuf>,
    /// Write the per-step gap trace here as CSV.
    #[arg(long)]
    trace_output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated sample sizes.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    /// Comma-separated signal-to-noise ratios.
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    /// Comma-separated subset of PrimDual, DualAst, CD.
    #[arg(long)]
    solvers: Option<String>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    support_fraction: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Write wall_time_s as 0 for byte-reproducible output.
    #[arg(long)]
    no_time: bool,
    /// Solve on unit-norm columns with y scaled by 1/sqrt(n); recovery
    /// metrics are still computed in original coordinates.
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    /// Compare against this .beta file.
    #[arg(long)]
    beta: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Diverged { .. } | Error::Infeasible { .. } | Error::Domain(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<data::IoError> for CliError {
    fn from(e: data::IoError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<l0pd::config::ConfigError> for CliError {
    fn from(e: l0pd::config::ConfigError) -> Self {
        CliError::Usage(format!("config: {e}"))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits; real parse errors are usage
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let settings = match &cli.config {
        Some(path) => match Settings::load(path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: config: {e}");
                return ExitCode::from(1);
            }
        },
        None => Settings::default(),
    };
    let result = match cli.command {
        Command::Generate(a) => run_generate(a, &settings),
        Command::Solve(a) => run_solve(a, &settings),
        Command::Bench(a) => run_bench(a, &settings),
        Command::Oracle(a) => run_oracle(a, &settings),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

/// Flag value, else settings-file value, else default.
fn resolve<T: std::str::FromStr + Clone>(
    flag: &Option<T>,
    settings: &Settings,
    key: &str,
    default: Option<T>,
) -> Result<T, CliError> {
    if let Some(v) = flag {
        return Ok(v.clone());
    }
    if let Some(v) = settings.get_parsed::<T>(key)? {
        return Ok(v);
    }
    default.ok_or_else(|| CliError::Usage(format!("missing required value for {key}")))
}

fn resolve_opt<T: std::str::FromStr + Clone>(
    flag: &Option<T>,
    settings: &Settings,
    key: &str,
) -> Result<Option<T>, CliError> {
    if let Some(v) = flag {
        return Ok(Some(v.clone()));
    }
    Ok(settings.get_parsed::<T>(key)?)
}

fn parse_loss(name: &str) -> Result<LossModel, CliError> {
    match name {
        "square" => Ok(LossModel::Square),
        "logistic" => Ok(LossModel::Logistic),
        other => {
            if let Some(g) = other.strip_prefix("huber:") {
                let gamma: f64 = g
                    .parse()
                    .map_err(|_| CliError::Usage(format!("invalid huber gamma {g:?}")))?;
                Ok(LossModel::huber(gamma)?)
            } else {
                Err(CliError::Usage(format!("unknown loss {name:?}")))
            }
        }
    }
}

fn hyperparams(
    lambda0: &Option<f64>,
    lambda1: &Option<f64>,
    lambda2: &Option<f64>,
    settings: &Settings,
) -> Result<Hyperparams, CliError> {
    let l0 = resolve(lambda0, settings, "lambda0", Some(0.0))?;
    let l1 = resolve(lambda1, settings, "lambda1", Some(0.0))?;
    let l2 = resolve(lambda2, settings, "lambda2", Some(0.0))?;
    Ok(Hyperparams::new(l0, l1, l2)?)
}

fn run_generate(a: GenerateArgs, settings: &Settings) -> Result<(), CliError> {
    let spec = SyntheticSpec {
        support_fraction: resolve(&a.support_fraction, settings, "support_fraction", Some(0.03))?,
        ..SyntheticSpec::new(
            resolve(&a.n, settings, "n", None)?,
            resolve(&a.p, settings, "p", None)?,
            resolve(&a.rho, settings, "rho", Some(0.0))?,
            resolve(&a.snr, settings, "snr", Some(5.0))?,
            resolve(&a.seed, settings, "seed", Some(0))?,
        )?
    };
    let output: PathBuf = resolve(&a.output, settings, "output", None)?;
    let (data, beta) = data::generate_synthetic(&spec)?;
    data::write_libsvm(&output, &data, Some(&beta), Some(&spec))?;
    println!(
        "wrote {} samples x {} features to {} (support {})",
        data.n(),
        data.p(),
        output.display(),
        beta.iter().filter(|b| **b != 0.0).count()
    );
    Ok(())
}

fn inner_config(
    omega: &Option<f64>,
    eps: &Option<f64>,
    zeta: &Option<f64>,
    max_iters: Option<usize>,
    settings: &Settings,
) -> Result<InnerConfig, CliError> {
    let defaults = InnerConfig::default();
    let omega = resolve_opt(omega, settings, "omega")?;
    Ok(InnerConfig {
        step_schedule: match omega {
            Some(w) => StepSchedule::Fixed(w),
            None => defaults.step_schedule,
        },
        gap_tol: resolve(eps, settings, "eps", Some(defaults.gap_tol))?,
        gap_change_tol: resolve(zeta, settings, "zeta", Some(defaults.gap_change_tol))?,
        max_iters: resolve(&max_iters, settings, "max_iters", Some(defaults.max_iters))?,
        ..defaults
    })
}

fn run_solve(a: SolveArgs, settings: &Settings) -> Result<(), CliError> {
    let input: PathBuf = resolve(&a.input, settings, "input", None)?;
    let data = data::load_libsvm(&input, None)?;
    let hp = hyperparams(&a.lambda0, &a.lambda1, &a.lambda2, settings)?;
    let loss = parse_loss(&resolve(&a.loss, settings, "loss", Some("square".to_string()))?)?;
    let solver: SolverKind = resolve(&a.solver, settings, "solver", Some("PrimDual".to_string()))?
        .parse()
        .map_err(CliError::Usage)?;
    let inner = inner_config(&a.omega, &a.eps, &a.zeta, a.max_iters, settings)?;

    let start = Instant::now();
    let (beta, gap, primal, trace): (Vec<f64>, f64, f64, Vec<(usize, f64, f64)>) = match solver {
        SolverKind::PrimDual => {
            let config = OuterConfig {
                inner,
                global_gap_tol: resolve(&a.xi, settings, "xi", Some(1e-6))?,
                add_c: resolve(&a.c, settings, "c", Some(4.0))?,
                normalize_columns: a.normalize,
                ..OuterConfig::default()
            };
            let r = outer::solve(&data, &hp, loss, &config)?;
            let trace = r
                .trace
                .iter()
                .enumerate()
                .map(|(i, t)| (i + 1, t.gap, t.primal))
                .collect();
            (r.beta, r.gap, r.primal_value, trace)
        }
        SolverKind::DualAst => {
            let config = InnerConfig {
                record_trace: a.trace_output.is_some(),
                ..inner
            };
            let r = baselines::dual_ascent_solve(&data, &hp, loss, &config)?;
            let primal = dual::primal_objective(&r.beta, &data, &hp, loss)?;
            let trace = r
                .trace
                .iter()
                .map(|t| (t.iteration, t.gap, t.primal))
                .collect();
            (r.beta, r.gap, primal, trace)
        }
        SolverKind::Cd => {
            if loss != LossModel::Square {
                return Err(CliError::Usage(
                    "the CD solver supports the square loss only".into(),
                ));
            }
            let r = baselines::cd_solve(&data, &hp, &CdConfig::default())?;
            (r.beta, r.gap.unwrap_or(f64::NAN), r.primal_value, vec![])
        }
    };
    let elapsed = start.elapsed().as_secs_f64();

    let nnz = beta.iter().filter(|b| **b != 0.0).count();
    println!("solver:    {}", solver.as_str());
    println!("objective: {primal:.9e}");
    println!("gap:       {gap:.9e}");
    println!("nnz:       {nnz}");
    println!("time_s:    {elapsed:.6}");

    if let Some(path) = &a.beta_output {
        let mut out = String::new();
        for b in &beta {
            writeln!(out, "{b}").unwrap();
        }
        std::fs::write(path, out)?;
    }
    if let Some(path) = &a.trace_output {
        let mut out = String::from("step,gap,primal\n");
        for (step, gap, primal) in &trace {
            writeln!(out, "{step},{gap:.9e},{primal:.9e}").unwrap();
        }
        std::fs::write(path, out)?;
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|tok| tok.trim())
        .filter(|tok| !tok.is_empty())
        .map(|tok| {
            tok.parse()
                .map_err(|_| CliError::Usage(format!("invalid {what} entry {tok:?}")))
        })
        .collect()
}

fn run_bench(a: BenchArgs, settings: &Settings) -> Result<(), CliError> {
    let n_values = parse_list::<usize>(&resolve(&a.n, settings, "n", None)?, "n")?;
    let snr_list = parse_list::<f64>(&resolve(&a.snr, settings, "snr", Some("5".into()))?, "snr")?;
    let hp = hyperparams(&a.lambda0, &a.lambda1, &a.lambda2, settings)?;
    let solvers: Vec<SolverKind> = parse_list::<String>(
        &resolve(
            &a.solvers,
            settings,
            "solvers",
            Some("PrimDual,DualAst,CD".into()),
        )?,
        "solver",
    )?
    .iter()
    .map(|s| s.parse().map_err(CliError::Usage))
    .collect::<Result<_, _>>()?;
    let output: PathBuf = resolve(&a.output, settings, "output", None)?;

    let inner = inner_config(&a.omega, &a.eps, &a.zeta, None, settings)?;
    let mut config = ExperimentConfig::new(
        n_values,
        resolve(&a.p, settings, "p", None)?,
        resolve(&a.rho, settings, "rho", Some(0.4))?,
        snr_list.into_iter().map(|s| (s, hp)).collect(),
        solvers,
        resolve(&a.replicates, settings, "replicates", Some(10))?,
        resolve(&a.seed, settings, "seed", Some(0))?,
    )?;
    config.support_fraction =
        resolve(&a.support_fraction, settings, "support_fraction", Some(0.03))?;
    config.outer.inner = inner;
    config.outer.add_c = resolve(&a.c, settings, "c", Some(4.0))?;
    config.dual_ast = inner;
    config.record_time = !a.no_time;
    config.standardize =
        a.standardize || settings.get_parsed::<bool>("standardize")?.unwrap_or(false);

    let rows = bench::run_experiment(&config)?;
    std::fs::write(&output, bench::to_csv(&rows))?;
    println!("wrote {} rows to {}", rows.len(), output.display());
    Ok(())
}

fn run_oracle(a: OracleArgs, settings: &Settings) -> Result<(), CliError> {
    let input: PathBuf = resolve(&a.input, settings, "input", None)?;
    let data = data::load_libsvm(&input, None)?;
    let hp = hyperparams(&a.lambda0, &a.lambda1, &a.lambda2, settings)?;
    let r = baselines::oracle_solve(&data, &hp)?;
    println!("objective: {:.9e}", r.objective);
    println!("support:   {:?}", r.support);
    println!("supports_evaluated: {}", r.supports_evaluated);
    if let Some(path) = &a.beta {
        let candidate = data::load_beta(path)?;
        let obj = dual::primal_objective(&candidate, &data, &hp, LossModel::Square)?;
        let cand_support: Vec<usize> = candidate
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, _)| j)
            .collect();
        println!("candidate_objective: {obj:.9e}");
        println!("candidate_support_match: {}", cand_support == r.support);
    }
    Ok(())
}
