//! spikeglass: thresholds and desk-scale simulations for spiked Gaussian
//! p-tensors.
//!
//! Exit codes: 0 success, 1 domain error or failed validation, 2 resource
//! limit.

mod config;
mod output;

use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{parse_grid, RunConfig};
use output::{write_meta, write_table, Table};
use spikeglass_core as core;
use spikeglass_core::{Error as CoreError, SolveMethod, SolverOptions, ValidateLevel};

#[derive(Parser)]
#[command(
    name = "spikeglass",
    version,
    about = "Critical detection thresholds and p-spin simulations for spiked Gaussian tensors"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the critical SNR beta_c for one or more priors
    Threshold(CommonArgs),
    /// Threshold sweep over (p, rho) with the sparse Rademacher prior
    Sweep(CommonArgs),
    /// Evaluate gamma_b(s) on an s-grid
    Gamma(CommonArgs),
    /// Exact free-energy samples over independent disorders
    #[command(name = "simulate-fe")]
    SimulateFe(CommonArgs),
    /// Total-variation distance estimates between noise and spiked tensors
    Tv(CommonArgs),
    /// Likelihood-ratio detection error rates
    Detect(CommonArgs),
    /// Free-energy fluctuation and overlap-moment scaling in N
    Scaling(CommonArgs),
    /// Exact posterior minimum mean square error against the dummy baseline
    Mmse(CommonArgs),
    /// Nishimori identity residuals
    Nishimori(CommonArgs),
    /// Run the invariant self-check suite
    Validate(CommonArgs),
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Threshold(_) => "threshold",
            Cmd::Sweep(_) => "sweep",
            Cmd::Gamma(_) => "gamma",
            Cmd::SimulateFe(_) => "simulate-fe",
            Cmd::Tv(_) => "tv",
            Cmd::Detect(_) => "detect",
            Cmd::Scaling(_) => "scaling",
            Cmd::Mmse(_) => "mmse",
            Cmd::Nishimori(_) => "nishimori",
            Cmd::Validate(_) => "validate",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Cmd::Threshold(a)
            | Cmd::Sweep(a)
            | Cmd::Gamma(a)
            | Cmd::SimulateFe(a)
            | Cmd::Tv(a)
            | Cmd::Detect(a)
            | Cmd::Scaling(a)
            | Cmd::Mmse(a)
            | Cmd::Nishimori(a)
            | Cmd::Validate(a) => a,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file mirroring the flag names; flags override it
    #[arg(long)]
    config: Option<String>,
    /// Built-in prior spec: `rademacher` or `sparse:<rho>`; comma-separate
    /// for multiple spike components
    #[arg(long)]
    prior: Option<String>,
    /// JSON prior file: {"label": str, "atoms": [[point, weight], ...]}
    #[arg(long)]
    prior_file: Option<String>,
    /// Tensor power p
    #[arg(long)]
    p: Option<u32>,
    /// Comma-separated p values for sweeps
    #[arg(long, value_delimiter = ',')]
    p_list: Option<Vec<u32>>,
    /// System size N
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated N values for scans
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Single SNR (expands to every spike component)
    #[arg(long)]
    beta: Option<f64>,
    /// Comma-separated SNR vector, one entry per spike component
    #[arg(long, value_delimiter = ',')]
    beta_bar: Option<Vec<f64>>,
    /// SNR grid lo:hi:step (tv)
    #[arg(long)]
    beta_grid: Option<String>,
    /// rho values: lo:hi:step or comma-separated (sweep)
    #[arg(long)]
    rho_list: Option<String>,
    /// s grid lo:hi:step (gamma)
    #[arg(long)]
    s_grid: Option<String>,
    /// Temperature argument b of gamma_b (gamma)
    #[arg(long)]
    b: Option<f64>,
    /// Gauss-Hermite order
    #[arg(long)]
    quad_order: Option<usize>,
    /// Effective-time convention: b_squared_xi_prime (default) or b_xi_prime
    #[arg(long)]
    convention: Option<String>,
    /// v-grid step for the sup over Gamma_b (default 0.001 * v_*)
    #[arg(long)]
    v_step: Option<f64>,
    /// Bisection bracket width
    #[arg(long)]
    b_tol: Option<f64>,
    /// Threshold method: bisection (default) or grid
    #[arg(long)]
    method: Option<String>,
    /// b-grid step for --method grid
    #[arg(long)]
    b_step: Option<f64>,
    /// Signal-scale parameter t in [0, 1] (mmse, nishimori)
    #[arg(long)]
    t: Option<f64>,
    /// t grid lo:hi:step (mmse, nishimori)
    #[arg(long)]
    t_grid: Option<String>,
    /// Finite-difference half-step for the derivative identity
    #[arg(long)]
    dt: Option<f64>,
    /// Monte Carlo replicas (disorder draws)
    #[arg(long)]
    replicas: Option<u64>,
    /// Detection trials
    #[arg(long)]
    trials: Option<u64>,
    /// Metropolis sweeps per chain
    #[arg(long)]
    sweeps: Option<u64>,
    /// Burn-in sweeps
    #[arg(long)]
    burn_in: Option<u64>,
    /// Validation level: fast or full
    #[arg(long)]
    level: Option<String>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on worker threads
    #[arg(long)]
    threads: Option<usize>,
    /// Output path (default <subcommand>.<format>)
    #[arg(long)]
    out: Option<String>,
    /// Output format: csv (default) or json
    #[arg(long)]
    format: Option<String>,
    /// Also export the spiked tensor for this run to the given path
    #[arg(long)]
    export_tensor: Option<String>,
}

struct CliError {
    message: String,
    code: i32,
}

impl CliError {
    fn domain(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError {
            code: if e.is_resource_limit() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::domain(format!("io error: {e}"))
    }
}

fn merge(cmd: &Cmd) -> Result<RunConfig, CliError> {
    let args = cmd.args();
    let mut cfg: RunConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::domain(format!("cannot read config `{path}`: {e}")))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::domain(format!("bad config `{path}`: {e}")))?
        }
        None => RunConfig::default(),
    };
    cfg.subcommand = cmd.name().to_string();

    macro_rules! overlay_option {
        ($($field:ident),* $(,)?) => {
            $(if let Some(v) = &args.$field { cfg.$field = Some(v.clone()); })*
        };
    }
    macro_rules! overlay_value {
        ($($field:ident),* $(,)?) => {
            $(if let Some(v) = &args.$field { cfg.$field = v.clone(); })*
        };
    }
    overlay_option!(prior, prior_file, beta, beta_grid, s_grid, t_grid, v_step, threads, out, export_tensor);
    overlay_value!(
        p, p_list, n, n_list, beta_bar, b, quad_order, convention, b_tol, method, b_step, t, dt,
        replicas, trials, sweeps, burn_in, level, seed, format,
    );
    if let Some(spec) = &args.rho_list {
        cfg.rho_list = if spec.contains(':') {
            parse_grid(spec).map_err(CliError::domain)?
        } else {
            spec.split(',')
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| CliError::domain(format!("bad rho `{s}` in --rho-list")))
                })
                .collect::<Result<_, _>>()?
        };
    }
    Ok(cfg)
}

fn solver_options(cfg: &RunConfig) -> Result<SolverOptions, CliError> {
    let method = match cfg.method.as_str() {
        "bisection" => SolveMethod::Bisection,
        "grid" => SolveMethod::Grid { b_step: cfg.b_step },
        other => {
            return Err(CliError::domain(format!(
                "unknown --method `{other}` (expected bisection or grid)"
            )))
        }
    };
    Ok(SolverOptions {
        v_step: cfg.v_step,
        b_tol: cfg.b_tol,
        quad_order: cfg.quad_order,
        convention: cfg.resolve_convention()?,
        method,
        ..SolverOptions::default()
    })
}

fn t_values(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    match &cfg.t_grid {
        Some(spec) => parse_grid(spec).map_err(CliError::domain),
        None => Ok(vec![cfg.t]),
    }
}

fn run_threshold(cfg: &RunConfig) -> Result<Table, CliError> {
    let priors = cfg.resolve_priors()?;
    let opts = solver_options(cfg)?;
    let results = core::multi_spike_region(&priors, cfg.p, &opts)?;
    let mut table = Table::new(
        cfg.seed,
        vec![
            "prior",
            "p",
            "beta_c",
            "bracket_lo",
            "bracket_hi",
            "v_grid_step",
            "b_tolerance",
            "sup_gamma_at_lo",
            "sup_gamma_at_hi",
            "convention",
            "quad_order",
        ],
    );
    for (prior, t) in priors.iter().zip(&results) {
        table.push(vec![
            prior.label().into(),
            cfg.p.into(),
            t.beta_c.into(),
            t.bracket_lo.into(),
            t.bracket_hi.into(),
            t.v_grid_step.into(),
            t.b_tolerance.into(),
            t.sup_gamma_at_lo.into(),
            t.sup_gamma_at_hi.into(),
            t.convention.as_str().into(),
            t.quad_order.into(),
        ]);
    }
    Ok(table)
}

fn run_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    let opts = solver_options(cfg)?;
    let result = core::sweep(&cfg.p_list, &cfg.rho_list, &opts);
    let mut table = Table::new(
        cfg.seed,
        vec!["p", "rho", "beta_c", "bracket_lo", "bracket_hi", "h_bound"],
    );
    for row in &result.rows {
        let (beta_c, lo, hi) = match &row.outcome {
            Ok(t) => (t.beta_c, t.bracket_lo, t.bracket_hi),
            Err(_) => (f64::NAN, f64::NAN, f64::NAN),
        };
        table.push(vec![
            row.p.into(),
            row.rho.into(),
            beta_c.into(),
            lo.into(),
            hi.into(),
            row.h_bound.into(),
        ]);
    }
    Ok(table)
}

fn run_gamma(cfg: &RunConfig) -> Result<Table, CliError> {
    let priors = cfg.resolve_priors()?;
    if priors.len() != 1 {
        return Err(CliError::domain("gamma expects a single prior"));
    }
    let grid = parse_grid(cfg.s_grid.as_deref().unwrap_or("0:1:0.01")).map_err(CliError::domain)?;
    let params = core::GammaParams::with_options(cfg.p, cfg.resolve_convention()?, cfg.quad_order)?;
    let rule = params.rule()?;
    let mut table = Table::new(cfg.seed, vec!["s", "gamma", "gamma_minus_s"]);
    for &s in &grid {
        let g = core::gamma(&priors[0], &params, cfg.b, s, &rule)?;
        table.push(vec![s.into(), g.into(), (g - s).into()]);
    }
    Ok(table)
}

fn run_simulate_fe(cfg: &RunConfig) -> Result<Table, CliError> {
    let priors = cfg.resolve_priors()?;
    let beta_bar = cfg.resolve_beta_bar(priors.len());
    let mut table = Table::new(
        cfg.seed,
        vec!["replica", "n", "p", "beta_bar", "method", "config_count", "value"],
    );
    let beta_label = beta_bar
        .iter()
        .map(|b| b.to_string())
        .collect::<Vec<_>>()
        .join(";");
    for rep in 0..cfg.replicas {
        let seed = core::rng::derive_seed(cfg.seed, core::rng::StreamPurpose::Replica, rep);
        let d = core::sample_disorder(cfg.n, cfg.p, seed)?;
        let sample = core::free_energy_exact(&d, &priors, &beta_bar)?;
        table.push(vec![
            rep.into(),
            cfg.n.into(),
            cfg.p.into(),
            beta_label.clone().into(),
            "exact_enumeration".into(),
            (sample.config_count.unwrap_or(0) as u64).into(),
            sample.value.into(),
        ]);
    }
    if let Some(path) = &cfg.export_tensor {
        let tensor = core::make_spiked_tensor(cfg.n, cfg.p, &priors, &beta_bar, cfg.seed)?;
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        tensor.write_to(&mut file)?;
    }
    Ok(table)
}

fn run_tv(cfg: &RunConfig) -> Result<Table, CliError> {
    let priors = cfg.resolve_priors()?;
    let betas: Vec<Vec<f64>> = match &cfg.beta_grid {
        Some(spec) => parse_grid(spec)
            .map_err(CliError::domain)?
            .into_iter()
            .map(|b| vec![b; priors.len()])
            .collect(),
        None => vec![cfg.resolve_beta_bar(priors.len())],
    };
    let n_list = if cfg.n_list.is_empty() { vec![cfg.n] } else { cfg.n_list.clone() };
    let mut table = Table::new(cfg.seed, vec!["n", "p", "beta", "replicas", "tv", "stderr"]);
    for &n in &n_list {
        let estimates = core::estimate_tv_multi(n, cfg.p, &priors, &betas, cfg.replicas, cfg.seed)?;
        for (bar, est) in betas.iter().zip(&estimates) {
            table.push(vec![
                n.into(),
                cfg.p.into(),
                bar[0].into(),
                cfg.replicas.into(),
                est.value.into(),
                est.stderr.into(),
            ]);
        }
    }
    Ok(table)
}

fn run_detect(cfg: &RunConfig) -> Result<Table, CliError> {
    let priors = cfg.resolve_priors()?;
    let beta_bar = cfg.resolve_beta_bar(priors.len());
    let n_list = if cfg.n_list.is_empty() { vec![cfg.n] } else { cfg.n_list.clone() };
    let mut table = Table::new(
        cfg.seed,
        vec!["n", "p", "beta", "trials", "type1", "type2", "total_error"],
    );
    for &n in &n_list {
        let report = core::detection_experiment(n, cfg.p, &priors, &beta_bar, cfg.trials, cfg.seed)?;
        table.push(vec![
            n.into(),
            cfg.p.into(),
            beta_bar[0].into(),
            report.trials.into(),
            report.type1.into(),
            report.type2.into(),
            report.total_error.into(),
        ]);
    }
    Ok(table)
}

fn run_scaling(cfg: &RunConfig) -> Result<Table, CliError> {
    let priors = cfg.resolve_priors()?;
    if priors.len() != 1 {
        return Err(CliError::domain("scaling expects a single prior"));
    }
    let beta = cfg.resolve_beta_bar(1)[0];
    let n_list = if cfg.n_list.is_empty() { vec![cfg.n] } else { cfg.n_list.clone() };
    let rows = core::fluctuation_scan(&n_list, cfg.p, &priors[0], beta, cfg.replicas, cfg.seed)?;
    let mut table = Table::new(
        cfg.seed,
        vec!["n", "p", "beta", "replicas", "mean_fn", "var_fn", "r2_mean", "r2_stderr"],
    );
    for row in &rows {
        let moment =
            core::overlap_moment_exact(row.n, cfg.p, &priors, &[beta], 1, cfg.replicas, cfg.seed)?;
        table.push(vec![
            row.n.into(),
            cfg.p.into(),
            beta.into(),
            row.replicas.into(),
            row.mean.into(),
            row.variance.into(),
            moment[0].value.into(),
            moment[0].stderr.into(),
        ]);
    }
    Ok(table)
}

fn run_mmse(cfg: &RunConfig) -> Result<Table, CliError> {
    let priors = cfg.resolve_priors()?;
    let beta_bar = cfg.resolve_beta_bar(priors.len());
    let mut table = Table::new(cfg.seed, vec!["t", "mmse", "stderr", "dmse"]);
    for t in t_values(cfg)? {
        let est = core::mmse_exact(cfg.n, cfg.p, &priors, &beta_bar, t, cfg.replicas, cfg.seed)?;
        table.push(vec![t.into(), est.mmse.into(), est.stderr.into(), est.dmse.into()]);
    }
    Ok(table)
}

fn run_nishimori(cfg: &RunConfig) -> Result<Table, CliError> {
    let priors = cfg.resolve_priors()?;
    let beta_bar = cfg.resolve_beta_bar(priors.len());
    let mut table = Table::new(cfg.seed, vec!["t", "lhs", "rhs", "z"]);
    for t in t_values(cfg)? {
        let report =
            core::nishimori_residual(cfg.n, cfg.p, &priors, &beta_bar, t, cfg.replicas, cfg.seed)?;
        table.push(vec![t.into(), report.lhs.into(), report.rhs.into(), report.z.into()]);
    }
    Ok(table)
}

fn run_validate(cfg: &RunConfig) -> Result<(Table, bool), CliError> {
    let level: ValidateLevel = cfg.level.parse().map_err(CliError::domain)?;
    let outcomes = core::run_suite(level, cfg.seed);
    let mut table = Table::new(cfg.seed, vec!["check", "status", "detail"]);
    let mut all_passed = true;
    for outcome in &outcomes {
        all_passed &= outcome.passed;
        table.push(vec![
            outcome.name.clone().into(),
            if outcome.passed { "pass" } else { "FAIL" }.into(),
            outcome.detail.clone().into(),
        ]);
        println!(
            "[{}] {}: {}",
            if outcome.passed { "pass" } else { "FAIL" },
            outcome.name,
            outcome.detail
        );
    }
    if !all_passed {
        let failed: Vec<&str> = outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| o.name.as_str())
            .collect();
        eprintln!("failed checks: {}", failed.join(", "));
    }
    Ok((table, all_passed))
}

fn dispatch(cmd: &Cmd, cfg: &RunConfig) -> Result<(Table, bool), CliError> {
    match cmd {
        Cmd::Threshold(_) => Ok((run_threshold(cfg)?, true)),
        Cmd::Sweep(_) => Ok((run_sweep(cfg)?, true)),
        Cmd::Gamma(_) => Ok((run_gamma(cfg)?, true)),
        Cmd::SimulateFe(_) => Ok((run_simulate_fe(cfg)?, true)),
        Cmd::Tv(_) => Ok((run_tv(cfg)?, true)),
        Cmd::Detect(_) => Ok((run_detect(cfg)?, true)),
        Cmd::Scaling(_) => Ok((run_scaling(cfg)?, true)),
        Cmd::Mmse(_) => Ok((run_mmse(cfg)?, true)),
        Cmd::Nishimori(_) => Ok((run_nishimori(cfg)?, true)),
        Cmd::Validate(_) => run_validate(cfg),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are not errors
            if e.use_stderr() {
                eprintln!("{e}");
                std::process::exit(1);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };

    let started = Instant::now();
    let cfg = match merge(&cli.command) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.code);
        }
    };
    if let Some(threads) = cfg.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    match dispatch(&cli.command, &cfg) {
        Ok((table, passed)) => {
            let out = cfg.out.clone().unwrap_or_else(|| {
                format!("{}.{}", cfg.subcommand, if cfg.format == "json" { "json" } else { "csv" })
            });
            if let Err(e) = write_table(&table, &out, &cfg.format)
                .and_then(|_| write_meta(&out, &cfg, started.elapsed().as_secs_f64()))
            {
                eprintln!("error: cannot write output: {e}");
                std::process::exit(1);
            }
            if !passed {
                std::process::exit(1);
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.code);
        }
    }
}
