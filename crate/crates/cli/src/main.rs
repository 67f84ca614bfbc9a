//! Command-line interface for the driftless SDE toolkit.
//!
//! Exit codes: 0 success, 2 configuration/validation failure, 3 numeric
//! failure during a run.

mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{
    parse_base, BumpSpec, CantorConfig, ClassifyConfig, DensityConfig, FamilySpec, OutputFormat,
    RatesConfig, RegimeSpec, ResidualConfig, RunConfig, SimulateConfig,
};
use driftless::{
    classify_boundary, default_test_set, density_estimate, mc_estimate, mc_samples,
    run_rate_experiment, theoretical_bound, weak_residual, BoundParams, CantorFunction,
    DiffusionSpec, FellerConfig, RateFit, Regime, SamplingPlan, SimConfig, Statistic,
    TestFunction,
};
use output::{csv_header, emit, json_document, num, opt_num};

const PRESETS: &[(&str, &str)] = &[
    (
        "thm1.2-holder-half",
        include_str!("../presets/thm1.2-holder-half.json"),
    ),
    (
        "thm1.2-holder-one",
        include_str!("../presets/thm1.2-holder-one.json"),
    ),
    ("thm1.3-nlg", include_str!("../presets/thm1.3-nlg.json")),
    ("cor1.4-cantor", include_str!("../presets/cor1.4-cantor.json")),
    (
        "cor1.5-cantor-eps",
        include_str!("../presets/cor1.5-cantor-eps.json"),
    ),
    ("sec6-density", include_str!("../presets/sec6-density.json")),
];

#[derive(Parser)]
#[command(
    name = "driftless",
    about = "Boundary classification, stability-rate experiments and density \
             checks for driftless SDEs dX = σ(X) dB",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct CommonOverrides {
    /// JSON run-config file; flags override its fields.
    #[arg(long)]
    config: Option<String>,
    /// Master seed override (also: env DRIFTLESS_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker-count hint; results are invariant to it
    /// (also: env DRIFTLESS_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
    /// Monte Carlo path-count override.
    #[arg(long)]
    paths: Option<usize>,
    /// Time-grid steps override.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Feller boundary classification at 0 with the uniqueness predicate.
    Classify {
        #[command(flatten)]
        common: CommonOverrides,
        /// Coefficient as JSON, e.g. '{"kind":"power_law","params":{"alpha":0.5}}'.
        #[arg(long)]
        sigma: Option<String>,
        /// Upper integration limit c.
        #[arg(long)]
        c: Option<f64>,
        /// Declare σ monotone with σ² > 0 on (0, ∞).
        #[arg(long)]
        monotone: bool,
        /// Declare σ(0) = 0.
        #[arg(long = "sigma-zero-is-zero")]
        sigma_zero_is_zero: bool,
        /// JSON report path (stdout when omitted).
        #[arg(long)]
        out: Option<String>,
        /// CSV destination for the per-x integral table.
        #[arg(long)]
        diagnostics_csv: Option<String>,
    },
    /// Cantor iterate convergence table against the exact fixed point.
    Cantor {
        #[command(flatten)]
        common: CommonOverrides,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        n_max: Option<u32>,
        /// Seed function: zero | identity.
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        out: Option<String>,
        /// csv | json.
        #[arg(long)]
        format: Option<String>,
    },
    /// Coupled Euler-Maruyama Monte Carlo for a coefficient pair.
    Simulate {
        #[command(flatten)]
        common: CommonOverrides,
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long = "sigma-n")]
        sigma_n: Option<String>,
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long = "T")]
        t_horizon: Option<f64>,
        /// mean_sup | mean_sup_squared | mean_abs_terminal.
        #[arg(long)]
        statistic: Option<String>,
        #[arg(long)]
        out: Option<String>,
        /// csv | json.
        #[arg(long)]
        format: Option<String>,
    },
    /// Strong-convergence rate experiment for an approximation family.
    Rates {
        #[command(flatten)]
        common: CommonOverrides,
        /// Named preset (see --list-presets).
        #[arg(long)]
        preset: Option<String>,
        /// List shipped presets and exit.
        #[arg(long)]
        list_presets: bool,
        #[arg(long)]
        out_csv: Option<String>,
        #[arg(long)]
        out_json: Option<String>,
    },
    /// Kernel density of X(t) with the absorbed-mass atom.
    Density {
        #[command(flatten)]
        common: CommonOverrides,
        /// Named preset (sec6-density).
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        out_csv: Option<String>,
        #[arg(long)]
        out_json: Option<String>,
    },
    /// Weak-form Fokker-Planck residual report.
    Residual {
        #[command(flatten)]
        common: CommonOverrides,
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(AppError::Validation(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(AppError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            3
        }
    };
    std::process::exit(code);
}

enum AppError {
    Validation(String),
    Numeric(String),
}

impl From<driftless::Error> for AppError {
    fn from(e: driftless::Error) -> Self {
        match e {
            driftless::Error::Config(_)
            | driftless::Error::InvalidParameter(_)
            | driftless::Error::EmptyGrid => AppError::Validation(e.to_string()),
            other => AppError::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Validation(format!("io: {e}"))
    }
}

fn validation(msg: impl Into<String>) -> AppError {
    AppError::Validation(msg.into())
}

fn load_config_file(path: &str) -> Result<RunConfig, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| validation(format!("cannot read config '{path}': {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| validation(format!("config '{path}' is invalid: {e}")))
}

fn load_preset(name: &str) -> Result<RunConfig, AppError> {
    let text = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            validation(format!(
                "unknown preset '{name}'; shipped presets: {}",
                PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
            ))
        })?;
    serde_json::from_str(text).map_err(|e| validation(format!("preset '{name}' is invalid: {e}")))
}

fn parse_spec(json: &str) -> Result<DiffusionSpec, AppError> {
    serde_json::from_str(json).map_err(|e| validation(format!("bad coefficient JSON: {e}")))
}

fn parse_statistic(name: &str) -> Result<Statistic, AppError> {
    match name {
        "mean_sup" => Ok(Statistic::MeanSup),
        "mean_sup_squared" => Ok(Statistic::MeanSupSquared),
        "mean_abs_terminal" => Ok(Statistic::MeanAbsTerminal),
        other => Err(validation(format!("unknown statistic '{other}'"))),
    }
}

fn parse_format(name: &str) -> Result<OutputFormat, AppError> {
    match name {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => Err(validation(format!("unknown format '{other}' (csv|json)"))),
    }
}

/// Applies seed/worker env overrides and the common CLI overrides, then runs
/// inside a worker pool of the configured size.
fn finish(mut cfg: RunConfig, common: &CommonOverrides) -> Result<(), AppError> {
    if let Some(seed) = common.seed {
        *cfg.seed_mut() = seed;
    }
    if let Ok(seed) = std::env::var("DRIFTLESS_SEED") {
        *cfg.seed_mut() = seed
            .parse()
            .map_err(|_| validation(format!("DRIFTLESS_SEED='{seed}' is not an integer")))?;
    }
    if let Some(w) = common.workers {
        *cfg.workers_mut() = w;
    }
    if let Ok(w) = std::env::var("DRIFTLESS_WORKERS") {
        *cfg.workers_mut() = w
            .parse()
            .map_err(|_| validation(format!("DRIFTLESS_WORKERS='{w}' is not an integer")))?;
    }
    apply_budget_overrides(&mut cfg, common);
    let workers = cfg.workers();
    if workers == 0 {
        execute(&cfg)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| validation(e.to_string()))?;
        pool.install(|| execute(&cfg))
    }
}

fn apply_budget_overrides(cfg: &mut RunConfig, common: &CommonOverrides) {
    match cfg {
        RunConfig::Simulate(c) => {
            if let Some(p) = common.paths {
                c.paths = p;
            }
            if let Some(s) = common.steps {
                c.steps = s;
            }
        }
        RunConfig::Rates(c) => {
            if let Some(p) = common.paths {
                c.paths = p;
            }
            if let Some(s) = common.steps {
                c.steps = Some(s);
            }
        }
        RunConfig::Density(c) => {
            if let Some(p) = common.paths {
                c.paths = p;
            }
            if let Some(s) = common.steps {
                c.steps = s;
            }
        }
        RunConfig::Residual(c) => {
            if let Some(p) = common.paths {
                c.paths = p;
            }
            if let Some(s) = common.steps {
                c.steps = s;
            }
        }
        RunConfig::Classify(_) | RunConfig::Cantor(_) => {}
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Classify {
            common,
            sigma,
            c,
            monotone,
            sigma_zero_is_zero,
            out,
            diagnostics_csv,
        } => {
            let mut cfg = match &common.config {
                Some(path) => match load_config_file(path)? {
                    RunConfig::Classify(c) => c,
                    _ => return Err(validation("config file is not a classify config")),
                },
                None => ClassifyConfig {
                    sigma: parse_spec(
                        sigma
                            .as_deref()
                            .ok_or_else(|| validation("--sigma or --config is required"))?,
                    )?,
                    c: 0.5,
                    monotone: false,
                    sigma_zero_is_zero: false,
                    output: None,
                    diagnostics_csv: None,
                    seed: 0,
                    worker_count: 0,
                },
            };
            if common.config.is_some() {
                if let Some(s) = sigma.as_deref() {
                    cfg.sigma = parse_spec(s)?;
                }
            }
            if let Some(c) = c {
                cfg.c = c;
            }
            cfg.monotone |= monotone;
            cfg.sigma_zero_is_zero |= sigma_zero_is_zero;
            if out.is_some() {
                cfg.output = out;
            }
            if diagnostics_csv.is_some() {
                cfg.diagnostics_csv = diagnostics_csv;
            }
            finish(RunConfig::Classify(cfg), &common)
        }
        Command::Cantor {
            common,
            lambda,
            n_max,
            base,
            out,
            format,
        } => {
            let mut cfg = match &common.config {
                Some(path) => match load_config_file(path)? {
                    RunConfig::Cantor(c) => c,
                    _ => return Err(validation("config file is not a cantor config")),
                },
                None => CantorConfig {
                    lambda: lambda.ok_or_else(|| validation("--lambda or --config required"))?,
                    n_max: 12,
                    base: "zero".into(),
                    grid_points: (1 << 17) + 1,
                    output: None,
                    format: OutputFormat::Json,
                    seed: 0,
                    worker_count: 0,
                },
            };
            if let Some(l) = lambda {
                cfg.lambda = l;
            }
            if let Some(n) = n_max {
                cfg.n_max = n;
            }
            if let Some(b) = base {
                cfg.base = b;
            }
            if out.is_some() {
                cfg.output = out;
            }
            if let Some(f) = format.as_deref() {
                cfg.format = parse_format(f)?;
            }
            finish(RunConfig::Cantor(cfg), &common)
        }
        Command::Simulate {
            common,
            sigma,
            sigma_n,
            x0,
            t_horizon,
            statistic,
            out,
            format,
        } => {
            let mut cfg = match &common.config {
                Some(path) => match load_config_file(path)? {
                    RunConfig::Simulate(c) => c,
                    _ => return Err(validation("config file is not a simulate config")),
                },
                None => SimulateConfig {
                    sigma: parse_spec(
                        sigma
                            .as_deref()
                            .ok_or_else(|| validation("--sigma or --config is required"))?,
                    )?,
                    sigma_n: None,
                    x0: x0.ok_or_else(|| validation("--x0 or --config is required"))?,
                    t_horizon: 1.0,
                    steps: 1_000,
                    paths: 10_000,
                    seed: 0,
                    absorb_at_zero: None,
                    statistic: Statistic::MeanSup,
                    output: None,
                    format: OutputFormat::Csv,
                    worker_count: 0,
                },
            };
            if common.config.is_some() {
                if let Some(s) = sigma.as_deref() {
                    cfg.sigma = parse_spec(s)?;
                }
                if let Some(x) = x0 {
                    cfg.x0 = x;
                }
            }
            if let Some(s) = sigma_n.as_deref() {
                cfg.sigma_n = Some(parse_spec(s)?);
            }
            if let Some(t) = t_horizon {
                cfg.t_horizon = t;
            }
            if let Some(s) = statistic.as_deref() {
                cfg.statistic = parse_statistic(s)?;
            }
            if out.is_some() {
                cfg.output = out;
            }
            if let Some(f) = format.as_deref() {
                cfg.format = parse_format(f)?;
            }
            finish(RunConfig::Simulate(cfg), &common)
        }
        Command::Rates {
            common,
            preset,
            list_presets,
            out_csv,
            out_json,
        } => {
            if list_presets {
                for (name, _) in PRESETS {
                    println!("{name}");
                }
                return Ok(());
            }
            let base = match (&preset, &common.config) {
                (Some(name), _) => load_preset(name)?,
                (None, Some(path)) => load_config_file(path)?,
                (None, None) => {
                    return Err(validation("rates needs --preset or --config"));
                }
            };
            let mut cfg = match base {
                RunConfig::Rates(c) => c,
                _ => return Err(validation("config is not a rates config")),
            };
            if out_csv.is_some() {
                cfg.output_csv = out_csv;
            }
            if out_json.is_some() {
                cfg.output_json = out_json;
            }
            finish(RunConfig::Rates(cfg), &common)
        }
        Command::Density {
            common,
            preset,
            out_csv,
            out_json,
        } => {
            let base = match (&preset, &common.config) {
                (Some(name), _) => load_preset(name)?,
                (None, Some(path)) => load_config_file(path)?,
                (None, None) => return Err(validation("density needs --preset or --config")),
            };
            let mut cfg = match base {
                RunConfig::Density(c) => c,
                _ => return Err(validation("config is not a density config")),
            };
            if out_csv.is_some() {
                cfg.output_csv = out_csv;
            }
            if out_json.is_some() {
                cfg.output_json = out_json;
            }
            finish(RunConfig::Density(cfg), &common)
        }
        Command::Residual { common, sigma, out } => {
            let mut cfg = match &common.config {
                Some(path) => match load_config_file(path)? {
                    RunConfig::Residual(c) => c,
                    _ => return Err(validation("config file is not a residual config")),
                },
                None => return Err(validation("residual needs --config")),
            };
            if let Some(s) = sigma.as_deref() {
                cfg.sigma = parse_spec(s)?;
            }
            if out.is_some() {
                cfg.output = out;
            }
            finish(RunConfig::Residual(cfg), &common)
        }
    }
}

fn execute(cfg: &RunConfig) -> Result<(), AppError> {
    match cfg {
        RunConfig::Classify(c) => run_classify(c),
        RunConfig::Cantor(c) => run_cantor(c),
        RunConfig::Simulate(c) => run_simulate(c),
        RunConfig::Rates(c) => run_rates(c),
        RunConfig::Density(c) => run_density(c),
        RunConfig::Residual(c) => run_residual(c),
    }
}

fn run_classify(cfg: &ClassifyConfig) -> Result<(), AppError> {
    let feller = FellerConfig::with_c(cfg.c);
    let report = classify_boundary(&cfg.sigma, &feller, cfg.monotone, cfg.sigma_zero_is_zero)?;
    if let Some(path) = &cfg.diagnostics_csv {
        let mut text = csv_header(cfg, "x,mu,nu");
        for row in &report.diagnostics {
            text.push_str(&format!(
                "{},{},{}\n",
                num(row.x),
                opt_num(row.mu),
                opt_num(row.nu)
            ));
        }
        output::write_atomic(path, &text)?;
    }
    let mut value = serde_json::to_value(&report).expect("report serializes");
    // the full per-x table lives in the CSV; keep the JSON compact
    value.as_object_mut().unwrap().remove("diagnostics");
    let doc = json_document(cfg, value);
    emit(&cfg.output, &format!("{doc:#}\n"))?;
    Ok(())
}

fn run_cantor(cfg: &CantorConfig) -> Result<(), AppError> {
    let base = parse_base(&cfg.base).map_err(validation)?;
    let exact = CantorFunction::exact(cfg.lambda)?;
    let plan = SamplingPlan {
        lo: 0.0,
        hi: 1.0,
        uniform_points: cfg.grid_points,
        breakpoints: Vec::new(),
    }
    .with_cantor_breakpoints(cfg.lambda, cfg.n_max.min(20) + 2);
    let points: Vec<f64> = plan.points().collect();
    let exact_vals: Vec<f64> = points.iter().map(|&x| exact.eval_unit(x)).collect();
    let c0 = CantorFunction::iterate(cfg.lambda, 0, base.clone())?;
    let c1 = CantorFunction::iterate(cfg.lambda, 1, base.clone())?;
    let sup01 = points
        .iter()
        .map(|&x| (c0.eval_unit(x) - c1.eval_unit(x)).abs())
        .fold(0.0f64, f64::max);
    let mut rows = Vec::new();
    for n in 1..=cfg.n_max {
        let cn = CantorFunction::iterate(cfg.lambda, n, base.clone())?;
        let measured = points
            .iter()
            .zip(&exact_vals)
            .map(|(&x, &e)| (cn.eval_unit(x) - e).abs())
            .fold(0.0f64, f64::max);
        rows.push((
            n,
            measured,
            driftless::iterate_error_bound(n, sup01)?,
            (2.0f64).powi(2 - n as i32),
        ));
    }
    let h_lambda = driftless::holder_lambda(cfg.lambda)?;
    match cfg.format {
        OutputFormat::Csv => {
            let mut text = csv_header(cfg, "n,sup_distance,tail_bound,intro_bound");
            for (n, m, b1, b2) in &rows {
                text.push_str(&format!("{n},{},{},{}\n", num(*m), num(*b1), num(*b2)));
            }
            emit(&cfg.output, &text)?;
        }
        OutputFormat::Json => {
            let doc = json_document(
                cfg,
                serde_json::json!({
                    "lambda": cfg.lambda,
                    "holder_exponent": h_lambda.value,
                    "sup01": sup01,
                    "rows": rows
                        .iter()
                        .map(|(n, m, b1, b2)| {
                            serde_json::json!({
                                "n": n,
                                "sup_distance": m,
                                "tail_bound": b1,
                                "intro_bound": b2,
                            })
                        })
                        .collect::<Vec<_>>(),
                }),
            );
            emit(&cfg.output, &format!("{doc:#}\n"))?;
        }
    }
    Ok(())
}

fn sim_config(
    x0: f64,
    t_horizon: f64,
    steps: usize,
    paths: usize,
    seed: u64,
    absorb: Option<bool>,
    sigma: &DiffusionSpec,
) -> SimConfig {
    SimConfig {
        x0,
        t_horizon,
        steps,
        paths,
        seed,
        absorb_at_zero: absorb.unwrap_or_else(|| SimConfig::default_absorption(sigma)),
    }
}

fn run_simulate(cfg: &SimulateConfig) -> Result<(), AppError> {
    let sigma_n = cfg.sigma_n.clone().unwrap_or_else(|| cfg.sigma.clone());
    let sim = sim_config(
        cfg.x0,
        cfg.t_horizon,
        cfg.steps,
        cfg.paths,
        cfg.seed,
        cfg.absorb_at_zero,
        &cfg.sigma,
    );
    match cfg.format {
        OutputFormat::Csv => {
            let samples = mc_samples(&cfg.sigma, &sigma_n, &sim)?;
            let mut text = csv_header(
                cfg,
                "path_index,sup_error,terminal_error,absorption_time_X,absorption_time_Xn",
            );
            for s in &samples {
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.path_index,
                    num(s.sup_error),
                    num(s.terminal_error),
                    opt_num(s.absorption_time_x),
                    opt_num(s.absorption_time_xn)
                ));
            }
            emit(&cfg.output, &text)?;
        }
        OutputFormat::Json => {
            let estimate = mc_estimate(&cfg.sigma, &sigma_n, &sim, cfg.statistic)?;
            let doc = json_document(
                cfg,
                serde_json::json!({
                    "estimate": serde_json::to_value(estimate).unwrap(),
                    "absorb_at_zero": sim.absorb_at_zero,
                }),
            );
            emit(&cfg.output, &format!("{doc:#}\n"))?;
        }
    }
    Ok(())
}

fn build_family(spec: &FamilySpec) -> Result<Vec<driftless::RateProblem>, AppError> {
    Ok(match spec {
        FamilySpec::Constant { n_min, n_max } => driftless::constant_family(*n_min..=*n_max),
        FamilySpec::PowerLawShift {
            alpha,
            n_min,
            n_max,
        } => driftless::power_law_shift_family(*alpha, *n_min..=*n_max)?,
        FamilySpec::Cantor {
            lambda,
            epsilon,
            base,
            n_min,
            n_max,
        } => driftless::cantor_family(
            *lambda,
            *epsilon,
            parse_base(base).map_err(validation)?,
            *n_min..=*n_max,
        )?,
    })
}

fn build_regime(spec: &RegimeSpec) -> Regime {
    match *spec {
        RegimeSpec::HolderHalf => Regime::HolderHalf,
        RegimeSpec::HolderAbove { h } => Regime::HolderAbove { h },
        RegimeSpec::NlgZero { epsilon } => Regime::NlgZero { epsilon },
        RegimeSpec::NlgPositive { h, epsilon } => Regime::NlgPositive { h, epsilon },
    }
}

fn run_rates(cfg: &RatesConfig) -> Result<(), AppError> {
    let family = build_family(&cfg.family)?;
    let bound = theoretical_bound(
        build_regime(&cfg.regime),
        cfg.t_horizon,
        BoundParams {
            c_h: cfg.bound_params.c_h,
            sigma_sup: cfg.bound_params.sigma_sup,
            c_l: cfg.bound_params.c_l,
            f_sup: cfg.bound_params.f_sup,
        },
    )?;
    let plan = match (&cfg.grid, &cfg.family) {
        (Some(g), FamilySpec::Cantor { lambda, .. }) => {
            SamplingPlan::uniform(g.lo, g.hi, g.points).with_cantor_breakpoints(*lambda, 14)
        }
        (Some(g), _) => SamplingPlan::uniform(g.lo, g.hi, g.points),
        (None, FamilySpec::Cantor { lambda, .. }) => {
            SamplingPlan::dense(0.0, 1.0).with_cantor_breakpoints(*lambda, 14)
        }
        (None, _) => SamplingPlan::dense(-4.0, 4.0),
    };
    // steps from the h^(1/2) rule when not pinned
    let steps = match cfg.steps {
        Some(s) => s,
        None => {
            let mut min_delta = f64::INFINITY;
            for p in &family {
                min_delta = min_delta.min(driftless::sup_distance(&p.sigma, &p.sigma_n, &plan)?);
            }
            if !(min_delta > 0.0) {
                return Err(validation("family has Δ = 0; cannot size the time grid"));
            }
            (100.0 * cfg.t_horizon / (min_delta * min_delta)).ceil() as usize + 1
        }
    };
    let sigma0 = &family[0].sigma;
    let sim = sim_config(
        cfg.x0,
        cfg.t_horizon,
        steps,
        cfg.paths,
        cfg.seed,
        cfg.absorb_at_zero,
        sigma0,
    );
    let result = run_rate_experiment(&family, &sim, &bound, cfg.statistic, &plan)?;

    let exponent = bound.exponent();
    let nonincreasing = result.errors_nonincreasing(2.0);
    let (slope, slope_stderr, log_constant, log_residual, pass) = match &result.fit {
        RateFit::PowerLaw(f) => {
            let pass = nonincreasing
                && match exponent {
                    Some(e) => f.slope >= e - 0.1,
                    None => true,
                };
            (Some(f.slope), Some(f.slope_stderr), None, None, pass)
        }
        RateFit::LogForm(f) => {
            let pass = nonincreasing && f.constant > 0.0 && f.rel_residual < 0.2;
            (None, None, Some(f.constant), Some(f.rel_residual), pass)
        }
    };

    if let Some(path) = &cfg.output_csv {
        let mut text = csv_header(cfg, "n,delta,error,stderr,bound");
        for p in &result.points {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                p.n,
                num(p.delta),
                num(p.error),
                num(p.stderr),
                num(p.bound)
            ));
        }
        output::write_atomic(path, &text)?;
    }
    let summary = serde_json::json!({
        "slope": slope,
        "slope_stderr": slope_stderr,
        "log_form_constant": log_constant,
        "log_form_residual": log_residual,
        "regime": serde_json::to_value(result.bound.regime).unwrap(),
        "theoretical_exponent": exponent,
        "errors_nonincreasing": nonincreasing,
        "h_rule_satisfied": result.h_rule_satisfied,
        "steps": steps,
        "pass": pass,
        "points": serde_json::to_value(&result.points).unwrap(),
    });
    emit(&cfg.output_json, &format!("{:#}\n", json_document(cfg, summary)))?;
    Ok(())
}

fn run_density(cfg: &DensityConfig) -> Result<(), AppError> {
    let sim = sim_config(
        cfg.x0,
        cfg.t_horizon,
        cfg.steps,
        cfg.paths,
        cfg.seed,
        cfg.absorb_at_zero,
        &cfg.sigma,
    );
    if cfg.grid.points < 2 {
        return Err(validation("density grid needs at least 2 points"));
    }
    let grid: Vec<f64> = (0..cfg.grid.points)
        .map(|i| {
            cfg.grid.lo + (cfg.grid.hi - cfg.grid.lo) * i as f64 / (cfg.grid.points - 1) as f64
        })
        .collect();
    let t = cfg.t.unwrap_or(cfg.t_horizon);
    let est = density_estimate(&cfg.sigma, &sim, t, &grid, cfg.bandwidth)?;
    if let Some(path) = &cfg.output_csv {
        let mut text = csv_header(cfg, "y,p_hat");
        for (y, v) in est.grid.iter().zip(&est.values) {
            text.push_str(&format!("{},{}\n", num(*y), num(*v)));
        }
        output::write_atomic(path, &text)?;
    }
    let doc = json_document(
        cfg,
        serde_json::json!({
            "atom_at_zero": est.atom_at_zero,
            "bandwidth": est.bandwidth,
            "paths": est.paths,
            "t": est.t,
            "mass_balance": est.mass_balance(),
        }),
    );
    emit(&cfg.output_json, &format!("{doc:#}\n"))?;
    Ok(())
}

fn run_residual(cfg: &ResidualConfig) -> Result<(), AppError> {
    let sim = sim_config(
        cfg.x0,
        cfg.t_horizon,
        cfg.steps,
        cfg.paths,
        cfg.seed,
        cfg.absorb_at_zero,
        &cfg.sigma,
    );
    let test_set: Vec<TestFunction> = match &cfg.test_functions {
        Some(bumps) => bumps
            .iter()
            .map(|BumpSpec { center, radius }| TestFunction::bump(*center, *radius))
            .collect::<driftless::Result<_>>()?,
        None => default_test_set(cfg.x0),
    };
    let report = weak_residual(&cfg.sigma, &sim, cfg.t, cfg.dt, &test_set, cfg.tolerance_floor)?;
    let doc = json_document(cfg, serde_json::to_value(&report).unwrap());
    emit(&cfg.output, &format!("{doc:#}\n"))?;
    Ok(())
}
