//! `stargabor`: windows, transforms, spark checks, single recoveries and full
//! recovery sweeps from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use stargabor::harness::{
    find_preset, write_csv, write_metadata, write_plot, Preset, RunControl, X0Rule,
};
use stargabor::io::{
    read_complex_vector, read_real_vector, read_window, write_coefficients, write_real_vector,
    write_window,
};
use stargabor::spark::{
    deficiency_witness_search, spark_exhaustive, DEFAULT_RANK_TOL, EXHAUSTIVE_LIMIT,
};
use stargabor::{
    is_admissible_length, largest_admissible_at_most, load_audio, make_synthetic, make_window,
    mu_from_rule, run_experiment_with, solve_analysis_l1, star_window_with, AdmissibilityMode,
    AnalysisOperator, AudioOptions, EtaRule, ExperimentPlan, GaborParams, MeasurementOperator,
    NoiseModel, Signal, SolveConfig, StarWindowConfig, SyntheticKind, TrimMode, WindowKind,
    WindowVector,
};

#[derive(Parser)]
#[command(
    name = "stargabor",
    version,
    about = "Spark-deficient Gabor frames and analysis-l1 recovery"
)]
struct Cli {
    /// Worker threads for sweeps (default: all cores)
    #[arg(long, global = true, env = "STARGABOR_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Largest admissible length at or below n, with its factorization
    Admissible(AdmissibleArgs),
    /// Compute a window and save it as CSV (columns re,im)
    Window(WindowArgs),
    /// Apply the Gabor transform of a saved window to a signal
    Dgt(DgtArgs),
    /// Spark of a Gabor frame: exhaustive when small, randomized witness search otherwise
    Spark(SparkArgs),
    /// One recovery from subsampled noisy measurements
    Solve(SolveArgs),
    /// Sweep the measurement count and compare windows; writes CSV, SVG and JSON
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Gaussian,
    Hann,
    Hamming,
    Star,
}

impl From<KindArg> for WindowKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Gaussian => WindowKind::Gaussian,
            KindArg::Hann => WindowKind::Hann,
            KindArg::Hamming => WindowKind::Hamming,
            KindArg::Star => WindowKind::Star,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SignalArg {
    Cusp,
    Ramp,
    Sing,
}

impl From<SignalArg> for SyntheticKind {
    fn from(s: SignalArg) -> Self {
        match s {
            SignalArg::Cusp => SyntheticKind::Cusp,
            SignalArg::Ramp => SyntheticKind::Ramp,
            SignalArg::Sing => SyntheticKind::Sing,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum X0Arg {
    Zero,
    Adjoint,
}

impl From<X0Arg> for X0Rule {
    fn from(x: X0Arg) -> Self {
        match x {
            X0Arg::Zero => X0Rule::Zero,
            X0Arg::Adjoint => X0Rule::AdjointMeasurements,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EtaArg {
    /// sigma * sqrt(K)
    SigmaSqrtK,
    /// exact norm of the drawn noise
    NoiseNorm,
}

impl From<EtaArg> for EtaRule {
    fn from(e: EtaArg) -> Self {
        match e {
            EtaArg::SigmaSqrtK => EtaRule::SigmaSqrtK,
            EtaArg::NoiseNorm => EtaRule::NoiseNorm,
        }
    }
}

#[derive(Args)]
struct AdmissibleArgs {
    n: u64,
    /// Also require a square-free length
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct WindowArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Window length
    #[arg(long = "L")]
    len: usize,
    /// Phase of the metaplectic operator (star only)
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Seed of the random start vector (star only)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DgtArgs {
    /// Window CSV (re,im); its length sets L
    #[arg(long)]
    window: PathBuf,
    #[arg(long)]
    a: usize,
    #[arg(long)]
    b: usize,
    /// Signal CSV (value, or re,im)
    #[arg(long = "in")]
    input: PathBuf,
    /// Coefficient CSV (m,n,re,im)
    #[arg(long)]
    out: PathBuf,
    /// Keep only frequency rows 0..=M/2
    #[arg(long)]
    positive: bool,
}

#[derive(Args)]
struct SparkArgs {
    #[arg(long = "L")]
    len: usize,
    #[arg(long)]
    a: usize,
    #[arg(long)]
    b: usize,
    #[arg(long, value_enum, default_value = "star")]
    window: KindArg,
    /// Use this window CSV instead of computing one
    #[arg(long)]
    window_file: Option<PathBuf>,
    /// Relative singular-value tolerance of the rank test
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    tol: f64,
    /// Random subsets tried when exhaustive search is too large
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Seed for the star window and the witness search
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the report as JSON
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct SignalSource {
    /// Synthetic signal
    #[arg(long, value_enum, conflicts_with_all = ["wav", "input"])]
    signal: Option<SignalArg>,
    /// Mono WAV file
    #[arg(long, conflicts_with = "input")]
    wav: Option<PathBuf>,
    /// Signal CSV
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Samples skipped at the start of a WAV file
    #[arg(long, default_value_t = 0)]
    offset: usize,
    /// Require square-free lengths when trimming audio
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct ProblemArgs {
    /// Parameter row of the reference table (Cusp, Ramp, Sing, SI1899, SI1948, SI2141, SX5, SX224, SI1716)
    #[arg(long)]
    preset: Option<String>,
    /// Ambient dimension (preset or signal length when omitted)
    #[arg(long = "L")]
    len: Option<usize>,
    /// Time step
    #[arg(long)]
    a: Option<usize>,
    /// Frequency step
    #[arg(long)]
    b: Option<usize>,
    /// Noise standard deviation
    #[arg(long, default_value_t = 0.001)]
    sigma: f64,
    /// mu = C ||Phi x||_inf [default: 1, or the preset's value]
    #[arg(long = "C")]
    c: Option<f64>,
    /// Start point x0 [default: zero, or the preset's rule]
    #[arg(long, value_enum)]
    x0: Option<X0Arg>,
    /// Constraint radius rule
    #[arg(long, value_enum, default_value = "sigma-sqrt-k")]
    eta_rule: EtaArg,
    /// Use all frequency rows instead of 0..=M/2
    #[arg(long)]
    full_frequency: bool,
    /// Precomputed star window CSV
    #[arg(long)]
    star_window: Option<PathBuf>,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    /// Relative objective tolerance of the solver
    #[arg(long, default_value_t = 1e-6)]
    dual_tol: f64,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: SignalSource,
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "star")]
    window: KindArg,
    /// Number of measurements
    #[arg(long = "K")]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the recovered signal here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the solver trace (iteration, objective, slack, gap) to stderr
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    source: SignalSource,
    #[command(flatten)]
    problem: ProblemArgs,
    /// Number of K values, evenly spaced in [1, L]
    #[arg(long, default_value_t = 20)]
    points: usize,
    /// Repetitions per K
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Windows to compare
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["gaussian", "hann", "hamming", "star"])]
    windows: Vec<KindArg>,
    /// Result CSV [default: <signal>.csv]
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Plot SVG [default: CSV path with .svg]
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Solver statistics JSON [default: CSV path with .json]
    #[arg(long)]
    meta: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Compute(stargabor::Error),
}

impl From<stargabor::Error> for Failure {
    fn from(e: stargabor::Error) -> Self {
        Failure::Compute(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Admissible(args) => admissible(args),
        Command::Window(args) => window(args),
        Command::Dgt(args) => dgt(args),
        Command::Spark(args) => spark(args),
        Command::Solve(args) => solve(args),
        Command::Experiment(args) => experiment(args, cli.threads),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn admissible(args: AdmissibleArgs) -> CliResult<ExitCode> {
    let mode = if args.strict {
        AdmissibilityMode::Strict
    } else {
        AdmissibilityMode::Paper
    };
    let best = largest_admissible_at_most(args.n, mode)?;
    let (_, factors) = is_admissible_length(best, mode)?;
    println!("{best} = {factors}");
    Ok(ExitCode::SUCCESS)
}

fn build_window(
    kind: WindowKind,
    len: usize,
    theta: f64,
    seed: u64,
) -> CliResult<WindowVector<f64>> {
    if kind == WindowKind::Star {
        let cfg = StarWindowConfig {
            theta,
            seed,
            ..StarWindowConfig::default()
        };
        let star = star_window_with::<f64>(len, &cfg)?;
        eprintln!(
            "star window: eigenvalue {:.12} {:+.12}i, residual {:.2e}",
            star.eigenvalue.re, star.eigenvalue.im, star.residual
        );
        Ok(star.vector)
    } else {
        Ok(make_window(kind, len)?)
    }
}

fn window(args: WindowArgs) -> CliResult<ExitCode> {
    let g = build_window(args.kind.into(), args.len, args.theta, args.seed)?;
    write_window(&args.out, &g)?;
    Ok(ExitCode::SUCCESS)
}

fn dgt(args: DgtArgs) -> CliResult<ExitCode> {
    let g = read_window::<f64>(&args.window, WindowKind::Custom)?;
    let params = GaborParams::new(g.len(), args.a, args.b)?;
    let x: Vec<Complex64> = read_complex_vector(&args.input).or_else(|_| {
        read_real_vector::<f64>(&args.input)
            .map(|v| v.into_iter().map(|r| Complex64::new(r, 0.0)).collect())
    })?;
    let op = AnalysisOperator::new(g, params, args.positive)?;
    let c = op.dgt(&x)?;
    write_coefficients(&args.out, &c)?;
    println!(
        "{} coefficients ({} rows x {} columns) written to {}",
        c.as_flat().len(),
        c.rows(),
        c.columns(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn spark(args: SparkArgs) -> CliResult<ExitCode> {
    let params = GaborParams::new(args.len, args.a, args.b)?;
    let g = match &args.window_file {
        Some(p) => read_window::<f64>(p, WindowKind::Custom)?,
        None => build_window(args.window.into(), args.len, 0.0, args.seed)?,
    };
    let frame = AnalysisOperator::new(g, params, false)?.frame_matrix()?;
    let report = match spark_exhaustive(&frame, args.tol) {
        Err(stargabor::Error::TooLarge { size, .. }) => {
            eprintln!("exhaustive search needs {size} subsets (limit {EXHAUSTIVE_LIMIT}); searching for witnesses");
            deficiency_witness_search(&frame, args.trials, args.len, args.seed, args.tol)?
        }
        other => other?,
    };
    println!("{report}");
    if let Some(path) = &args.json {
        std::fs::write(path, report.to_json()?).map_err(stargabor::Error::from)?;
    }
    Ok(ExitCode::SUCCESS)
}

/// Signal and Gabor parameters after applying preset defaults and explicit flags.
struct Setup {
    signal: Signal<f64>,
    params: GaborParams,
    mu_constant: f64,
    x0_rule: X0Rule,
}

fn load_signal(
    source: &SignalSource,
    preset: Option<&Preset>,
    len: Option<usize>,
) -> CliResult<Signal<f64>> {
    let synthetic = source.signal.map(SyntheticKind::from).or_else(|| {
        // synthetic presets name their own signal
        preset.and_then(|p| p.label.parse::<SyntheticKind>().ok())
    });
    if let Some(path) = &source.wav {
        let mode = if source.strict {
            AdmissibilityMode::Strict
        } else {
            AdmissibilityMode::Paper
        };
        let trim = len.map_or(TrimMode::Auto, TrimMode::Explicit);
        let opts = AudioOptions {
            trim,
            offset: source.offset,
            admissibility: mode,
        };
        return Ok(load_audio(path, opts)?);
    }
    if let Some(path) = &source.input {
        return Ok(Signal::new(read_real_vector(path)?, stem(path), None)?);
    }
    match (synthetic, len) {
        (Some(kind), Some(len)) => Ok(make_synthetic(kind, len)?),
        (Some(_), None) => usage("--L is required for a synthetic signal without a preset"),
        (None, _) => usage("choose a signal with --signal, --wav, --in or a synthetic --preset"),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "signal".into(), |s| s.to_string_lossy().into_owned())
}

fn setup(source: &SignalSource, problem: &ProblemArgs) -> CliResult<Setup> {
    let preset = match &problem.preset {
        Some(label) => match find_preset(label) {
            Some(p) => Some(p),
            None => return usage(format!("unknown preset '{label}'")),
        },
        None => None,
    };
    let len = problem.len.or(preset.map(|p| p.len));
    let signal = load_signal(source, preset, len)?;
    let len = signal.len();
    let (a, b) = match (
        problem.a.or(preset.map(|p| p.a)),
        problem.b.or(preset.map(|p| p.b)),
    ) {
        (Some(a), Some(b)) => (a, b),
        _ => return usage("--a and --b are required without a preset"),
    };
    Ok(Setup {
        params: GaborParams::new(len, a, b)?,
        signal,
        mu_constant: problem.c.or(preset.map(|p| p.mu_constant)).unwrap_or(1.0),
        x0_rule: problem
            .x0
            .map(X0Rule::from)
            .or(preset.map(|p| p.x0_rule))
            .unwrap_or_default(),
    })
}

fn star_or_kind(
    kind: WindowKind,
    problem: &ProblemArgs,
    len: usize,
) -> CliResult<WindowVector<f64>> {
    match (&problem.star_window, kind) {
        (Some(path), WindowKind::Star) => Ok(read_window(path, WindowKind::Star)?),
        _ => build_window(kind, len, 0.0, 0),
    }
}

fn solve(args: SolveArgs) -> CliResult<ExitCode> {
    let s = setup(&args.source, &args.problem)?;
    let x = s.signal.samples();
    let g = star_or_kind(args.window.into(), &args.problem, s.params.len())?;
    let op = AnalysisOperator::new(g, s.params, !args.problem.full_frequency)?;
    let a = MeasurementOperator::sample(
        x.len(),
        args.k,
        stargabor::stream_seed(args.seed, &[args.k as u64, 0, 0]),
    )?;
    let noise = NoiseModel::new(
        args.problem.sigma,
        stargabor::stream_seed(args.seed, &[args.k as u64, 0, 1]),
    )?;
    let (y, eta) = noise.corrupt(&a.apply(x)?, args.problem.eta_rule.into());
    let x0 = match s.x0_rule {
        X0Rule::Zero => Vec::new(),
        X0Rule::AdjointMeasurements => a.adjoint_apply(&y)?,
    };
    let cfg = SolveConfig {
        mu: mu_from_rule(&op, x, s.mu_constant)?,
        x0,
        eta,
        max_iterations: args.problem.max_iter,
        dual_tolerance: args.problem.dual_tol,
        record_trace: args.trace,
        ..SolveConfig::default()
    };
    let r = solve_analysis_l1(&op, &a, &y, &cfg)?;
    if args.trace {
        eprint!("{}", r.trace_log());
    }
    let err: f64 = r
        .solution
        .iter()
        .zip(x)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
        / s.signal.norm();
    println!("signal          : {} {}", s.signal.label(), s.params);
    println!(
        "measurements K  : {} (eta {:.3e}, mu {:.6e})",
        args.k, eta, cfg.mu
    );
    println!("relative error  : {err:.6e}");
    println!("objective       : {:.9e}", r.objective);
    println!("slack           : {:.3e}", r.constraint_slack);
    println!("iterations      : {}", r.iterations);
    println!("converged       : {}", r.converged);
    if let Some(path) = &args.out {
        write_real_vector(path, &r.solution)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn experiment(args: ExperimentArgs, threads: Option<usize>) -> CliResult<ExitCode> {
    if args.windows.is_empty() {
        return usage("--windows must name at least one window");
    }
    let s = setup(&args.source, &args.problem)?;
    let label = s.signal.label().to_string();
    let mut plan = ExperimentPlan::new(s.signal, s.params);
    plan.sweep_points = args.points;
    plan.repetitions = args.reps;
    plan.sigma = args.problem.sigma;
    plan.mu_constant = s.mu_constant;
    plan.x0_rule = s.x0_rule;
    plan.eta_rule = args.problem.eta_rule.into();
    plan.windows = args.windows.iter().map(|&k| k.into()).collect();
    plan.master_seed = args.seed;
    plan.positive_frequency = !args.problem.full_frequency;
    plan.max_iterations = args.problem.max_iter;
    plan.dual_tolerance = args.problem.dual_tol;
    if plan.windows.contains(&WindowKind::Star) {
        plan.star_window = Some(star_or_kind(
            WindowKind::Star,
            &args.problem,
            plan.params.len(),
        )?);
    }

    let cancel = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&cancel);
    // a second handler registration fails only if one exists already; ignore it
    let _ = ctrlc::set_handler(move || flag.store(true, Ordering::Relaxed));
    let control = RunControl {
        threads,
        cancel: Some(cancel),
    };
    let result = run_experiment_with(&plan, &control)?;

    let csv = args
        .csv
        .unwrap_or_else(|| PathBuf::from(format!("{label}.csv")));
    let plot = args.plot.unwrap_or_else(|| csv.with_extension("svg"));
    let meta = args.meta.unwrap_or_else(|| csv.with_extension("json"));
    write_csv(&result, &csv)?;
    write_metadata(&result, &meta)?;
    if result.row_count() > 0 {
        write_plot(&result, &plot)?;
    }
    println!("{} rows written to {}", result.row_count(), csv.display());
    if !result.complete {
        eprintln!("interrupted: only completed sweep points were written");
        return Ok(ExitCode::from(130));
    }
    Ok(ExitCode::SUCCESS)
}
