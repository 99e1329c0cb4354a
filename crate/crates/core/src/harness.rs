//! The recovery experiment: sweep the number of measurements `K`, recover the
//! signal with every window's analysis operator from the same subsampled,
//! noisy measurements, and aggregate relative errors.
//!
//! Every `(K, repetition)` pair is an independent task whose sampling and
//! noise seeds are derived from `(master_seed, K, repetition)`, so results do
//! not depend on scheduling or thread count.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gabor::{make_window, AnalysisOperator, GaborParams, WindowKind, WindowVector};
use crate::operator::operator_norm;
use crate::sensing::{stream_seed, EtaRule, MeasurementOperator, NoiseModel};
use crate::signals::Signal;
use crate::solver::{mu_from_rule, solve_analysis_l1, SolveConfig};
use crate::zauner::star_window;

const PURPOSE_SAMPLING: u64 = 0;
const PURPOSE_NOISE: u64 = 1;

/// Starting point (and proximity centre) of the regularized problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum X0Rule {
    #[default]
    Zero,
    /// `A^T y`, the measurements scattered back to their positions.
    AdjointMeasurements,
}

impl fmt::Display for X0Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            X0Rule::Zero => "zero",
            X0Rule::AdjointMeasurements => "adjoint",
        })
    }
}

impl FromStr for X0Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(X0Rule::Zero),
            "adjoint" | "adjoint_measurements" => Ok(X0Rule::AdjointMeasurements),
            other => Err(Error::InvalidParameters(format!(
                "unknown x0 rule '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub signal: Signal<f64>,
    pub params: GaborParams,
    pub sweep_points: usize,
    pub repetitions: usize,
    pub sigma: f64,
    /// `C` in `mu = C ||Phi x||_inf`.
    pub mu_constant: f64,
    pub x0_rule: X0Rule,
    pub eta_rule: EtaRule,
    pub windows: Vec<WindowKind>,
    pub master_seed: u64,
    /// Keep only the non-negative frequency rows (real signals).
    pub positive_frequency: bool,
    /// Precomputed star window; computed from `star_seed` when absent.
    pub star_window: Option<WindowVector<f64>>,
    pub star_seed: u64,
    pub max_iterations: usize,
    pub dual_tolerance: f64,
}

impl ExperimentPlan {
    /// Desk-scale defaults: 20 sweep points, 10 repetitions, all four windows.
    pub fn new(signal: Signal<f64>, params: GaborParams) -> Self {
        ExperimentPlan {
            signal,
            params,
            sweep_points: 20,
            repetitions: 10,
            sigma: 1e-3,
            mu_constant: 1.0,
            x0_rule: X0Rule::Zero,
            eta_rule: EtaRule::SigmaSqrtK,
            windows: WindowKind::COMPARED.to_vec(),
            master_seed: 0,
            positive_frequency: true,
            star_window: None,
            star_seed: 0,
            max_iterations: 5000,
            dual_tolerance: 1e-6,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.signal.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                context: "signal length vs L",
                expected: self.params.len(),
                found: self.signal.len(),
            });
        }
        if self.sweep_points == 0 || self.repetitions == 0 {
            return Err(Error::InvalidParameters(
                "sweep points and repetitions must be at least 1".into(),
            ));
        }
        if self.windows.is_empty() {
            return Err(Error::InvalidParameters("no windows selected".into()));
        }
        if self.sigma.is_nan()
            || self.sigma < 0.0
            || self.mu_constant.is_nan()
            || self.mu_constant < 0.0
        {
            return Err(Error::InvalidParameters(
                "sigma and C must be non-negative".into(),
            ));
        }
        if self.signal.norm() == 0.0 {
            return Err(Error::InvalidParameters(
                "signal is identically zero".into(),
            ));
        }
        Ok(())
    }

    /// `round(linspace(1, L, points))` without duplicates.
    pub fn sweep(&self) -> Vec<usize> {
        sweep_values(self.params.len(), self.sweep_points)
    }
}

pub fn sweep_values(len: usize, points: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = if points <= 1 {
        vec![len]
    } else {
        let step = (len - 1) as f64 / (points - 1) as f64;
        (0..points)
            .map(|i| (1.0 + i as f64 * step).round() as usize)
            .collect()
    };
    ks.dedup();
    ks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub rep_count: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowCurve {
    pub window: WindowKind,
    pub points: Vec<CurvePoint>,
}

/// Solver statistics for one `(window, K)` point; kept out of the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDiagnostics {
    pub window: WindowKind,
    pub k: usize,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub converged: usize,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub signal: String,
    pub len: usize,
    pub a: usize,
    pub b: usize,
    pub master_seed: u64,
    pub curves: Vec<WindowCurve>,
    /// False when the run was interrupted; only finished points are present.
    pub complete: bool,
    pub diagnostics: Vec<PointDiagnostics>,
}

impl ExperimentResult {
    pub fn curve(&self, window: WindowKind) -> Option<&WindowCurve> {
        self.curves.iter().find(|c| c.window == window)
    }

    pub fn row_count(&self) -> usize {
        self.curves.iter().map(|c| c.points.len()).sum()
    }
}

/// Execution controls that do not affect results.
#[derive(Debug, Clone, Default)]
pub struct RunControl {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Set to stop scheduling new tasks; finished points are still returned.
    pub cancel: Option<Arc<AtomicBool>>,
}

struct Pipeline {
    kind: WindowKind,
    op: AnalysisOperator<f64>,
    mu: f64,
    norm: f64,
}

struct TaskOutput {
    errors: Vec<f64>,
    iterations: Vec<usize>,
    converged: Vec<bool>,
}

fn relative_error(x: &[f64], xh: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(xh).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = x.iter().map(|a| a * a).sum();
    (num / den).sqrt()
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn build_pipelines(plan: &ExperimentPlan) -> Result<Vec<Pipeline>> {
    let len = plan.params.len();
    let x = plan.signal.samples();
    plan.windows
        .iter()
        .map(|&kind| {
            let window = match kind {
                WindowKind::Star => match &plan.star_window {
                    Some(w) => w.clone(),
                    None => star_window::<f64>(len, 0.0, plan.star_seed)?.vector,
                },
                WindowKind::Custom => {
                    return Err(Error::InvalidParameters(
                        "custom windows are not part of the comparison".into(),
                    ))
                }
                other => make_window(other, len)?,
            };
            let op = AnalysisOperator::new(window, plan.params, plan.positive_frequency)?;
            let mu = mu_from_rule(&op, x, plan.mu_constant)?;
            let norm = operator_norm(&op, 500, 1e-9, 0x5eed);
            Ok(Pipeline { kind, op, mu, norm })
        })
        .collect()
}

fn run_task(
    plan: &ExperimentPlan,
    pipelines: &[Pipeline],
    k: usize,
    rep: usize,
) -> Result<TaskOutput> {
    let x = plan.signal.samples();
    let keys = |purpose| [k as u64, rep as u64, purpose];
    let a = MeasurementOperator::sample(
        x.len(),
        k,
        stream_seed(plan.master_seed, &keys(PURPOSE_SAMPLING)),
    )?;
    let clean = a.apply(x)?;
    let noise = NoiseModel::new(
        plan.sigma,
        stream_seed(plan.master_seed, &keys(PURPOSE_NOISE)),
    )?;
    let (y, eta) = noise.corrupt(&clean, plan.eta_rule);
    let x0 = match plan.x0_rule {
        X0Rule::Zero => Vec::new(),
        X0Rule::AdjointMeasurements => a.adjoint_apply(&y)?,
    };
    let mut out = TaskOutput {
        errors: Vec::with_capacity(pipelines.len()),
        iterations: Vec::with_capacity(pipelines.len()),
        converged: Vec::with_capacity(pipelines.len()),
    };
    for p in pipelines {
        let cfg = SolveConfig {
            mu: p.mu,
            x0: x0.clone(),
            eta,
            max_iterations: plan.max_iterations,
            dual_tolerance: plan.dual_tolerance,
            operator_norm: Some(p.norm),
            ..SolveConfig::default()
        };
        let r = solve_analysis_l1(&p.op, &a, &y, &cfg)?;
        out.errors.push(relative_error(x, &r.solution));
        out.iterations.push(r.iterations);
        out.converged.push(r.converged);
    }
    Ok(out)
}

pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    run_experiment_with(plan, &RunControl::default())
}

pub fn run_experiment_with(
    plan: &ExperimentPlan,
    control: &RunControl,
) -> Result<ExperimentResult> {
    match control.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidParameters(format!("thread pool: {e}")))?;
            pool.install(|| run_inner(plan, control.cancel.as_deref()))
        }
        None => run_inner(plan, control.cancel.as_deref()),
    }
}

fn run_inner(plan: &ExperimentPlan, cancel: Option<&AtomicBool>) -> Result<ExperimentResult> {
    plan.validate()?;
    let pipelines = build_pipelines(plan)?;
    let ks = plan.sweep();
    let tasks: Vec<(usize, usize)> = ks
        .iter()
        .flat_map(|&k| (0..plan.repetitions).map(move |r| (k, r)))
        .collect();
    let cancelled = || cancel.is_some_and(|c| c.load(Ordering::Relaxed));

    let outputs: Vec<Option<TaskOutput>> = tasks
        .par_iter()
        .map(|&(k, rep)| {
            if cancelled() {
                Ok(None)
            } else {
                run_task(plan, &pipelines, k, rep).map(Some)
            }
        })
        .collect::<Result<_>>()?;

    let mut by_k: BTreeMap<usize, Vec<&TaskOutput>> = BTreeMap::new();
    let mut complete = true;
    for (&(k, _), out) in tasks.iter().zip(&outputs) {
        match out {
            Some(o) => by_k.entry(k).or_default().push(o),
            None => complete = false,
        }
    }
    // an interrupted run only reports points whose repetitions all finished
    by_k.retain(|_, v| v.len() == plan.repetitions);

    let mut curves = Vec::with_capacity(pipelines.len());
    let mut diagnostics = Vec::new();
    for (w, p) in pipelines.iter().enumerate() {
        let mut points = Vec::with_capacity(by_k.len());
        for (&k, outs) in &by_k {
            let mut errs: Vec<f64> = outs.iter().map(|o| o.errors[w]).collect();
            errs.sort_by(f64::total_cmp);
            points.push(CurvePoint {
                k,
                rep_count: errs.len(),
                median: quantile(&errs, 0.5),
                q25: quantile(&errs, 0.25),
                q75: quantile(&errs, 0.75),
            });
            let iters: Vec<usize> = outs.iter().map(|o| o.iterations[w]).collect();
            diagnostics.push(PointDiagnostics {
                window: p.kind,
                k,
                mean_iterations: iters.iter().sum::<usize>() as f64 / iters.len() as f64,
                max_iterations: iters.iter().copied().max().unwrap_or(0),
                converged: outs.iter().filter(|o| o.converged[w]).count(),
                mu: p.mu,
            });
        }
        curves.push(WindowCurve {
            window: p.kind,
            points,
        });
    }
    Ok(ExperimentResult {
        signal: plan.signal.label().to_string(),
        len: plan.params.len(),
        a: plan.params.a(),
        b: plan.params.b(),
        master_seed: plan.master_seed,
        curves,
        complete,
        diagnostics,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    signal: String,
    window: WindowKind,
    #[serde(rename = "L")]
    len: usize,
    a: usize,
    b: usize,
    #[serde(rename = "K")]
    k: usize,
    rep_count: usize,
    median_rel_err: f64,
    q25: f64,
    q75: f64,
    seed: u64,
}

pub fn write_csv(result: &ExperimentResult, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    write_csv_rows(result, &mut w)?;
    w.flush()?;
    Ok(())
}

/// The CSV as a string (same bytes as [`write_csv`]).
pub fn to_csv_string(result: &ExperimentResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write_csv_rows(result, &mut w)?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_csv_rows<W: std::io::Write>(
    result: &ExperimentResult,
    w: &mut csv::Writer<W>,
) -> Result<()> {
    if result.row_count() == 0 {
        // header only, so interrupted runs still leave a well-formed file
        w.write_record([
            "signal",
            "window",
            "L",
            "a",
            "b",
            "K",
            "rep_count",
            "median_rel_err",
            "q25",
            "q75",
            "seed",
        ])?;
    }
    for curve in &result.curves {
        for p in &curve.points {
            w.serialize(CsvRow {
                signal: result.signal.clone(),
                window: curve.window,
                len: result.len,
                a: result.a,
                b: result.b,
                k: p.k,
                rep_count: p.rep_count,
                median_rel_err: p.median,
                q25: p.q25,
                q75: p.q75,
                seed: result.master_seed,
            })?;
        }
    }
    Ok(())
}

/// Parses a CSV written by [`write_csv`]. Diagnostics are not stored in the
/// CSV and come back empty.
pub fn read_csv(path: impl AsRef<Path>) -> Result<ExperimentResult> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let rows: Vec<CsvRow> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::MalformedInput {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    let first = rows.first().ok_or_else(|| Error::MalformedInput {
        path: path.to_path_buf(),
        reason: "no data rows".into(),
    })?;
    let mut result = ExperimentResult {
        signal: first.signal.clone(),
        len: first.len,
        a: first.a,
        b: first.b,
        master_seed: first.seed,
        curves: Vec::new(),
        complete: true,
        diagnostics: Vec::new(),
    };
    for row in &rows {
        let point = CurvePoint {
            k: row.k,
            rep_count: row.rep_count,
            median: row.median_rel_err,
            q25: row.q25,
            q75: row.q75,
        };
        match result.curves.iter_mut().find(|c| c.window == row.window) {
            Some(c) => c.points.push(point),
            None => result.curves.push(WindowCurve {
                window: row.window,
                points: vec![point],
            }),
        }
    }
    Ok(result)
}

/// Sidecar JSON with the run's solver statistics and completeness flag.
pub fn write_metadata(result: &ExperimentResult, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), result)?;
    Ok(())
}

pub fn window_color(kind: WindowKind) -> plotters::style::RGBColor {
    use plotters::style::{RGBColor, BLACK, BLUE, MAGENTA, RED};
    match kind {
        WindowKind::Gaussian => RED,
        WindowKind::Hann => MAGENTA,
        WindowKind::Hamming => BLACK,
        WindowKind::Star => BLUE,
        WindowKind::Custom => RGBColor(128, 128, 128),
    }
}

/// Median error against `K` on a logarithmic axis, one curve per window.
pub fn write_plot(result: &ExperimentResult, path: impl AsRef<Path>) -> Result<()> {
    use plotters::prelude::*;

    if result.row_count() == 0 {
        return Err(Error::InvalidParameters("nothing to plot".into()));
    }
    let floor = 1e-12;
    let values = result
        .curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.median.max(floor)));
    let (lo, hi) = values.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let (lo, hi) = (lo / 2.0, hi * 2.0);
    let plot_err = |e: &dyn fmt::Display| Error::Plot(e.to_string());

    let root = SVGBackend::new(path.as_ref(), (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(
            format!(
                "{} ({},{},{})",
                result.signal, result.len, result.a, result.b
            ),
            ("sans-serif", 20),
        )
        .margin(10)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(1usize..result.len, (lo..hi).log_scale())
        .map_err(|e| plot_err(&e))?;
    chart
        .configure_mesh()
        .x_desc("K")
        .y_desc("relative error")
        .draw()
        .map_err(|e| plot_err(&e))?;
    for curve in &result.curves {
        let color = window_color(curve.window);
        chart
            .draw_series(LineSeries::new(
                curve.points.iter().map(|p| (p.k, p.median.max(floor))),
                color.stroke_width(2),
            ))
            .map_err(|e| plot_err(&e))?
            .label(curve.window.name())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| plot_err(&e))?;
    root.present().map_err(|e| plot_err(&e))?;
    Ok(())
}

/// A row of the reference parameter table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub label: &'static str,
    /// Sample count of the original recording; `None` for synthetic signals.
    pub samples: Option<usize>,
    pub len: usize,
    pub a: usize,
    pub b: usize,
    pub mu_constant: f64,
    pub x0_rule: X0Rule,
}

impl Preset {
    pub fn params(&self) -> GaborParams {
        GaborParams::new(self.len, self.a, self.b).expect("preset parameters are consistent")
    }
}

const fn preset(
    label: &'static str,
    samples: Option<usize>,
    (len, a, b): (usize, usize, usize),
    mu_constant: f64,
    x0_rule: X0Rule,
) -> Preset {
    Preset {
        label,
        samples,
        len,
        a,
        b,
        mu_constant,
        x0_rule,
    }
}

pub const PRESETS: [Preset; 9] = [
    preset("Cusp", None, (33, 1, 11), 1.0, X0Rule::Zero),
    preset("Ramp", None, (33, 1, 11), 1.0, X0Rule::Zero),
    preset("Sing", None, (45, 1, 9), 1.0, X0Rule::Zero),
    preset(
        "SI1899",
        Some(22938),
        (20349, 19, 21),
        0.1,
        X0Rule::AdjointMeasurements,
    ),
    preset(
        "SI1948",
        Some(27680),
        (27531, 19, 23),
        0.1,
        X0Rule::AdjointMeasurements,
    ),
    preset(
        "SI2141",
        Some(42800),
        (41769, 21, 17),
        0.1,
        X0Rule::AdjointMeasurements,
    ),
    preset(
        "SX5",
        Some(24167),
        (23205, 17, 13),
        0.1,
        X0Rule::AdjointMeasurements,
    ),
    preset(
        "SX224",
        Some(25805),
        (24633, 23, 21),
        0.1,
        X0Rule::AdjointMeasurements,
    ),
    preset(
        "SI1716",
        Some(25908),
        (24633, 23, 21),
        1.0,
        X0Rule::AdjointMeasurements,
    ),
];

pub fn find_preset(label: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.label.eq_ignore_ascii_case(label))
}
