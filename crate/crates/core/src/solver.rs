//! Analysis-l1 recovery:
//!
//! ```text
//! minimize  ||Phi x||_1 + mu/2 ||x - x0||^2   subject to  ||A x - y||_2 <= eta
//! ```
//!
//! `mu = 0` gives the plain constrained problem. Solved by a first-order
//! primal-dual iteration on the saddle problem
//! `min_x max_{|z_i| <= 1} Re<z, Phi x> + G(x)`, where `G` is the quadratic
//! plus the indicator of the measurement ball. Because the rows of a
//! subsampled identity are orthonormal, the prox of `G` is a closed-form
//! projection and every iterate is feasible. For `mu > 0` the step sizes
//! follow the accelerated schedule for strongly convex `G`, and a duality
//! gap certifies the objective.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::operator::{operator_norm, AnalysisMap};
use crate::scalar::Real;
use crate::sensing::MeasurementOperator;

const CHECK_EVERY: usize = 10;
const STAGNATION_WINDOW: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig<T> {
    /// Weight of the proximity term; 0 selects the unregularized problem.
    pub mu: T,
    /// When set, overrides `mu` with `C * ||Phi x_ref||_inf`.
    pub mu_rule: Option<MuRule<T>>,
    /// Reference point of the proximity term; empty means zero.
    pub x0: Vec<T>,
    /// Radius of the data-fidelity ball.
    pub eta: T,
    pub max_iterations: usize,
    /// Absolute feasibility tolerance; `None` uses `1e-6 max(1, ||y||)`.
    pub primal_tolerance: Option<T>,
    /// Relative objective tolerance (duality gap when `mu > 0`, change over
    /// 50 iterations otherwise).
    pub dual_tolerance: T,
    /// Known `||Phi||_2`; estimated by power iteration when absent.
    pub operator_norm: Option<T>,
    pub record_trace: bool,
}

impl<T: Real> Default for SolveConfig<T> {
    fn default() -> Self {
        SolveConfig {
            mu: T::zero(),
            mu_rule: None,
            x0: Vec::new(),
            eta: T::zero(),
            max_iterations: 5000,
            primal_tolerance: None,
            dual_tolerance: T::lit(1e-6),
            operator_norm: None,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuRule<T> {
    pub constant: T,
    pub reference: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub objective: f64,
    pub slack: f64,
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    pub objective: T,
    /// `||A x - y||_2 - eta`; non-positive means feasible.
    pub constraint_slack: T,
    pub converged: bool,
    pub trace: Vec<TraceRecord>,
}

impl<T: Real> SolveResult<T> {
    /// Text log of the recorded trace: one `iteration objective slack [gap]` line each.
    pub fn trace_log(&self) -> String {
        let mut out = String::from("# iteration objective slack gap\n");
        for r in &self.trace {
            let gap = r
                .gap
                .map_or_else(|| "-".to_string(), |g| format!("{g:.6e}"));
            out.push_str(&format!(
                "{} {:.12e} {:.3e} {}\n",
                r.iteration, r.objective, r.slack, gap
            ));
        }
        out
    }
}

/// `C * max_i |(Phi x_ref)_i|`.
pub fn mu_from_rule<T: Real>(phi: &impl AnalysisMap<T>, x_ref: &[T], c: T) -> Result<T> {
    check_len("mu rule reference", phi.domain_len(), x_ref.len())?;
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); phi.range_len()];
    phi.forward_real(x_ref, &mut coeffs);
    let sup = coeffs
        .iter()
        .map(|z| z.norm())
        .fold(T::zero(), |a, b| a.max(b));
    Ok(c * sup)
}

fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|&a| a * a).sum::<T>().sqrt()
}

fn residual_norm<T: Real>(a: &MeasurementOperator, x: &[T], y: &[T]) -> T {
    a.indices()
        .iter()
        .zip(y)
        .map(|(&i, &yi)| (x[i] - yi) * (x[i] - yi))
        .sum::<T>()
        .sqrt()
}

struct Problem<'a, T: Real, M: AnalysisMap<T>> {
    phi: &'a M,
    a: &'a MeasurementOperator,
    y: &'a [T],
    x0: Vec<T>,
    mu: T,
    eta: T,
}

impl<T: Real, M: AnalysisMap<T>> Problem<'_, T, M> {
    fn prox(&self, v: &[T], tau: T, out: &mut [T]) {
        let denom = T::one() + tau * self.mu;
        for ((o, &vi), &ci) in out.iter_mut().zip(v).zip(&self.x0) {
            *o = (vi + tau * self.mu * ci) / denom;
        }
        self.a.project_onto_ball(out, self.y, self.eta);
    }

    fn objective(&self, x: &[T], scratch: &mut [Complex<T>]) -> T {
        self.phi.forward_real(x, scratch);
        let l1: T = scratch.iter().map(|z| z.norm()).sum();
        l1 + self.quad(x)
    }

    fn quad(&self, x: &[T]) -> T {
        if self.mu == T::zero() {
            return T::zero();
        }
        let d2: T = x
            .iter()
            .zip(&self.x0)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum();
        self.mu / T::lit(2.0) * d2
    }

    /// Dual value at a dual-feasible `z`, given `g = Phi^T z`. Only finite for `mu > 0`.
    fn dual_value(&self, g: &[T], work: &mut [T]) -> T {
        for ((w, &gi), &ci) in work.iter_mut().zip(g).zip(&self.x0) {
            *w = ci - gi / self.mu;
        }
        self.a.project_onto_ball(work, self.y, self.eta);
        let lin: T = g.iter().zip(work.iter()).map(|(&a, &b)| a * b).sum();
        lin + self.quad(work)
    }
}

/// Solves the analysis-l1 problem for operator `phi` and measurements `(a, y)`.
pub fn solve_analysis_l1<T: Real, M: AnalysisMap<T>>(
    phi: &M,
    a: &MeasurementOperator,
    y: &[T],
    cfg: &SolveConfig<T>,
) -> Result<SolveResult<T>> {
    let len = phi.domain_len();
    check_len(
        "measurement operator vs analysis operator",
        len,
        a.ambient_len(),
    )?;
    check_len("measurements", a.measurements(), y.len())?;
    if !cfg.eta.is_finite() || cfg.eta < T::zero() {
        return Err(Error::Infeasible(format!(
            "constraint radius must be finite and non-negative, got {}",
            cfg.eta
        )));
    }
    let mu = match &cfg.mu_rule {
        Some(rule) => mu_from_rule(phi, &rule.reference, rule.constant)?,
        None => cfg.mu,
    };
    if !mu.is_finite() || mu < T::zero() {
        return Err(Error::InvalidParameters(format!(
            "mu must be finite and non-negative, got {mu}"
        )));
    }
    if cfg.dual_tolerance.is_nan() || cfg.dual_tolerance <= T::zero() {
        return Err(Error::InvalidParameters(
            "dual tolerance must be positive".into(),
        ));
    }
    let x0 = if cfg.x0.is_empty() {
        vec![T::zero(); len]
    } else {
        check_len("x0", len, cfg.x0.len())?;
        cfg.x0.clone()
    };
    let primal_tol = cfg
        .primal_tolerance
        .unwrap_or_else(|| T::lit(1e-6) * T::one().max(norm2(y)));

    let problem = Problem {
        phi,
        a,
        y,
        x0,
        mu,
        eta: cfg.eta,
    };
    let p = phi.range_len();
    let zero_c = Complex::new(T::zero(), T::zero());
    let mut coeffs = vec![zero_c; p];

    // feasible start: the projection of x0
    let mut x = problem.x0.clone();
    a.project_onto_ball(&mut x, y, cfg.eta);

    let op_norm = match cfg.operator_norm {
        Some(n) => n,
        None => operator_norm(phi, 200, T::lit(1e-6), 0x5eed),
    };
    let slack_of = |x: &[T]| residual_norm(a, x, y) - cfg.eta;
    if op_norm == T::zero() {
        // objective is the proximity term alone, minimized by the projection of x0
        let objective = problem.objective(&x, &mut coeffs);
        let slack = slack_of(&x);
        return Ok(SolveResult {
            solution: x,
            iterations: 0,
            objective,
            constraint_slack: slack,
            converged: true,
            trace: Vec::new(),
        });
    }
    let op_norm = op_norm * T::lit(1.01);

    // Balance primal and dual step sizes by the expected magnitudes of x
    // (unit-order dual entries, signal-order primal entries).
    let x_scale = {
        let k = T::from_usize_lossy(a.measurements());
        let l = T::from_usize_lossy(len);
        let rms = norm2(y) / k.sqrt();
        (rms * l.sqrt()).max(norm2(&problem.x0)).max(T::lit(1e-12))
    };
    let z_scale = T::from_usize_lossy(p).sqrt();
    let balance = (x_scale / z_scale).sqrt();
    let mut tau = balance / op_norm;
    let mut sigma = T::one() / (balance * op_norm);

    let mut z = vec![zero_c; p];
    let mut x_bar = x.clone();
    let mut x_new = vec![T::zero(); len];
    let mut grad = vec![T::zero(); len];
    let mut step = vec![T::zero(); len];
    let mut work = vec![T::zero(); len];

    let mut trace = Vec::new();
    let mut history: Vec<T> = Vec::new();
    let mut best = (problem.objective(&x, &mut coeffs), x.clone());
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=cfg.max_iterations {
        iterations = it;
        phi.forward_real(&x_bar, &mut coeffs);
        for (zi, &ci) in z.iter_mut().zip(&coeffs) {
            let v = *zi + ci * sigma;
            let n = v.norm();
            *zi = if n > T::one() { v / n } else { v };
        }
        phi.adjoint_real(&z, &mut grad);
        for ((s, &xi), &gi) in step.iter_mut().zip(&x).zip(&grad) {
            *s = xi - tau * gi;
        }
        problem.prox(&step, tau, &mut x_new);

        let theta = if mu > T::zero() {
            let th = T::one() / (T::one() + T::lit(2.0) * mu * tau).sqrt();
            tau = tau * th;
            sigma = sigma / th;
            th
        } else {
            T::one()
        };
        for ((xb, &xn), &xo) in x_bar.iter_mut().zip(&x_new).zip(&x) {
            *xb = xn + theta * (xn - xo);
        }
        let moved = x_new
            .iter()
            .zip(&x)
            .map(|(&p, &q)| (p - q) * (p - q))
            .sum::<T>()
            .sqrt();
        std::mem::swap(&mut x, &mut x_new);

        if it % CHECK_EVERY != 0 {
            continue;
        }
        let obj = problem.objective(&x, &mut coeffs);
        if obj < best.0 {
            best = (obj, x.clone());
        }
        let scale = T::one().max(obj.abs());
        let gap = if mu > T::zero() {
            Some(obj - problem.dual_value(&grad, &mut work))
        } else {
            None
        };
        if cfg.record_trace {
            trace.push(TraceRecord {
                iteration: it,
                objective: obj.to_f64_lossy(),
                slack: slack_of(&x).to_f64_lossy(),
                gap: gap.map(|g| g.to_f64_lossy()),
            });
        }
        history.push(obj);
        let lag = STAGNATION_WINDOW / CHECK_EVERY;
        let stalled = history.len() > lag
            && (obj - history[history.len() - 1 - lag]).abs() <= cfg.dual_tolerance * scale
            && moved <= cfg.dual_tolerance * T::one().max(norm2(&x));
        let certified = match gap {
            Some(g) => g.abs() <= cfg.dual_tolerance * scale,
            None => stalled,
        };
        if certified && slack_of(&x) <= primal_tol {
            converged = true;
            break;
        }
    }

    let solution = if converged { x } else { best.1 };
    let objective = problem.objective(&solution, &mut coeffs);
    let constraint_slack = slack_of(&solution);
    Ok(SolveResult {
        solution,
        iterations,
        objective,
        constraint_slack,
        converged,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor::FrameMatrix;

    #[test]
    fn full_sampling_zero_radius_returns_measurements() {
        let phi = FrameMatrix::<f64>::identity(5);
        let a = MeasurementOperator::sample(5, 5, 0).unwrap();
        let y = vec![1.0, -2.0, 0.5, 3.0, 0.0];
        let r = solve_analysis_l1(&phi, &a, &y, &SolveConfig::default()).unwrap();
        for (s, t) in r.solution.iter().zip(&y) {
            assert!((s - t).abs() < 1e-12);
        }
        assert!(r.converged);
    }

    #[test]
    fn l1_shrinks_free_coordinate() {
        let phi = FrameMatrix::<f64>::identity(2);
        let a = MeasurementOperator::from_indices(2, vec![0]).unwrap();
        let r = solve_analysis_l1(&phi, &a, &[1.0], &SolveConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.solution[0] - 1.0).abs() < 1e-9);
        assert!(r.solution[1].abs() < 1e-6, "{:?}", r.solution);
        assert!((r.objective - 1.0).abs() < 1e-6);
    }

    #[test]
    fn regularized_problem_certifies_gap() {
        let phi =
            FrameMatrix::<f64>::from_real_rows(3, 2, &[1.0, -1.0, 0.5, 2.0, 0.0, 1.0]).unwrap();
        let a = MeasurementOperator::from_indices(2, vec![1]).unwrap();
        let cfg = SolveConfig {
            mu: 0.7,
            x0: vec![0.3, -0.2],
            eta: 0.1,
            record_trace: true,
            ..SolveConfig::default()
        };
        let r = solve_analysis_l1(&phi, &a, &[1.0], &cfg).unwrap();
        assert!(r.converged);
        assert!(r.constraint_slack <= 1e-9);
        let last = r.trace.last().unwrap();
        assert!(last.gap.unwrap().abs() <= 1e-6 * last.objective.abs().max(1.0));
        assert!(r.trace_log().lines().count() == r.trace.len() + 1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let phi = FrameMatrix::<f64>::identity(3);
        let a = MeasurementOperator::from_indices(3, vec![0, 2]).unwrap();
        assert!(matches!(
            solve_analysis_l1(&phi, &a, &[1.0], &SolveConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        let cfg = SolveConfig {
            eta: -1.0,
            ..SolveConfig::default()
        };
        assert!(matches!(
            solve_analysis_l1(&phi, &a, &[1.0, 2.0], &cfg),
            Err(Error::Infeasible(_))
        ));
        let a4 = MeasurementOperator::from_indices(4, vec![0]).unwrap();
        assert!(solve_analysis_l1(&phi, &a4, &[1.0], &SolveConfig::default()).is_err());
    }

    #[test]
    fn mu_rule_is_linear_in_constant() {
        let phi = FrameMatrix::<f64>::from_real_rows(2, 2, &[1.0, 2.0, -3.0, 0.5]).unwrap();
        let x = [1.0, 1.0];
        let m1 = mu_from_rule(&phi, &x, 1.0).unwrap();
        let m01 = mu_from_rule(&phi, &x, 0.1).unwrap();
        assert_eq!(m1, 3.0);
        assert!((m1 / m01 - 10.0).abs() < 1e-12);
        assert_eq!(mu_from_rule(&phi, &[0.0, 0.0], 1.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_operator_returns_projection_of_x0() {
        let phi = FrameMatrix::<f64>::from_real_rows(1, 3, &[0.0, 0.0, 0.0]).unwrap();
        let a = MeasurementOperator::from_indices(3, vec![1]).unwrap();
        let cfg = SolveConfig {
            mu: 1.0,
            x0: vec![1.0, 1.0, 1.0],
            ..SolveConfig::default()
        };
        let r = solve_analysis_l1(&phi, &a, &[5.0], &cfg).unwrap();
        assert_eq!(r.solution, vec![1.0, 5.0, 1.0]);
    }
}
