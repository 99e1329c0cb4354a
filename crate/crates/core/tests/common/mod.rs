//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn complex_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Direct triple loop over `c[m, n] = sum_l x[l] conj(g[l - na]) e^{-2 pi i m b l / L}`,
/// laid out n-major with `rows` frequency rows.
pub fn naive_dgt(
    x: &[Complex64],
    g: &[Complex64],
    a: usize,
    b: usize,
    rows: usize,
) -> Vec<Complex64> {
    let len = x.len();
    let n_time = len / a;
    let mut out = Vec::with_capacity(rows * n_time);
    for n in 0..n_time {
        for m in 0..rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..len {
                let shifted = g[(l + len - (n * a) % len) % len].conj();
                let phase = -2.0 * PI * ((m * b * l) % len) as f64 / len as f64;
                acc += x[l] * shifted * Complex64::from_polar(1.0, phase);
            }
            out.push(acc);
        }
    }
    out
}

/// `<u, v> = sum conj(u_i) v_i`.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_diff(u: &[Complex64], v: &[Complex64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}

/// A small recovery instance with a real analysis matrix.
#[derive(Debug, Clone)]
pub struct SmallInstance {
    /// Row-major `rows x len` real matrix.
    pub phi: Vec<f64>,
    /// Complex rows instead, when set (used by the smooth instances).
    pub phi_complex: Option<Vec<Complex64>>,
    pub rows: usize,
    pub len: usize,
    pub sampled: Vec<usize>,
    pub y: Vec<f64>,
    pub eta: f64,
    pub mu: f64,
    pub x0: Vec<f64>,
}

impl SmallInstance {
    pub fn free(&self) -> Vec<usize> {
        (0..self.len)
            .filter(|i| !self.sampled.contains(i))
            .collect()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let l1: f64 = (0..self.rows)
            .map(|r| match &self.phi_complex {
                Some(c) => (0..self.len)
                    .map(|j| c[r * self.len + j] * x[j])
                    .sum::<Complex64>()
                    .norm(),
                None => (0..self.len)
                    .map(|j| self.phi[r * self.len + j] * x[j])
                    .sum::<f64>()
                    .abs(),
            })
            .sum();
        let quad: f64 = x.iter().zip(&self.x0).map(|(a, b)| (a - b) * (a - b)).sum();
        l1 + self.mu / 2.0 * quad
    }
}

/// Equality-constrained LP `min ||Phi x||_1, x_S = y` solved by enumerating
/// vertices: with `d` free coordinates an optimum zeroes `d` independent
/// rows of the residual map.
pub fn lp_vertex_oracle(inst: &SmallInstance) -> (f64, Vec<f64>) {
    assert!(inst.phi_complex.is_none() && inst.eta == 0.0 && inst.mu == 0.0);
    let free = inst.free();
    let d = free.len();
    let mut base = vec![0.0; inst.len];
    for (&i, &v) in inst.sampled.iter().zip(&inst.y) {
        base[i] = v;
    }
    if d == 0 {
        return (inst.objective(&base), base);
    }
    let offset: Vec<f64> = (0..inst.rows)
        .map(|r| {
            (0..inst.len)
                .map(|j| inst.phi[r * inst.len + j] * base[j])
                .sum()
        })
        .collect();
    let mut best = (f64::INFINITY, base.clone());
    for subset in (0..inst.rows).combinations(d) {
        let m = DMatrix::from_fn(d, d, |i, j| inst.phi[subset[i] * inst.len + free[j]]);
        let rhs = DVector::from_fn(d, |i, _| -offset[subset[i]]);
        let Some(z) = m.lu().solve(&rhs) else {
            continue;
        };
        let mut x = base.clone();
        for (k, &f) in free.iter().enumerate() {
            x[f] = z[k];
        }
        let obj = inst.objective(&x);
        if obj.is_finite() && obj < best.0 {
            best = (obj, x);
        }
    }
    best
}

fn ternary(lo: f64, hi: f64, f: &mut dyn FnMut(f64) -> f64) -> (f64, f64) {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..120 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, f(t))
}

/// Strictly convex instances with at most two unknown coordinates: the free
/// coordinates plus, when `eta > 0` and a single sample is taken, the
/// sampled coordinate on `[y - eta, y + eta]`. Solved by nested ternary search.
pub fn ternary_oracle(inst: &SmallInstance) -> (f64, Vec<f64>) {
    assert!(inst.mu > 0.0);
    let mut axes: Vec<(usize, f64, f64)> = Vec::new();
    let bound = 10.0
        * (1.0
            + inst.y.iter().map(|v| v.abs()).sum::<f64>()
            + inst.x0.iter().map(|v| v.abs()).sum::<f64>());
    let mut base = inst.x0.clone();
    for (&i, &v) in inst.sampled.iter().zip(&inst.y) {
        base[i] = v;
        if inst.eta > 0.0 {
            assert_eq!(
                inst.sampled.len(),
                1,
                "ball constraint oracle needs one sample"
            );
            axes.push((i, v - inst.eta, v + inst.eta));
        }
    }
    for f in inst.free() {
        axes.push((f, -bound, bound));
    }
    assert!(!axes.is_empty() && axes.len() <= 2);
    let eval = |u: f64, v: Option<f64>| {
        let mut x = base.clone();
        x[axes[0].0] = u;
        if let Some(v) = v {
            x[axes[1].0] = v;
        }
        inst.objective(&x)
    };
    if axes.len() == 1 {
        let (u, val) = ternary(axes[0].1, axes[0].2, &mut |u| eval(u, None));
        let mut x = base.clone();
        x[axes[0].0] = u;
        return (val, x);
    }
    let inner_min = |u: f64| ternary(axes[1].1, axes[1].2, &mut |v| eval(u, Some(v)));
    let (u, val) = ternary(axes[0].1, axes[0].2, &mut |u| inner_min(u).1);
    let (v, _) = inner_min(u);
    let mut x = base.clone();
    x[axes[0].0] = u;
    x[axes[1].0] = v;
    (val, x)
}

/// Ten LP instances (`eta = 0`, `mu = 0`) with `L <= 8` and up to four unknowns.
pub fn lp_instances() -> Vec<SmallInstance> {
    let mut r = rng(2024);
    (0..10)
        .map(|i| {
            let len = 4 + i % 5;
            let k = len - 1 - (i % 4).min(len - 2);
            let rows = len + 2 + i % 3;
            let mut sampled = rand::seq::index::sample(&mut r, len, k).into_vec();
            sampled.sort_unstable();
            SmallInstance {
                phi: gaussian_vec(&mut r, rows * len),
                phi_complex: None,
                rows,
                len,
                y: gaussian_vec(&mut r, k),
                sampled,
                eta: 0.0,
                mu: 0.0,
                x0: vec![0.0; len],
            }
        })
        .collect()
}

/// Ten regularized instances with complex rows and at most two unknowns.
pub fn smooth_instances() -> Vec<SmallInstance> {
    let mut r = rng(77);
    (0..10)
        .map(|i| {
            let (len, k, eta) = match i % 3 {
                0 => (2, 1, 0.3),
                1 => (5, 3, 0.0),
                _ => (8, 7, 0.0),
            };
            let rows = len + 1 + i % 2;
            let mut sampled = rand::seq::index::sample(&mut r, len, k).into_vec();
            sampled.sort_unstable();
            SmallInstance {
                phi: Vec::new(),
                phi_complex: Some(complex_vec(&mut r, rows * len)),
                rows,
                len,
                y: gaussian_vec(&mut r, k),
                sampled,
                eta,
                mu: 0.2 + 0.3 * i as f64,
                x0: gaussian_vec(&mut r, len),
            }
        })
        .collect()
}
