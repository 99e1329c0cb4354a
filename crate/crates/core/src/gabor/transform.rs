use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{GaborParams, WindowVector};
use crate::error::{check_len, Error, Result};
use crate::operator::AnalysisMap;
use crate::scalar::Real;

/// Upper bound on `P * L` for materialized frame matrices.
pub const MAX_FRAME_ENTRIES: usize = 10_000_000;

/// DGT coefficients, stored n-major (`values[n * rows + m]`).
#[derive(Debug, Clone, PartialEq)]
pub struct GaborCoefficients<T> {
    values: Vec<Complex<T>>,
    rows: usize,
    params: GaborParams,
    positive_frequency: bool,
}

impl<T: Real> GaborCoefficients<T> {
    pub fn zeros(params: GaborParams, positive_frequency: bool) -> Self {
        let rows = params.rows(positive_frequency);
        GaborCoefficients {
            values: vec![Complex::new(T::zero(), T::zero()); rows * params.n_time()],
            rows,
            params,
            positive_frequency,
        }
    }

    pub fn from_flat(
        values: Vec<Complex<T>>,
        params: GaborParams,
        positive_frequency: bool,
    ) -> Result<Self> {
        let rows = params.rows(positive_frequency);
        check_len("coefficient vector", rows * params.n_time(), values.len())?;
        Ok(GaborCoefficients {
            values,
            rows,
            params,
            positive_frequency,
        })
    }

    /// Frequency rows (M, or M/2 + 1 in positive-frequency mode).
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> usize {
        self.params.n_time()
    }

    pub fn params(&self) -> GaborParams {
        self.params
    }

    pub fn positive_frequency(&self) -> bool {
        self.positive_frequency
    }

    pub fn get(&self, m: usize, n: usize) -> Complex<T> {
        self.values[n * self.rows + m]
    }

    pub fn set(&mut self, m: usize, n: usize, v: Complex<T>) {
        self.values[n * self.rows + m] = v;
    }

    pub fn as_flat(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_flat(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn l1_norm(&self) -> T {
        self.values.iter().map(|c| c.norm()).sum()
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .map(|c| c.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// The Gabor analysis operator of a window on a `(L, a, b)` lattice.
///
/// Forward action is the DGT; the adjoint is the matching synthesis sum.
/// Both run in `O(N (L + M log M))`: each time shift folds the windowed
/// signal modulo `M` and takes one length-`M` FFT.
#[derive(Clone)]
pub struct AnalysisOperator<T: Real> {
    window: WindowVector<T>,
    params: GaborParams,
    positive_frequency: bool,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for AnalysisOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalysisOperator")
            .field("kind", &self.window.kind())
            .field("params", &self.params)
            .field("positive_frequency", &self.positive_frequency)
            .finish()
    }
}

impl<T: Real> AnalysisOperator<T> {
    pub fn new(
        window: WindowVector<T>,
        params: GaborParams,
        positive_frequency: bool,
    ) -> Result<Self> {
        check_len("window length vs L", params.len(), window.len())?;
        let mut planner = FftPlanner::new();
        let m = params.m_freq();
        Ok(AnalysisOperator {
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
            window,
            params,
            positive_frequency,
        })
    }

    pub fn window(&self) -> &WindowVector<T> {
        &self.window
    }

    pub fn params(&self) -> GaborParams {
        self.params
    }

    pub fn positive_frequency(&self) -> bool {
        self.positive_frequency
    }

    pub fn rows(&self) -> usize {
        self.params.rows(self.positive_frequency)
    }

    /// Length of the flattened coefficient vector.
    pub fn coefficient_count(&self) -> usize {
        self.rows() * self.params.n_time()
    }

    pub fn dgt(&self, x: &[Complex<T>]) -> Result<GaborCoefficients<T>> {
        check_len("dgt input", self.params.len(), x.len())?;
        let mut out = GaborCoefficients::zeros(self.params, self.positive_frequency);
        self.dgt_into(x, &mut out.values);
        Ok(out)
    }

    pub fn dgt_real(&self, x: &[T]) -> Result<GaborCoefficients<T>> {
        let xc: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.dgt(&xc)
    }

    pub fn dgt_adjoint(&self, c: &GaborCoefficients<T>) -> Result<Vec<Complex<T>>> {
        if c.params != self.params || c.positive_frequency != self.positive_frequency {
            return Err(Error::DimensionMismatch {
                context: "dgt adjoint coefficients",
                expected: self.coefficient_count(),
                found: c.values.len(),
            });
        }
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.params.len()];
        self.adjoint_into(&c.values, &mut out);
        Ok(out)
    }

    /// Lengths must already be validated.
    fn dgt_into(&self, x: &[Complex<T>], out: &mut [Complex<T>]) {
        let len = self.params.len();
        let a = self.params.a();
        let m = self.params.m_freq();
        let rows = self.rows();
        let g = self.window.samples();
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; m];
        let mut scratch = vec![zero; self.forward.get_inplace_scratch_len()];
        for n in 0..self.params.n_time() {
            buf.iter_mut().for_each(|v| *v = zero);
            let shift = n * a;
            for (l, &xl) in x.iter().enumerate() {
                let gi = (l + len - shift) % len;
                buf[l % m] = buf[l % m] + xl * g[gi].conj();
            }
            self.forward.process_with_scratch(&mut buf, &mut scratch);
            out[n * rows..(n + 1) * rows].copy_from_slice(&buf[..rows]);
        }
    }

    fn adjoint_into(&self, c: &[Complex<T>], out: &mut [Complex<T>]) {
        let len = self.params.len();
        let a = self.params.a();
        let m = self.params.m_freq();
        let rows = self.rows();
        let g = self.window.samples();
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; m];
        let mut scratch = vec![zero; self.inverse.get_inplace_scratch_len()];
        out.iter_mut().for_each(|v| *v = zero);
        for n in 0..self.params.n_time() {
            buf[..rows].copy_from_slice(&c[n * rows..(n + 1) * rows]);
            buf[rows..].iter_mut().for_each(|v| *v = zero);
            self.inverse.process_with_scratch(&mut buf, &mut scratch);
            let shift = n * a;
            for (l, o) in out.iter_mut().enumerate() {
                let gi = (l + len - shift) % len;
                *o = *o + g[gi] * buf[l % m];
            }
        }
    }

    /// `max |c[m, n]|` of the analysis coefficients of `x`.
    pub fn sup_norm(&self, x: &[T]) -> Result<T> {
        Ok(self.dgt_real(x)?.max_abs())
    }

    /// Materializes the operator as a `P x L` matrix, rows n-major.
    pub fn frame_matrix(&self) -> Result<FrameMatrix<T>> {
        let len = self.params.len();
        let rows_total = self.coefficient_count();
        let size = rows_total as u128 * len as u128;
        if size > MAX_FRAME_ENTRIES as u128 {
            return Err(Error::TooLarge {
                what: "frame matrix entries",
                size,
                limit: MAX_FRAME_ENTRIES as u128,
            });
        }
        let g = self.window.samples();
        let m_freq = self.params.m_freq();
        let rows = self.rows();
        let mut data = Vec::with_capacity(rows_total * len);
        for n in 0..self.params.n_time() {
            for m in 0..rows {
                for l in 0..len {
                    let gi = (l + len - n * self.params.a()) % len;
                    // exp(-2 pi i m b l / L) = exp(-2 pi i (m l mod M) / M)
                    let phase = -T::TAU() * T::from_usize_lossy((m * l) % m_freq)
                        / T::from_usize_lossy(m_freq);
                    data.push(g[gi].conj() * Complex::from_polar(T::one(), phase));
                }
            }
        }
        Ok(FrameMatrix {
            rows: rows_total,
            cols: len,
            data,
        })
    }
}

impl<T: Real> AnalysisMap<T> for AnalysisOperator<T> {
    fn domain_len(&self) -> usize {
        self.params.len()
    }

    fn range_len(&self) -> usize {
        self.coefficient_count()
    }

    fn forward_real(&self, x: &[T], out: &mut [Complex<T>]) {
        let xc: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.dgt_into(&xc, out);
    }

    fn adjoint_real(&self, c: &[Complex<T>], out: &mut [T]) {
        let mut full = vec![Complex::new(T::zero(), T::zero()); self.params.len()];
        self.adjoint_into(c, &mut full);
        for (o, f) in out.iter_mut().zip(full) {
            *o = f.re;
        }
    }
}

/// Dense complex matrix acting as an analysis operator, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> FrameMatrix<T> {
    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        check_len("frame matrix data", rows * cols, data.len())?;
        Ok(FrameMatrix { rows, cols, data })
    }

    pub fn from_real_rows(rows: usize, cols: usize, data: &[T]) -> Result<Self> {
        Self::from_rows(
            rows,
            cols,
            data.iter().map(|&v| Complex::new(v, T::zero())).collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            data[i * n + i] = Complex::new(T::one(), T::zero());
        }
        FrameMatrix {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.cols + j]
    }

    pub fn apply(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        check_len("frame matrix input", self.cols, x.len())?;
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (&f, &v)| {
                        acc + f * v
                    })
            })
            .collect())
    }

    /// New matrix made of the selected rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FrameMatrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }
}

impl<T: Real> AnalysisMap<T> for FrameMatrix<T> {
    fn domain_len(&self) -> usize {
        self.cols
    }

    fn range_len(&self) -> usize {
        self.rows
    }

    fn forward_real(&self, x: &[T], out: &mut [Complex<T>]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self
                .row(i)
                .iter()
                .zip(x)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (&f, &v)| {
                    acc + f * v
                });
        }
    }

    fn adjoint_real(&self, c: &[Complex<T>], out: &mut [T]) {
        out.iter_mut().for_each(|v| *v = T::zero());
        for (i, ci) in c.iter().enumerate() {
            for (o, f) in out.iter_mut().zip(self.row(i)) {
                *o = *o + (f.conj() * ci).re;
            }
        }
    }
}
