use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Gaussian,
    Hann,
    Hamming,
    Star,
    Custom,
}

impl WindowKind {
    pub const COMPARED: [WindowKind; 4] = [
        WindowKind::Gaussian,
        WindowKind::Hann,
        WindowKind::Hamming,
        WindowKind::Star,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WindowKind::Gaussian => "gaussian",
            WindowKind::Hann => "hann",
            WindowKind::Hamming => "hamming",
            WindowKind::Star => "star",
            WindowKind::Custom => "custom",
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WindowKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(WindowKind::Gaussian),
            "hann" => Ok(WindowKind::Hann),
            "hamming" => Ok(WindowKind::Hamming),
            "star" => Ok(WindowKind::Star),
            "custom" => Ok(WindowKind::Custom),
            other => Err(format!("unknown window kind `{other}`")),
        }
    }
}

/// Window samples on Z_L.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowVector<T> {
    samples: Vec<Complex<T>>,
    kind: WindowKind,
}

impl<T: Real> WindowVector<T> {
    pub fn new(samples: Vec<Complex<T>>, kind: WindowKind) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameters("empty window".into()));
        }
        let norm = samples.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
        if !norm.is_finite() || norm <= T::zero() {
            return Err(Error::InvalidParameters(
                "window must have finite, nonzero norm".into(),
            ));
        }
        Ok(WindowVector { samples, kind })
    }

    pub fn from_real(samples: &[T], kind: WindowKind) -> Result<Self> {
        Self::new(
            samples
                .iter()
                .map(|&s| Complex::new(s, T::zero()))
                .collect(),
            kind,
        )
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn norm(&self) -> T {
        self.samples.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|c| c.im == T::zero())
    }

    /// Rescale to unit Euclidean norm.
    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        for s in &mut self.samples {
            *s = *s / n;
        }
        self
    }
}

/// Standard periodized windows, unit-normalized.
///
/// * Gaussian: `sum_k exp(-pi (l + kL)^2 / L)`, centred on sample 0 (time-frequency ratio 1).
/// * Hann: `0.5 - 0.5 cos(2 pi l / L)`.
/// * Hamming: `0.54 - 0.46 cos(2 pi l / L)`.
pub fn make_window<T: Real>(kind: WindowKind, len: usize) -> Result<WindowVector<T>> {
    if len < 2 {
        return Err(Error::InvalidParameters(format!(
            "window length must be at least 2, got {len}"
        )));
    }
    let lf = len as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let raw: Vec<f64> = match kind {
        WindowKind::Gaussian => (0..len)
            .map(|l| {
                let lf_l = l as f64;
                let gauss = |t: f64| (-std::f64::consts::PI * t * t / lf).exp();
                let mut acc = gauss(lf_l);
                for k in 1..64 {
                    let shift = k as f64 * lf;
                    let term = gauss(lf_l + shift) + gauss(lf_l - shift);
                    acc += term;
                    if term < f64::MIN_POSITIVE {
                        break;
                    }
                }
                acc
            })
            .collect(),
        WindowKind::Hann => (0..len)
            .map(|l| 0.5 - 0.5 * (two_pi * l as f64 / lf).cos())
            .collect(),
        WindowKind::Hamming => (0..len)
            .map(|l| 0.54 - 0.46 * (two_pi * l as f64 / lf).cos())
            .collect(),
        WindowKind::Star | WindowKind::Custom => {
            return Err(Error::InvalidParameters(format!(
                "{kind} windows are not generated by make_window"
            )))
        }
    };
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    let samples: Vec<T> = raw.iter().map(|v| T::lit(v / norm)).collect();
    WindowVector::from_real(&samples, kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hann_of_length_four() {
        let w = make_window::<f64>(WindowKind::Hann, 4).unwrap();
        let n = (0.25f64 + 1.0 + 0.25).sqrt();
        let expect = [0.0, 0.5 / n, 1.0 / n, 0.5 / n];
        for (s, e) in w.samples().iter().zip(expect) {
            assert!((s.re - e).abs() < 1e-15 && s.im == 0.0);
        }
    }

    #[test]
    fn gaussian_is_even_mod_l() {
        for len in [2usize, 15, 33, 45, 100] {
            let w = make_window::<f64>(WindowKind::Gaussian, len).unwrap();
            let s = w.samples();
            for l in 1..len {
                assert!((s[l] - s[len - l]).norm() < 1e-14, "L={len} l={l}");
            }
        }
    }

    #[test]
    fn unit_norm_every_kind() {
        for kind in [WindowKind::Gaussian, WindowKind::Hann, WindowKind::Hamming] {
            for len in [2usize, 3, 33, 45, 1001] {
                let w = make_window::<f64>(kind, len).unwrap();
                assert!((w.norm() - 1.0).abs() < 1e-12);
                assert_eq!(w.len(), len);
            }
            let w32 = make_window::<f32>(kind, 33).unwrap();
            assert!((w32.norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_short_and_unsupported() {
        assert!(make_window::<f64>(WindowKind::Hann, 1).is_err());
        assert!(make_window::<f64>(WindowKind::Star, 33).is_err());
        assert!(WindowVector::<f64>::from_real(&[0.0, 0.0], WindowKind::Custom).is_err());
    }
}
