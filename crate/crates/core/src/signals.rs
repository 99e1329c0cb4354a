//! Test signals: the synthetic Cusp, Ramp and Sing generators, and mono WAV
//! ingestion trimmed to an admissible length.
//!
//! With `t_l = (l + 1) / L` for `l = 0..L`:
//!
//! | kind | formula |
//! |------|---------|
//! | cusp | `sqrt(abs(t - 0.37))` |
//! | ramp | `t - 1{t >= 0.37}` |
//! | sing | `1 / abs(t - (floor(0.37 L) + 0.5) / L)` |
//!
//! Synthetic signals are not normalized; audio is scaled to unit peak.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modring::{is_admissible_length, largest_admissible_at_most, AdmissibilityMode};
use crate::scalar::Real;

const KINK: f64 = 0.37;
pub const MIN_SYNTHETIC_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyntheticKind {
    Cusp,
    Ramp,
    Sing,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 3] = [
        SyntheticKind::Cusp,
        SyntheticKind::Ramp,
        SyntheticKind::Sing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::Cusp => "cusp",
            SyntheticKind::Ramp => "ramp",
            SyntheticKind::Sing => "sing",
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cusp" => Ok(SyntheticKind::Cusp),
            "ramp" => Ok(SyntheticKind::Ramp),
            "sing" => Ok(SyntheticKind::Sing),
            other => Err(Error::InvalidParameters(format!(
                "unknown signal kind '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal<T> {
    samples: Vec<T>,
    label: String,
    sample_rate: Option<u32>,
}

impl<T: Real> Signal<T> {
    pub fn new(
        samples: Vec<T>,
        label: impl Into<String>,
        sample_rate: Option<u32>,
    ) -> Result<Self> {
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameters(
                "signal has non-finite samples".into(),
            ));
        }
        Ok(Signal {
            samples,
            label: label.into(),
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn sample_rate(&self) -> Option<u32> {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn norm(&self) -> T {
        self.samples.iter().map(|&v| v * v).sum::<T>().sqrt()
    }
}

pub fn make_synthetic<T: Real>(kind: SyntheticKind, len: usize) -> Result<Signal<T>> {
    if len < MIN_SYNTHETIC_LEN {
        return Err(Error::InvalidParameters(format!(
            "synthetic signals need length >= {MIN_SYNTHETIC_LEN}, got {len}"
        )));
    }
    let lf = len as f64;
    let spike = ((KINK * lf).floor() + 0.5) / lf;
    let samples = (1..=len)
        .map(|i| {
            let t = i as f64 / lf;
            let v = match kind {
                SyntheticKind::Cusp => (t - KINK).abs().sqrt(),
                SyntheticKind::Ramp => t - if t >= KINK { 1.0 } else { 0.0 },
                SyntheticKind::Sing => 1.0 / (t - spike).abs(),
            };
            T::lit(v)
        })
        .collect();
    Signal::new(samples, kind.name(), None)
}

/// How the retained length of an audio file is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrimMode {
    /// Largest admissible length fitting after the offset.
    Auto,
    /// Exactly this length; it must be admissible.
    Explicit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AudioOptions {
    pub trim: TrimMode,
    /// Samples skipped before the retained region.
    pub offset: usize,
    pub admissibility: AdmissibilityMode,
}

impl Default for AudioOptions {
    fn default() -> Self {
        AudioOptions {
            trim: TrimMode::Auto,
            offset: 0,
            admissibility: AdmissibilityMode::Paper,
        }
    }
}

/// Reads a mono PCM (integer or float) WAV file, keeps `L` samples starting at
/// the offset and scales them to unit peak.
pub fn load_audio<T: Real>(path: impl AsRef<Path>, opts: AudioOptions) -> Result<Signal<T>> {
    let path = path.as_ref();
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::UnsupportedFormat(format!(
            "{} channels; only mono is supported",
            spec.channels
        )));
    }
    let raw: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Int => {
            if spec.bits_per_sample > 32 {
                return Err(Error::UnsupportedFormat(format!(
                    "{}-bit integer samples",
                    spec.bits_per_sample
                )));
            }
            let scale = (1u64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()?
        }
        hound::SampleFormat::Float => {
            if spec.bits_per_sample != 32 {
                return Err(Error::UnsupportedFormat(format!(
                    "{}-bit float samples",
                    spec.bits_per_sample
                )));
            }
            reader
                .samples::<f32>()
                .map(|s| s.map(f64::from))
                .collect::<std::result::Result<_, _>>()?
        }
    };

    let available = raw.len().saturating_sub(opts.offset);
    if available < 3 {
        return Err(Error::FileTooShort {
            needed: opts.offset + 3,
            available: raw.len(),
        });
    }
    let len = match opts.trim {
        TrimMode::Auto => {
            largest_admissible_at_most(available as u64, opts.admissibility)? as usize
        }
        TrimMode::Explicit(len) => {
            if len < 3 || !is_admissible_length(len as u64, opts.admissibility)?.0 {
                return Err(Error::NotAdmissible {
                    n: len as u64,
                    mode: opts.admissibility,
                });
            }
            len
        }
    };
    if len > available {
        return Err(Error::FileTooShort {
            needed: opts.offset + len,
            available: raw.len(),
        });
    }
    let kept = &raw[opts.offset..opts.offset + len];
    let peak = kept.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::MalformedInput {
            path: path.to_path_buf(),
            reason: "retained region is silent".into(),
        });
    }
    let label = path
        .file_stem()
        .map_or_else(|| "audio".to_string(), |s| s.to_string_lossy().into_owned());
    Signal::new(
        kept.iter().map(|&v| T::lit(v / peak)).collect(),
        label,
        Some(spec.sample_rate),
    )
}
