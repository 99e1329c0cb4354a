use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice triple `(L, a, b)` together with the derived shift counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaborParams {
    len: usize,
    a: usize,
    b: usize,
}

impl GaborParams {
    pub fn new(len: usize, a: usize, b: usize) -> Result<Self> {
        if len == 0 || a == 0 || b == 0 {
            return Err(Error::InvalidParameters(format!(
                "L, a, b must be positive (got L={len}, a={a}, b={b})"
            )));
        }
        if !len.is_multiple_of(a) || !len.is_multiple_of(b) {
            return Err(Error::InvalidParameters(format!(
                "a={a} and b={b} must both divide L={len}"
            )));
        }
        Ok(GaborParams { len, a, b })
    }

    /// Ambient dimension L.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Time step.
    pub fn a(&self) -> usize {
        self.a
    }

    /// Frequency step.
    pub fn b(&self) -> usize {
        self.b
    }

    /// Number of time shifts, `L / a`.
    pub fn n_time(&self) -> usize {
        self.len / self.a
    }

    /// Number of frequency shifts, `L / b`.
    pub fn m_freq(&self) -> usize {
        self.len / self.b
    }

    /// Frame size `M * N = L^2 / (a b)`.
    pub fn frame_size(&self) -> usize {
        self.n_time() * self.m_freq()
    }

    /// Frequency rows kept in positive-frequency mode.
    pub fn positive_rows(&self) -> usize {
        self.m_freq() / 2 + 1
    }

    pub fn rows(&self, positive_frequency: bool) -> usize {
        if positive_frequency {
            self.positive_rows()
        } else {
            self.m_freq()
        }
    }

    /// `a * b < L`, i.e. the system is redundant enough to be a frame.
    pub fn is_redundant(&self) -> bool {
        self.a * self.b < self.len
    }
}

impl fmt::Display for GaborParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.len, self.a, self.b)
    }
}
