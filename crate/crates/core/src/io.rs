//! Plain-text CSV files for vectors, windows and DGT coefficients.
//!
//! Real vectors use a single `value` column, complex vectors and windows use
//! `re,im`, and coefficients use `m,n,re,im`. Numbers are written in the
//! shortest form that parses back to the same value.

use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gabor::{GaborCoefficients, WindowKind, WindowVector};
use crate::scalar::Real;

#[derive(Serialize, Deserialize)]
struct RealRow {
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct ComplexRow {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct CoefficientRow {
    m: usize,
    n: usize,
    re: f64,
    im: f64,
}

fn malformed(path: &Path, err: csv::Error) -> Error {
    Error::MalformedInput {
        path: path.to_path_buf(),
        reason: err.to_string(),
    }
}

fn read_rows<R: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<R>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<R>, _>>()
        .map_err(|e| malformed(path, e))
}

fn write_rows<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_real_vector<T: Real>(path: impl AsRef<Path>, values: &[T]) -> Result<()> {
    write_rows(
        path.as_ref(),
        values.iter().map(|v| RealRow {
            value: v.to_f64_lossy(),
        }),
    )
}

/// Reads a real vector; a file with `re,im` columns is accepted when every
/// imaginary part is zero.
pub fn read_real_vector<T: Real>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let headers = csv::Reader::from_path(path)?.headers()?.clone();
    if headers.iter().any(|h| h.trim() == "re") {
        let values = read_complex_vector::<T>(path)?;
        if values.iter().any(|z| z.im != T::zero()) {
            return Err(Error::MalformedInput {
                path: path.to_path_buf(),
                reason: "expected a real signal but found nonzero imaginary parts".into(),
            });
        }
        return Ok(values.into_iter().map(|z| z.re).collect());
    }
    Ok(read_rows::<RealRow>(path)?
        .into_iter()
        .map(|r| T::lit(r.value))
        .collect())
}

pub fn write_complex_vector<T: Real>(path: impl AsRef<Path>, values: &[Complex<T>]) -> Result<()> {
    write_rows(
        path.as_ref(),
        values.iter().map(|z| ComplexRow {
            re: z.re.to_f64_lossy(),
            im: z.im.to_f64_lossy(),
        }),
    )
}

pub fn read_complex_vector<T: Real>(path: impl AsRef<Path>) -> Result<Vec<Complex<T>>> {
    Ok(read_rows::<ComplexRow>(path.as_ref())?
        .into_iter()
        .map(|r| Complex::new(T::lit(r.re), T::lit(r.im)))
        .collect())
}

pub fn write_window<T: Real>(path: impl AsRef<Path>, window: &WindowVector<T>) -> Result<()> {
    write_complex_vector(path, window.samples())
}

/// Loads a window saved by [`write_window`]; it is not renormalized.
pub fn read_window<T: Real>(path: impl AsRef<Path>, kind: WindowKind) -> Result<WindowVector<T>> {
    WindowVector::new(read_complex_vector(path)?, kind)
}

pub fn write_coefficients<T: Real>(path: impl AsRef<Path>, c: &GaborCoefficients<T>) -> Result<()> {
    let rows = c.rows();
    write_rows(
        path.as_ref(),
        c.as_flat().iter().enumerate().map(|(i, z)| CoefficientRow {
            m: i % rows,
            n: i / rows,
            re: z.re.to_f64_lossy(),
            im: z.im.to_f64_lossy(),
        }),
    )
}
