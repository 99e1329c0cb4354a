//! Spark of a finite frame: the size of its smallest linearly dependent
//! subset. Decided exactly for tiny frames by subset enumeration; for larger
//! frames a randomized search can only certify an upper bound.
//!
//! Linear dependence is a numerical-rank question here: a subset counts as
//! dependent when its smallest singular value is at most `rank_tolerance`
//! times its largest. Ranks are always computed in double precision.

use std::fmt;

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gabor::FrameMatrix;
use crate::scalar::Real;

/// Default relative rank tolerance.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Limit on `binomial(P, L)` for exhaustive search.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Spark {
    Exact(usize),
    AtMost(usize),
    Unknown,
}

impl fmt::Display for Spark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spark::Exact(s) => write!(f, "{s}"),
            Spark::AtMost(s) => write!(f, "<= {s}"),
            Spark::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparkReport {
    pub frame_size: usize,
    pub dimension: usize,
    pub spark: Spark,
    /// Row indices of the smallest dependent subset found, ascending.
    pub witness: Option<Vec<usize>>,
    pub exhaustive: bool,
    pub rank_tolerance: f64,
}

impl SparkReport {
    pub fn is_deficient(&self) -> bool {
        match self.spark {
            Spark::Exact(s) | Spark::AtMost(s) => s <= self.dimension,
            Spark::Unknown => false,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl fmt::Display for SparkReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "frame size P    : {}", self.frame_size)?;
        writeln!(f, "dimension L     : {}", self.dimension)?;
        writeln!(f, "spark           : {}", self.spark)?;
        writeln!(
            f,
            "full spark      : {}",
            match (self.spark, self.exhaustive) {
                (Spark::Exact(s), _) => (s == self.dimension + 1).to_string(),
                (Spark::AtMost(_), _) => "no".to_string(),
                (Spark::Unknown, _) => "inconclusive".to_string(),
            }
        )?;
        match &self.witness {
            Some(w) => writeln!(f, "witness         : {w:?}")?,
            None => writeln!(f, "witness         : none")?,
        }
        writeln!(f, "exhaustive      : {}", self.exhaustive)?;
        write!(f, "rank tolerance  : {:e}", self.rank_tolerance)
    }
}

fn to_dense<T: Real>(frame: &FrameMatrix<T>, subset: &[usize]) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(subset.len(), frame.cols(), |i, j| {
        let z = frame.get(subset[i], j);
        Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())
    })
}

/// Ratio `sigma_min / sigma_max` of the rows in `subset`; 0 for a zero block.
///
/// For `|subset| > L` the rows are always dependent and 0 is returned.
pub fn conditioning<T: Real>(frame: &FrameMatrix<T>, subset: &[usize]) -> f64 {
    if subset.len() > frame.cols() {
        return 0.0;
    }
    let sv = to_dense(frame, subset).singular_values();
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    min / max
}

pub fn is_dependent<T: Real>(
    frame: &FrameMatrix<T>,
    subset: &[usize],
    rank_tolerance: f64,
) -> bool {
    conditioning(frame, subset) <= rank_tolerance
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

fn zero_row<T: Real>(frame: &FrameMatrix<T>) -> Option<usize> {
    (0..frame.rows()).find(|&i| frame.row(i).iter().all(|z| z.norm_sqr() == T::zero()))
}

/// Exact spark by enumerating subsets of increasing size. Rows are the
/// frame vectors. If no subset of size `<= L` is dependent the spark is
/// reported as `L + 1`.
pub fn spark_exhaustive<T: Real>(
    frame: &FrameMatrix<T>,
    rank_tolerance: f64,
) -> Result<SparkReport> {
    let (p, l) = (frame.rows(), frame.cols());
    let work = binomial(p, l.min(p));
    if work > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            what: "binomial(P, L) subsets",
            size: work,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let report = |spark, witness| SparkReport {
        frame_size: p,
        dimension: l,
        spark,
        witness,
        exhaustive: true,
        rank_tolerance,
    };
    if let Some(i) = zero_row(frame) {
        return Ok(report(Spark::Exact(1), Some(vec![i])));
    }
    for size in 2..=l.min(p) {
        if let Some(w) = (0..p)
            .combinations(size)
            .find(|subset| is_dependent(frame, subset, rank_tolerance))
        {
            return Ok(report(Spark::Exact(size), Some(w)));
        }
    }
    if p > l {
        // any L + 1 vectors in C^L are dependent
        return Ok(report(Spark::Exact(l + 1), Some((0..=l).collect())));
    }
    Ok(report(Spark::Exact(l + 1), None))
}

/// Drops rows from a dependent subset while it stays dependent.
fn shrink_witness<T: Real>(frame: &FrameMatrix<T>, mut subset: Vec<usize>, tol: f64) -> Vec<usize> {
    let mut i = 0;
    while i < subset.len() && subset.len() > 1 {
        let mut trial = subset.clone();
        trial.remove(i);
        if is_dependent(frame, &trial, tol) {
            subset = trial;
        } else {
            i += 1;
        }
    }
    subset
}

/// Randomized search for a dependent subset of `subset_size` rows.
///
/// A hit is shrunk to a minimal dependent subset and certifies
/// `spark <= |witness|`; no hit is inconclusive.
pub fn deficiency_witness_search<T: Real>(
    frame: &FrameMatrix<T>,
    trials: usize,
    subset_size: usize,
    seed: u64,
    rank_tolerance: f64,
) -> Result<SparkReport> {
    let (p, l) = (frame.rows(), frame.cols());
    if subset_size == 0 || subset_size > l || subset_size > p {
        return Err(Error::InvalidParameters(format!(
            "subset size {subset_size} must lie in 1..=min(P={p}, L={l})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let mut subset = sample(&mut rng, p, subset_size).into_vec();
        subset.sort_unstable();
        if is_dependent(frame, &subset, rank_tolerance) {
            let w = shrink_witness(frame, subset, rank_tolerance);
            return Ok(SparkReport {
                frame_size: p,
                dimension: l,
                spark: Spark::AtMost(w.len()),
                witness: Some(w),
                exhaustive: false,
                rank_tolerance,
            });
        }
    }
    Ok(SparkReport {
        frame_size: p,
        dimension: l,
        spark: Spark::Unknown,
        witness: None,
        exhaustive: false,
        rank_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    fn random_frame(p: usize, l: usize, seed: u64) -> FrameMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..p * l)
            .map(|_| {
                Complex::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            })
            .collect();
        FrameMatrix::from_rows(p, l, data).unwrap()
    }

    #[test]
    fn identity_has_no_dependency() {
        let r = spark_exhaustive(&FrameMatrix::<f64>::identity(4), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.spark, Spark::Exact(5));
        assert!(r.witness.is_none());
        assert!(!r.is_deficient());
    }

    #[test]
    fn zero_vector_gives_spark_one() {
        let f = FrameMatrix::<f64>::from_real_rows(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let r = spark_exhaustive(&f, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.spark, Spark::Exact(1));
        assert_eq!(r.witness, Some(vec![1]));
    }

    #[test]
    fn duplicated_row_gives_spark_two() {
        let mut f = random_frame(5, 3, 4);
        let dup = f.select_rows(&[0, 1, 2, 3, 1]);
        f = dup;
        let r = spark_exhaustive(&f, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.spark, Spark::Exact(2));
        assert_eq!(r.witness, Some(vec![1, 4]));
    }

    #[test]
    fn random_frames_are_full_spark() {
        let f = random_frame(10, 5, 9);
        let r = spark_exhaustive(&f, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.spark, Spark::Exact(6));
        let w = deficiency_witness_search(&f, 1000, 5, 3, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(w.spark, Spark::Unknown);
        assert!(!w.exhaustive && w.witness.is_none());
    }

    #[test]
    fn zero_trials_is_inconclusive() {
        let f = random_frame(6, 3, 1);
        let r = deficiency_witness_search(&f, 0, 3, 0, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.spark, Spark::Unknown);
        assert!(deficiency_witness_search(&f, 1, 4, 0, DEFAULT_RANK_TOL).is_err());
    }

    #[test]
    fn guard_rejects_large_enumeration() {
        let f = random_frame(40, 20, 1);
        assert!(matches!(
            spark_exhaustive(&f, DEFAULT_RANK_TOL),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn witness_search_shrinks_to_minimal_set() {
        // rows 0 and 3 are parallel, everything else generic
        let base = random_frame(6, 4, 11);
        let mut rows: Vec<Complex<f64>> = Vec::new();
        for i in 0..6 {
            if i == 3 {
                rows.extend(base.row(0).iter().map(|z| z * Complex::new(0.0, 2.0)));
            } else {
                rows.extend_from_slice(base.row(i));
            }
        }
        let f = FrameMatrix::from_rows(6, 4, rows).unwrap();
        let r = deficiency_witness_search(&f, 200, 4, 5, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.spark, Spark::AtMost(2));
        assert_eq!(r.witness, Some(vec![0, 3]));
    }

    #[test]
    fn json_round_trip() {
        let r = spark_exhaustive(&random_frame(4, 2, 2), DEFAULT_RANK_TOL).unwrap();
        let back = SparkReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(r, back);
        assert!(r.to_string().contains("spark           : 3"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn permutation_keeps_spark(seed in 0u64..1000, shift in 1usize..6) {
            // one duplicated pair so that the spark is 2
            let base = random_frame(6, 3, seed);
            let f = base.select_rows(&[0, 1, 2, 3, 4, 5, 2]);
            let perm: Vec<usize> = (0..7).map(|i| (i + shift) % 7).collect();
            let g = f.select_rows(&perm);
            let rf = spark_exhaustive(&f, DEFAULT_RANK_TOL).unwrap();
            let rg = spark_exhaustive(&g, DEFAULT_RANK_TOL).unwrap();
            prop_assert_eq!(rf.spark, rg.spark);
            let wg: Vec<usize> = rg.witness.unwrap().iter().map(|&i| perm[i]).sorted().collect();
            prop_assert!(is_dependent(&f, &wg, DEFAULT_RANK_TOL));
        }
    }
}
