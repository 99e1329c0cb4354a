//! Spark-deficient Gabor frames built from eigenvectors of the Zauner
//! metaplectic unitary, and analysis-l1 recovery of signals from randomly
//! subsampled, noisy measurements.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the bottom of this file fix the common concrete choices.

pub mod error;
pub mod gabor;
pub mod harness;
pub mod io;
pub mod modring;
pub mod operator;
pub mod scalar;
pub mod sensing;
pub mod signals;
pub mod solver;
pub mod spark;
pub mod zauner;

pub use error::{Error, Result};
pub use gabor::{
    make_window, AnalysisOperator, FrameMatrix, GaborCoefficients, GaborParams, WindowKind,
    WindowVector,
};
pub use harness::{
    run_experiment, run_experiment_with, ExperimentPlan, ExperimentResult, RunControl, X0Rule,
};
pub use modring::{
    factorize, is_admissible_length, largest_admissible_at_most, mod_inverse, AdmissibilityMode,
    Factorization, Residue,
};
pub use operator::{operator_norm, AnalysisMap};
pub use scalar::Real;
pub use sensing::{stream_seed, EtaRule, MeasurementOperator, NoiseModel};
pub use signals::{load_audio, make_synthetic, AudioOptions, Signal, SyntheticKind, TrimMode};
pub use solver::{mu_from_rule, solve_analysis_l1, MuRule, SolveConfig, SolveResult};
pub use spark::{deficiency_witness_search, spark_exhaustive, Spark, SparkReport};
pub use zauner::{
    metaplectic, star_window, star_window_with, MetaplecticOperator, StarWindow, StarWindowConfig,
    SymplecticMatrix,
};

pub type AnalysisOperator64 = AnalysisOperator<f64>;
pub type AnalysisOperator32 = AnalysisOperator<f32>;
pub type WindowVector64 = WindowVector<f64>;
pub type WindowVector32 = WindowVector<f32>;
pub type FrameMatrix64 = FrameMatrix<f64>;
pub type StarWindow64 = StarWindow<f64>;
pub type StarWindow32 = StarWindow<f32>;
pub type SolveConfig64 = SolveConfig<f64>;
pub type SolveResult64 = SolveResult<f64>;
