//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index ({row}, {col}) out of range for dimension {n}")]
    IndexOutOfRange { row: usize, col: usize, n: usize },

    #[error("asymmetric input: entries ({i}, {j}) and ({j}, {i}) disagree ({a} vs {b})")]
    AsymmetricInput { i: usize, j: usize, a: f64, b: f64 },

    #[error("non-finite value at ({row}, {col})")]
    NonFiniteValue { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },

    #[error("unsupported Matrix Market kind: {0}")]
    UnsupportedKind(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("shift {re}+{im}i is numerically on the spectrum (pivot {pivot:e} below threshold)")]
    SingularShift { re: f64, im: f64, pivot: f64 },

    #[error("invalid quadrature node count {0}: must be even and >= 2")]
    InvalidNodeCount(usize),

    #[error("sketch is numerically rank deficient: rank {rank} < requested {requested}")]
    RankDeficientSketch { rank: usize, requested: usize },

    #[error("invalid spectrum ordering: beta_m0 = {beta_m0}, beta_m0_plus_1 = {beta_m1}")]
    InvalidSpectrum { beta_m0: f64, beta_m1: f64 },

    #[error("oversampling p = {0} too small (need p >= 2)")]
    InvalidOversampling(usize),

    #[error("degenerate eigengap: beta_m0 = beta_m0_plus_1 = {0}")]
    DegenerateGap(f64),

    #[error("no Ritz value inside the target window")]
    EmptySelection,

    #[error("trace too short: {0} usable points (need at least 3)")]
    InsufficientTrace(usize),

    #[error("matrix of dimension {n} exceeds the dense-oracle guard ({guard})")]
    TooLargeForOracle { n: usize, guard: usize },

    #[error("approximate list longer than truth: {approx} > {truth}")]
    LengthMismatch { approx: usize, truth: usize },

    #[error("matrix is not symmetric: |a_ij - a_ji| = {deviation:e} at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize, deviation: f64 },

    #[error("eigensolver failed to converge after {0} implicit-shift sweeps")]
    NoConvergence(usize),
}
