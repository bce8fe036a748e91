use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors raised by the numerical kernels.
///
/// Variants carry enough context to be reported but no backtraces; every
/// error is a plain value and can be compared in tests.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Jacobi sweeps exhausted without reaching the orthogonality tolerance.
    NonConvergence {
        sweeps: usize,
        off: f64,
    },
    /// A matrix expected to be invertible has s_m below the relative threshold.
    SingularInput {
        smallest: f64,
        largest: f64,
    },
    /// Argument outside the domain of a function.
    Domain(String),
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    /// Signature not strictly increasing, empty, or touching the ambient dimension.
    InvalidSignature(String),
    SignatureMismatch,
    /// Requested τ-gap does not hold at the given index.
    NoGap {
        index: usize,
        ratio: f64,
    },
    NotNested,
    NotUnit,
    OutsideStrip,
    SingularOnTorus {
        point: Vec<f64>,
    },
    SingularOnOrbit {
        step: usize,
    },
    ProductDegenerate,
    AlphaDegenerate {
        alpha: f64,
    },
    /// A hypothesis of an inequality check fails; the string names it.
    HypothesisFailed(String),
    SamplingExhausted,
    GridMismatch,
    GapLost {
        radius: f64,
    },
    UnknownName(String),
    /// Malformed cocycle data (conjugate symmetry, shapes, ...).
    InvalidCocycle(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonConvergence { sweeps, off } => {
                write!(f, "jacobi svd did not converge after {sweeps} sweeps (off = {off:e})")
            }
            Error::SingularInput { smallest, largest } => {
                write!(f, "matrix is numerically singular (s_min = {smallest:e}, s_max = {largest:e})")
            }
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidSignature(msg) => write!(f, "invalid signature: {msg}"),
            Error::SignatureMismatch => write!(f, "signatures differ"),
            Error::NoGap { index, ratio } => {
                write!(f, "no gap at index {index} (s_j/s_j+1 = {ratio})")
            }
            Error::NotNested => write!(f, "subspaces are not nested"),
            Error::NotUnit => write!(f, "vector is not a unit vector"),
            Error::OutsideStrip => write!(f, "point lies outside the analyticity strip"),
            Error::SingularOnTorus { point } => {
                write!(f, "cocycle is singular on the torus near x = {point:?}")
            }
            Error::SingularOnOrbit { step } => write!(f, "singular matrix along orbit at step {step}"),
            Error::ProductDegenerate => write!(f, "matrix product is degenerate"),
            Error::AlphaDegenerate { alpha } => {
                write!(f, "expansivity factor is degenerate (alpha = {alpha:e})")
            }
            Error::HypothesisFailed(what) => write!(f, "hypothesis failed: {what}"),
            Error::SamplingExhausted => write!(f, "no admissible sample found"),
            Error::GridMismatch => write!(f, "grids or signatures of the two fields differ"),
            Error::GapLost { radius } => write!(f, "perturbation at radius {radius:e} loses the gap"),
            Error::UnknownName(name) => write!(f, "unknown name: {name}"),
            Error::InvalidCocycle(msg) => write!(f, "invalid cocycle: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
