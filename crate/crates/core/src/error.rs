use crate::rational::Rat;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate box on axis {axis}: [{lo}, {hi}) is empty")]
    DegenerateBox { axis: usize, lo: Rat, hi: Rat },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0}: supported dimensions are 1, 2 and 3")]
    UnsupportedDimension(usize),

    #[error("scale must be positive, got {0}")]
    NonPositiveScale(Rat),

    #[error("the zero function has no support extent")]
    EmptySupport,

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("exponents must satisfy q <= alpha <= p, got q={q}, alpha={alpha}, p={p}")]
    ExponentOrder {
        q: String,
        alpha: String,
        p: String,
    },

    #[error("lambda must lie strictly between 0 and the dimension, got {0}")]
    LambdaRange(Rat),

    #[error("scale grid requires 0 < rho_min < rho_max")]
    GridRange,

    #[error("points_per_decade must be at least 4")]
    GridDensity,

    #[error("lattice resolution would materialise {0} cells, beyond the supported scale")]
    LatticeScale(usize),

    #[error("operation requires dimension 1, got {0}")]
    NotOneDimensional(usize),

    #[error("sampling step must be positive, got {0}")]
    NonPositiveStep(f64),

    #[error("sampling steps differ: {0} vs {1}")]
    StepMismatch(f64, f64),

    #[error("mollifier width must be positive, got {0}")]
    NonPositiveWidth(f64),

    #[error("mollifier width {width} is below the sampling step {step}")]
    WidthBelowStep { width: f64, step: f64 },

    #[error("atom {index} is invalid: {reason}")]
    InvalidAtom { index: usize, reason: String },

    #[error("parse error: {0}")]
    Parse(String),
}
