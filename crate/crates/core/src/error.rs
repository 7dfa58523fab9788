use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    /// The columns are not linearly independent over ℝ.
    ///
    /// `dependent` lists the columns that lie (numerically) in the ℝ-span of
    /// the columns before them.
    #[error("{context}: numerical ℝ-rank {rank} < {expected} (dependent columns {dependent:?})")]
    RankDeficient {
        context: String,
        rank: usize,
        expected: usize,
        dependent: Vec<usize>,
    },

    #[error("matrix is not skew-symmetric (‖A + Aᵀ‖_F = {residual:e})")]
    NotSkewSymmetric { residual: f64 },

    #[error("coupling {value} outside [0, 1]")]
    InvalidCoupling { value: f64 },

    #[error("power must be positive and finite, got {0}")]
    InvalidPower(f64),

    #[error("noise variance must be positive and finite, got {0}")]
    InvalidNoise(f64),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("selector matrix is not a column-sampled identity: {0}")]
    MalformedSelector(String),

    #[error("observation matrix does not identify the parameters")]
    NonIdentifiable,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
