use thiserror::Error;

use crate::half::HalfInt;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix is not Hermitian (relative deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("input vector has a component of norm {residual:e} outside the ambient span")]
    InconsistentSpan { residual: f64 },

    #[error("local dimension must be at least 2, got {0}")]
    BadDimension(usize),

    #[error("invalid system size: {0}")]
    BadSystem(String),

    #[error("dimension {dim} exceeds the budget of {budget}")]
    DimensionBudgetExceeded { dim: usize, budget: usize },

    #[error("rotation angle theta_{axis} = {theta} is zero or too large for spectrum width {width}")]
    DegenerateAngle { axis: char, theta: f64, width: f64 },

    #[error("weight {m}: orthocomplement has dimension {found}, expected {expected}")]
    RankMismatch { m: HalfInt, expected: usize, found: usize },

    #[error("raising a block-{j} vector collapsed at weight {m} (norm {norm:e})")]
    LiftCollapse { j: HalfInt, m: HalfInt, norm: f64 },

    #[error("weight {m} outside [-{ns}, {ns}]")]
    OutOfRange { m: HalfInt, ns: HalfInt },

    #[error("no irrep block with j = {0}")]
    UnknownBlock(HalfInt),

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("state leaks out of the code block (leakage {0})")]
    BlockLeakage(f64),

    #[error("invalid basis label: {0}")]
    InvalidLabel(String),

    #[error("invalid tolerances: {0}")]
    InvalidTolerance(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
