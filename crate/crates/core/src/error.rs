use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("label {0} is not in {{-1, +1}} as required by classification losses")]
    InvalidLabel(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("loss is not strongly convex: {0}")]
    NotStronglyConvex(String),

    #[error("loss constants cannot be certified: {0}")]
    Uncertifiable(String),

    #[error("loss constants have not been certified; call `certify_constants` first")]
    Uncertified,

    #[error("sample {index} has norm {norm} outside the domain radius {radius}")]
    OutOfDomain {
        index: usize,
        norm: f64,
        radius: f64,
    },

    #[error("cannot split {n} samples into {folds} non-empty folds")]
    Partition { n: usize, folds: usize },

    #[error("region {0} is empty; every component needs at least one sample")]
    EmptyRegion(usize),

    #[error("bound is vacuous: {0}")]
    Vacuous(String),

    #[error("grid search needs {points} evaluations, budget is {limit}")]
    BudgetExceeded { points: u128, limit: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed dataset file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
