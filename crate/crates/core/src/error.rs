use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Young function: {0}")]
    InvalidYoung(String),

    #[error("invalid measure space: {0}")]
    InvalidSpace(String),

    #[error("invalid sub-σ-algebra: {0}")]
    InvalidAlgebra(String),

    #[error("unknown cell id `{0}`")]
    UnknownCell(String),

    #[error("cell `{0}` is an atom and cannot be refined")]
    RefineAtom(String),

    #[error("carve failure: {0}")]
    CarveFailure(String),

    #[error("function is not measurable with respect to the sub-σ-algebra: {0}")]
    NotMeasurable(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("premise violated: {what} (worst point {point:?}, excess {excess:e})")]
    PremiseViolation {
        what: String,
        point: Vec<f64>,
        excess: f64,
    },

    #[error("no finite k with modular(f/k) <= 1 below {0:e}")]
    NormUnbounded(f64),

    #[error("witness search failed at n = {n}: {reason}")]
    SearchFailure { n: usize, reason: String },

    #[error("division by zero expectation on block `{0}`")]
    DivisionDegenerate(String),

    #[error("formula error: {0}")]
    Formula(String),

    #[error("request error at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn premise(what: impl Into<String>, point: Vec<f64>, excess: f64) -> Self {
        Error::PremiseViolation {
            what: what.into(),
            point,
            excess,
        }
    }

    pub(crate) fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}
