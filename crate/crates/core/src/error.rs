use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty compact set")]
    EmptySet,
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate box (zero volume)")]
    DegenerateBox,
    #[error("gradient undefined on K")]
    GradientOnSet,
    #[error("point on (numerical) medial axis")]
    OnMedialAxis,
    #[error("crossed medial axis (t = {t} > tau = {tau})")]
    CrossedMedialAxis { t: f64, tau: f64 },
    #[error("ray never meets the medial axis")]
    NoMedialCrossing,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("E/bounding box mismatch (acceptance rate {rate:.2e})")]
    LowAcceptance { rate: f64 },
    #[error("unbalanced totals: {left} vs {right}")]
    Unbalanced { left: f64, right: f64 },
    #[error("measure too large for the exact solver: {atoms} atoms (limit {limit})")]
    TooManyAtoms { atoms: usize, limit: usize },
    #[error("tube formula invalid beyond reach (r = {r}, reach = {reach})")]
    BeyondReach { r: f64, reach: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by malformed input rather than by the model.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Io(_) | Error::InvalidPoint(_) | Error::DimensionMismatch { .. })
    }
}
