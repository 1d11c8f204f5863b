use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Jacobi iteration did not converge within {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NonConvergence { sweeps: usize, off_norm: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("index k = {k} out of range 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension {0} unsupported (1..=16)")]
    UnsupportedDimension(usize),
    #[error("closed-form dual cone only available for k in {{1, 2, n}}, got k = {k} with n = {n}")]
    UnsupportedK { k: usize, n: usize },
    #[error("sample budget must be at least 1")]
    BudgetZero,
    #[error("parameter t = {t} outside (0, {bound})")]
    TOutOfRange { t: f64, bound: f64 },
    #[error("invalid function spec: {0}")]
    InvalidSpec(String),
    #[error("non-finite value at {0}")]
    NonFiniteValue(String),
    #[error("mollification scale {eps} below 3 grid spacings ({min})")]
    EpsilonTooSmall { eps: f64, min: f64 },
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("stencil at {0:?} reaches outside the grid")]
    BoundaryViolation(Vec<usize>),
    #[error("radius must be positive, got {0}")]
    NonpositiveRadius(f64),
    #[error("test function radius {radius} spans fewer than {min_cells} grid spacings")]
    PhiUnderResolved { radius: f64, min_cells: f64 },
    #[error("test function support leaves the grid interior at center {0:?}")]
    PhiOutOfDomain(Vec<f64>),
    #[error("ball around {center:?} with radius {radius} leaves the grid")]
    BallOutOfDomain { center: Vec<f64>, radius: f64 },
    #[error("input is not k-convex on the finest mollification (worst margin {0:e})")]
    NotKConvex(f64),
    #[error("radius schedule exhausted without stabilisation; mass/volume ratios {ratios:?}")]
    ScheduleExhausted { radii: Vec<f64>, ratios: Vec<f64> },
    #[error("Hölder estimate needs k > n/2 (k = {k}, n = {n})")]
    KTooSmall { k: usize, n: usize },
    #[error("exponent q = {q} outside the admissible range for n = {n}, k = {k}")]
    QOutOfRange { q: f64, n: usize, k: usize },
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
