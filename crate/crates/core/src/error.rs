use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for {len} stations")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("tolerance must be finite and nonnegative, got {0}")]
    InvalidTolerance(f64),

    #[error("series too short: need at least {required} time points, got {n}")]
    SeriesTooShort { required: usize, n: usize },

    #[error("no station/time pairs at the requested lag")]
    EmptyLagSet,

    #[error("kernel half-width {half_width} must be below n/2 (n = {n})")]
    BandwidthTooLarge { half_width: usize, n: usize },

    #[error("need at least two distinct lag norms with nonempty pair sets, found {found}")]
    InsufficientLags { found: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    DomainError(&'static str),

    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    GridTooCoarse { estimate: f64, tolerance: f64 },

    #[error("Hessian of the criterion is singular at the estimate")]
    SingularHessian,

    #[error("too few observations for smoothing half-width {k}: n = {n} gives no complete block")]
    TooFewObservations { n: usize, k: usize },

    #[error("smoothing width {width} is smaller than the number of stations {m}")]
    RankDeficientSmoother { width: usize, m: usize },

    #[error("smoothing width k' = {k_prime} must exceed m - 1 = {}", .m - 1)]
    InvalidSmoother { k_prime: usize, m: usize },

    #[error("spectral matrix of block {block} is not positive definite")]
    SingularMatrix { block: usize },

    #[error("independence test needs at least two stations")]
    DegenerateTest,

    #[error("standard deviation of station {index} must be positive and finite")]
    InvalidSigma { index: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}
