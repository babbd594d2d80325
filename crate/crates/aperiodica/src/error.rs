//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by library operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Fewer points than the operation can work with.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// A 1D sequence operation needs the origin to be a point of the set.
    #[error("origin required: the point set must contain 0")]
    OriginRequired,

    /// Construction of a point set violated an invariant.
    #[error("invalid point set: {0}")]
    InvalidPointSet(String),

    /// The sampled region is too small for the requested computation.
    #[error("region too small: {0}")]
    RegionTooSmall(String),

    /// A patch was requested at a center whose ball leaves the region.
    #[error("boundary patch: ball of radius {radius} around point {index} leaves the region")]
    BoundaryPatch { index: usize, radius: f64 },

    /// The lattice basis is not invertible.
    #[error("singular basis: |det| = {det:e}")]
    SingularBasis { det: f64 },

    /// The physical projection is numerically non-injective.
    #[error("injectivity witness failed: lattice vector q = {q:?} has physical norm {norm:e}")]
    InjectivityFailure { q: Vec<i64>, norm: f64 },

    /// A window definition is unusable.
    #[error("invalid window: {0}")]
    InvalidWindow(String),

    /// Unknown built-in scheme name.
    #[error("unknown builtin scheme '{0}' (expected 'fibonacci' or 'octagonal')")]
    UnknownBuiltin(String),

    /// An empty word cannot tile the line.
    #[error("empty word")]
    EmptyWord,

    /// Interval lengths must be positive and finite.
    #[error("invalid length for symbol '{symbol}': {value}")]
    InvalidLength { symbol: char, value: f64 },

    /// The hull-metric sample does not cover the window needed at the
    /// requested precision.
    #[error("sample too small for requested precision")]
    InsufficientSample,

    /// Oscillatory quadrature step fails the phase-resolution rule.
    #[error("quadrature step too coarse: {0}")]
    QuadratureStep(String),

    /// A symmetry candidate matrix is not orthogonal.
    #[error("matrix is not orthogonal (||V^T V - I|| = {deviation:e})")]
    NotOrthogonal { deviation: f64 },

    /// The consistency identity received a kernel/comb pair with
    /// non-positive left-hand side.
    #[error("degenerate kernel/comb: left-hand side {lhs}")]
    DegenerateKernel { lhs: f64 },

    /// Invalid run configuration (CLI level).
    #[error("invalid config: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
