//! Crate-wide error type.

/// Error raised by any operation in this crate.
#[derive(Debug, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("mixture must have at least one component")]
    EmptyMixture,
    #[error("mixture component {index} has nonpositive variance {variance}")]
    NonPositiveVariance { index: usize, variance: f64 },
    #[error("mixture coefficients must sum to 1, got {sum}")]
    CoefficientSum { sum: f64 },
    #[error("unknown kernel preset '{0}'")]
    UnknownKernelPreset(String),
    #[error("bandwidth must be positive and finite, got {value}")]
    InvalidBandwidth { value: f64 },
    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    QuadratureNoConvergence { achieved: f64, requested: f64 },

    #[error("sample is empty")]
    EmptySample,
    #[error("sample x/y lengths differ: {x_len} vs {y_len}")]
    SampleLengthMismatch { x_len: usize, y_len: usize },
    #[error("sample contains a non-finite value at row {index}")]
    NonFiniteSample { index: usize },
    #[error("sample too small: need at least {needed} observations, got {got}")]
    SampleTooSmall { needed: usize, got: usize },

    #[error("grid needs at least two points")]
    GridTooSmall,
    #[error("grid points must be strictly increasing with constant spacing")]
    GridNotEquispaced,
    #[error("curves are defined on different grids")]
    GridMismatch,
    #[error("curve has {values} values for a grid of {points} points")]
    CurveLengthMismatch { values: usize, points: usize },

    #[error("probability must lie in {required}, got {value}")]
    InvalidProbability { value: f64, required: &'static str },
    #[error("quantile of an empty vector")]
    EmptyQuantileInput,
    #[error("invalid quantile spec: need 0 <= p_lo < p_hi <= 1 and m >= 2")]
    InvalidQuantileSpec,
    #[error("degenerate interquantile interval: both quantiles equal {value}")]
    DegenerateInterval { value: f64 },

    #[error("bandwidth grid must be nonempty, positive and strictly increasing")]
    InvalidBandwidthGrid,
    #[error("no curves to select from")]
    EmptyCurveFamily,
    #[error("constant {name} must be positive, got {value}")]
    InvalidConstant { name: &'static str, value: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
