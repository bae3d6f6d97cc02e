use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate tangent: |x'(θ)| = {jacobian:e} at θ = {theta}")]
    DegenerateTangent { theta: f64, jacobian: f64 },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("need at least {required} samples, got {got}")]
    InsufficientSamples { required: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("radius {r} outside the annulus [{inner}, 1]")]
    OutOfDomain { r: f64, inner: f64 },

    #[error("fundamental solution evaluated at coincident points")]
    CoincidentPoints,

    #[error("normal derivative requested on target points without normals")]
    MissingTargetNormals,

    #[error("self-interaction not supported: {0}")]
    UnsupportedSelfInteraction(String),

    #[error("boundary integral system is singular (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("outer boundary must be the unit circle for this operation")]
    UnsupportedOuterBoundary,

    #[error("noise magnitude {noise:e} is not below the data norm {data:e}")]
    NoiseDominates { noise: f64, data: f64 },

    #[error("every singular value fell below the cut-off")]
    AllModesCut,

    #[error("sampling point ({x}, {y}) is too close to the outer boundary")]
    TooCloseToBoundary { x: f64, y: f64 },

    #[error("level set is empty or not closed inside the sampling region")]
    NoContour,

    #[error("fitted curve is degenerate: {0}")]
    DegenerateFit(String),

    #[error("completion residual {residual:e} exceeds {limit:e}")]
    ResidualTooLarge { residual: f64, limit: f64 },

    #[error("every node was masked out")]
    AllMasked,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
