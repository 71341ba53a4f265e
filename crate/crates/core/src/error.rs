use thiserror::Error;

/// Errors produced while building geometry or evaluating checks.
#[derive(Debug, Error)]
pub enum GeomError {
    /// Radial coordinate outside the profile domain `[0, r_max)`.
    #[error("radial coordinate {r} outside profile domain [0, {r_max})")]
    OutOfDomain { r: f64, r_max: f64 },

    /// Shape function became negative along the profile integration.
    #[error("shape function negative at s = {s} (value {value}); profile left its admissible band")]
    ShapeNegative { s: f64, value: f64 },

    /// No horizon root found for a shape-function profile.
    #[error("no simple positive root of the shape function in ({lo}, {hi})")]
    NoHorizonRoot { lo: f64, hi: f64 },

    /// Evaluation at a point where the warping function vanishes.
    #[error("warping function vanishes at r = {r}; connection undefined")]
    LambdaZero { r: f64 },

    /// Symmetric-function index out of range.
    #[error("symmetric function degree k = {k} out of range for n = {n}")]
    DegreeOutOfRange { k: usize, n: usize },

    /// Duplicate or out-of-range omitted indices in a truncated symmetric function.
    #[error("invalid omitted index set: {reason}")]
    BadOmitSet { reason: String },

    /// Surface construction failed.
    #[error("surface construction failed: {0}")]
    SurfaceBuild(String),

    /// Degenerate induced metric at a node.
    #[error("degenerate induced metric at node {node} (det g = {det})")]
    DegenerateMetric { node: usize, det: f64 },

    /// A check was asked to run outside its hypotheses.
    #[error("check precondition failed: {0}")]
    CheckPrecondition(String),

    /// Finite-difference step rejected by the consistency test.
    #[error("finite-difference step h = {h} rejected: {reason}")]
    BadStep { h: f64, reason: String },

    /// Mismatched theorem parameters.
    #[error("invalid parameters for {theorem}: {reason}")]
    TheoremParams { theorem: String, reason: String },
}

pub type Result<T> = std::result::Result<T, GeomError>;
