use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("metric is not positive definite at {point:?}")]
    NonPositiveDefiniteMetric { point: Vec<f64> },

    #[error("point {point:?} lies within {margin:e} of the chart boundary")]
    DomainBoundary { point: Vec<f64>, margin: f64 },

    #[error("sample set is empty")]
    EmptySampleSet,

    #[error("differential has rank below {expected} at {point:?}")]
    RankDeficient { point: Vec<f64>, expected: usize },

    #[error("fiber at {point:?} has vertical rank {found}, expected {expected}")]
    DegenerateFiber { point: Vec<f64>, found: usize, expected: usize },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid curvature scale {0}; must be positive")]
    InvalidCurvature(f64),

    #[error("warping derivative w'(s) = {value} is not positive at s = {s}")]
    NonPositiveDerivative { s: f64, value: f64 },

    #[error("vector is not orthogonal to the gradient (|<X, grad F>| = {0:e})")]
    NotOrthogonal(f64),

    #[error("sample {point:?} lies outside the model domain")]
    SampleOutsideDomain { point: Vec<f64> },

    #[error("grid too coarse: error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    GridTooCoarse { estimate: f64, tolerance: f64 },

    #[error("degenerate triangle {triangle} in assembly")]
    SingularAssembly { triangle: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("eigenvalue curve increases from r = {r_prev} to r = {r_next} by {increase:e}")]
    NotMonotone { r_prev: f64, r_next: f64, increase: f64 },

    #[error("test function vanishes identically")]
    ZeroFunction,

    #[error("test function does not vanish on the Dirichlet boundary (node {node})")]
    NotAdmissible { node: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
