use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not in so(3,1): membership defect {defect:e}")]
    NotInAlgebra { defect: f64 },

    #[error("matrix is not in SO(3,1): group defect {defect:e}")]
    NotInGroup { defect: f64 },

    #[error("orientation check failed: {what}")]
    Orientation { what: &'static str },

    #[error("Gram-Schmidt column {column} degenerated (<c,c> = {norm2:e})")]
    DegenerateColumn { column: usize, norm2: f64 },

    #[error("invalid chart grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("node ({i}, {j}) has no neighbour in direction {direction:?}")]
    OutOfRange {
        i: usize,
        j: usize,
        direction: crate::chart::Direction,
    },

    #[error("point is not on de Sitter space at node {node}: <f,f> - 1 = {defect:e}")]
    NotOnDeSitter { node: usize, defect: f64 },

    #[error("not an immersion at node {node}: {reason}")]
    NotImmersion { node: usize, reason: String },

    #[error("invalid twistor point at node {node}: {reason}")]
    InvalidTwistorPoint { node: usize, reason: String },

    #[error("algebra element is not horizontal (defect {defect:e})")]
    NotHorizontal { defect: f64 },

    #[error("loop parameter must have unit modulus, got |lambda| = {modulus}")]
    LambdaNotUnit { modulus: f64 },

    #[error("mean curvature is not constant (spread {spread:e} > tolerance {tolerance:e})")]
    NotCmc { spread: f64, tolerance: f64 },

    #[error(
        "Gauss-Codazzi data inconsistent: max Gauss residual {gauss:e}, max Codazzi residual {codazzi:e}, threshold {threshold:e}"
    )]
    Inconsistent { gauss: f64, codazzi: f64, threshold: f64 },

    #[error("adapted frame failed at node {node}: {source}")]
    Frame {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("frame integration failed at node {node}: {source}")]
    Integration {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("Newton solver did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
