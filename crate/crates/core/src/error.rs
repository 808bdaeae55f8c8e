use thiserror::Error;

/// Errors raised by the grid, geometry, solver and estimate layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("axis {axis} out of range for complex dimension {n}")]
    AxisOutOfRange { axis: usize, n: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("band limit exceeded: relative content {excess:.3e} above mode {cutoff}")]
    BandLimit { excess: f64, cutoff: usize },

    #[error("metric not positive at node {node}: minimum eigenvalue {min_eig:.6e}")]
    NonPositiveMetric { node: usize, min_eig: f64 },

    #[error("linear solve stalled after {iterations} iterations (relative residual {relative_residual:.3e})")]
    LinearSolveStalled {
        iterations: usize,
        relative_residual: f64,
    },

    #[error("line search failed after {halvings} halvings (residual {residual:.3e})")]
    LineSearchFailed { halvings: usize, residual: f64 },

    #[error("newton iteration did not converge in {iterations} steps (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("field is not invariant along V; offending modes {modes:?}")]
    NotInvariant { modes: Vec<Vec<i64>> },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("trajectory left the working annulus at t = {exit_time:.6e}")]
    Trajectory { exit_time: f64 },

    #[error("continuation failed at eps = {eps}: {source}")]
    Continuation {
        eps: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
