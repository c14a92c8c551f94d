use thiserror::Error;

use crate::solver::{GridFunction, SolveReport};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("dimension {0} outside the supported range 1..=16")]
    Dimension(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("invalid structure: {0}")]
    Structure(String),
    #[error("Garding root finder failed (residue {residue:e}) for coefficients {coeffs:?}")]
    GardingRoots { residue: f64, coeffs: Vec<f64> },
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("invalid parameters for `{entry}`: {reason}")]
    InvalidParams { entry: String, reason: String },
    #[error("`{0}` carries no Lipschitz bound")]
    MissingLipschitz(String),
    #[error("margin stays nonnegative as the identity shift goes to -1e8")]
    Unbounded,
    #[error("margin never becomes nonnegative along the identity direction")]
    EmptyFiber,
    #[error("degenerate gradient: |grad rho|_g = {0:e}")]
    DegenerateGradient(f64),
    #[error("point outside the chart: {0}")]
    OutsideChart(String),
    #[error("flat nodal update at node {node}: margin does not change sign across the value cap")]
    FlatUpdate { node: usize },
    #[error("nodal margin is not monotone in the center value at node {node}")]
    NonMonotone { node: usize },
    #[error("no convergence after {} sweeps (max update {:e}, residual {:e})", .0.1.sweeps, .0.1.max_update, .0.1.max_margin_residual)]
    NonConvergence(Box<(GridFunction, SolveReport)>),
    #[error("{0} point pairs exceed the 1e8 limit")]
    TooManyPairs(u64),
    #[error("grid: {0}")]
    Grid(String),
    #[error("barrier search failed: {0}")]
    BarrierFailed(String),
}

impl Error {
    pub(crate) fn params(entry: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParams { entry: entry.to_string(), reason: reason.into() }
    }
}
