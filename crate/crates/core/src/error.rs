use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid window [{lo}, {hi}] on a grid with {nx} intervals")]
    InvalidWindow { lo: usize, hi: usize, nx: usize },

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("diffusion not positive: a = {value} at t = {t}, node {node}")]
    NonPositiveDiffusion { value: f64, t: f64, node: usize },

    #[error("zero pivot in tridiagonal solve at row {row}")]
    ZeroPivot { row: usize },

    #[error("non-finite value at time step {step}, node {node}")]
    NonFinite { step: usize, node: usize },

    #[error("bracket not ordered at time step {step}, node {node}: u_hat = {lower} > u_tilde = {upper}")]
    BracketOrder {
        step: usize,
        node: usize,
        lower: f64,
        upper: f64,
    },

    #[error("unknown problem {0:?}")]
    UnknownProblem(String),

    #[error("problem {problem:?}: missing parameter {param:?}")]
    MissingParameter { problem: String, param: String },

    #[error("problem {problem:?}: invalid parameter {param:?}: {reason}")]
    InvalidParameter {
        problem: String,
        param: String,
        reason: String,
    },

    #[error("cannot compute stabilizer: {0}")]
    Stabilizer(String),

    #[error("M-matrix audit failed at time step {step}, row {row}: {detail}")]
    MMatrixAudit {
        step: usize,
        row: usize,
        detail: String,
    },

    #[error("monotone chain violated at sweep {sweep}: {link} at time step {step}, node {node} (margin {margin:e})")]
    ChainViolation {
        sweep: usize,
        link: String,
        step: usize,
        node: usize,
        margin: f64,
    },

    #[error("field shapes differ: {0}")]
    GridMismatch(String),

    #[error("no convergence on grid nx = {nx}, nt = {nt} after {sweeps} sweeps")]
    NotConverged { nx: usize, nt: usize, sweeps: usize },

    #[error("sweep {sweep}: {source}")]
    AtSweep {
        sweep: usize,
        #[source]
        source: Box<Error>,
    },
}
