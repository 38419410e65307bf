use thiserror::Error;

use crate::lp::LpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("network is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("`{0}` is not a terminal")]
    NotTerminal(String),
    #[error("network is not quasi-bipartite: non-terminals `{0}` and `{1}` are adjacent")]
    NotQuasiBipartite(String, String),
    #[error("terminals `{0}` and `{1}` are adjacent; subdivide terminal edges first")]
    TerminalEdge(String, String),
    #[error("not series-parallel: {0}")]
    NotSeriesParallel(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("demand vector is zero")]
    ZeroDemand,
    #[error("{what}: {count} candidates exceed budget {budget}")]
    BudgetExceeded {
        what: &'static str,
        count: f64,
        budget: u64,
    },
    #[error("mimicking fit failed: {0}")]
    MimickFitFailed(String),
    #[error("infeasible flow: {0}")]
    InfeasibleFlow(String),
    #[error("inconsistent split log: {0}")]
    InconsistentLog(String),
    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
