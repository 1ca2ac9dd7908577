use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SvemError {
    #[error("no embedded conference matrix of order {order} (supported: 6, 8, 10, 12)")]
    UnsupportedOrder { order: usize },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("all weights are zero")]
    DegenerateWeights,

    #[error("weight {index} is negative or not finite")]
    InvalidWeight { index: usize },

    #[error("lasso coordinate descent did not converge at lambda index {lambda_index}")]
    NoConvergence { lambda_index: usize },

    #[error("no path point is feasible for the information criterion (n = {n})")]
    CriterionInfeasible { n: usize },

    #[error("invalid selector configuration: {0}")]
    InvalidSpec(String),

    #[error("observed values have zero variance")]
    DegenerateVariance,

    #[error("degenerate scenario: {0}")]
    DegenerateScenario(String),

    #[error("factor count mismatch: model expects {expected}, design has {found}")]
    FactorMismatch { expected: usize, found: usize },

    #[error("bootstrap iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<SvemError>,
    },

    #[error("replicate {replicate}, method {method}: {source}")]
    Replicate {
        replicate: usize,
        method: String,
        #[source]
        source: Box<SvemError>,
    },

    #[error("invalid term: {0}")]
    InvalidTerm(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub type Result<T, E = SvemError> = std::result::Result<T, E>;
