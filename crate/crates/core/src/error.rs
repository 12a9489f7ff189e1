use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate torus: {0}")]
    DegenerateTorus(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("negative conductance at line {0}")]
    NegativeConductance(usize),
    #[error("non-contractible face {face}: boundary crossing sum is ({a},{b})")]
    NonContractibleFace { face: usize, a: i64, b: i64 },
    #[error("non-cellular embedding: {0}")]
    NonCellular(String),
    #[error("reducible graph: vertex {0} is not joined to vertex 0 by positive-conductance chains")]
    Reducible(usize),
    #[error("inconsistent crossings: {0}")]
    InconsistentCrossings(String),
    #[error("size guard exceeded: {0}")]
    TooLarge(String),
    #[error("forests are not dual: {0}")]
    NotDual(String),
    #[error("no admissible cycle: {0}")]
    NoAdmissibleCycle(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("aliasing estimate {estimate:e} exceeds {limit:e}; use a larger grid")]
    Aliasing { estimate: f64, limit: f64 },
    #[error("total variation increased from {prev:e} to {next:e} at n={n}")]
    NotMonotone { n: usize, prev: f64, next: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("singular linear system")]
    Singular,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
