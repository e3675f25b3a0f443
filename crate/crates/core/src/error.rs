use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown identifier `{name}` at column {column}")]
    UnknownIdentifier { name: String, column: usize },
    #[error("variable `{name}` at column {column} is out of range (n={n}, m={m})")]
    VariableOutOfRange { name: String, column: usize, n: usize, m: usize },
    #[error("domain error in `{subexpr}`: {reason}")]
    Domain { subexpr: String, reason: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("probability simplex violated at y={y:?}: sum={sum}, min={min}")]
    Simplex { y: Vec<f64>, sum: f64, min: f64 },
    #[error("point is not in the box set: {0}")]
    NotInBox(String),
    #[error("point is not on the normal-cone graph: {0}")]
    NotOnGraph(String),
    #[error("dimension {0} exceeds the supported limit {1}")]
    DimensionTooLarge(usize, usize),
    #[error("point is not lower-level stationary (residual {0:e})")]
    NotStationary(f64),
    #[error("y is not a lower-level global minimizer (gap {0:e})")]
    NotMinimizer(f64),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("infeasible point: {0}")]
    Infeasible(String),
    #[error("direction is not in the linearized cone")]
    NotInLinearizedCone,
    #[error("lower-level point is on the boundary of Y")]
    NotInterior,
    #[error("direction is not critical: grad F . (u,v) = {0:e}")]
    NotCritical(f64),
    #[error("constraint qualification not established")]
    CqNotEstablished,
    #[error("no multipliers: best residual {0:e}")]
    NoMultipliers(f64),
    #[error("localization track lost at t={0:e}")]
    TrackLost(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
