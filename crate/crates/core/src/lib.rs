pub mod error;
pub mod expr;
pub mod format;
pub mod geometry;
pub mod kkt;
pub mod linalg;
pub mod lower;
pub mod problems;
pub mod regularity;
pub mod verify;

pub use error::{Error, Result};
pub use expr::{fd_check, parse, Derivatives, EvalPoint, Expr};
pub use geometry::{ConeUnion, DirectionalNeighborhood, PolyCone, SignedCoordinateCone};
pub use lower::{GridSpec, SamplingSchedule, SolutionSample, StationarySample};
pub use problems::{builtin, eval_bundle, load_problem, BilevelProblem, BoxSet};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
