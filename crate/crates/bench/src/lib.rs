//! Shared fixtures for the criterion benches.

use bdfoa_core::problems::{builtin, BilevelProblem};

pub fn problem(name: &str) -> BilevelProblem {
    builtin(name).expect("builtin problem")
}
