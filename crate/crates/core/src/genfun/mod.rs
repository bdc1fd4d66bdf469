//! The partition function `F(x, y)` of fully parked trees.
//!
//! Two independent pipelines compute its coefficients:
//!
//! - [`functional`] solves the catalytic equation
//!   `F = (x/y)(B(y)/(1-F) - b_0/(1-F_0))` order by order in `x`;
//! - [`param`] builds the explicit parametrization `x = x̂(Y)`,
//!   `F = F̂(Y, y)` and composes it with `Y = Ŷ(x)`.
//!
//! [`identities`] checks the algebraic identities tying the parametrization
//! together, and [`eval`] holds the pointwise big-float evaluators used by
//! the phase and asymptotics code.

pub mod eval;
pub mod functional;
pub mod identities;
pub mod param;

use thiserror::Error;

use crate::powseries::SeriesError;
use crate::weights::WeightError;

pub use functional::solve_functional_equation;
pub use param::{build_parametrization, consistency_compose, Bundle, ParamSeries};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenfunError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error("identity violated: {0}")]
    Identity(String),
}

pub type Result<T> = std::result::Result<T, GenfunError>;
