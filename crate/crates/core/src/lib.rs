//! Exact and asymptotic enumeration of fully parked trees.
//!
//! A fully parked (fully packed) tree is a rooted plane tree with a
//! nonnegative integer label on every vertex such that every subtree has
//! nonnegative surplus `sum(label - 1)`. Weighting each vertex by `b_label`
//! and marking vertices with `x` and root surplus with `y` gives the
//! partition function `F(x, y)`.
//!
//! The crate is organised as follows:
//!
//! - [`powseries`]: truncated univariate and bivariate power series over
//!   exact rationals or MPFR floats, with composition, reversion and
//!   square roots.
//! - [`weights`]: car-arrival weight sequences `b`, their generating
//!   function `B` and its singular data.
//! - [`genfun`]: the catalytic functional equation for `F`, the explicit
//!   parametrization `x = x̂(Y)`, `F = F̂(Y, y)` and its identity suite.
//! - [`phase`]: generic / dilute / dense classification and the critical
//!   point `(x_c, Y_c)`.
//! - [`asymptotics`]: non-universal constants, universal exponents, the
//!   scaling function `I_α` and asymptotic predictions for coefficients.
//! - [`parking`]: labeled trees, the parking process, brute-force
//!   enumeration and Monte Carlo on critical geometric Galton-Watson trees.

// rug's lazy arithmetic results need the explicit `Rational::from` that this lint flags
#![allow(clippy::useless_conversion)]

pub mod asymptotics;
pub mod exec;
pub mod genfun;
pub mod parking;
pub mod phase;
pub mod powseries;
pub mod precision;
pub mod scalar;
pub mod special;
pub mod weights;

pub use exec::Exec;
pub use powseries::{Bivariate, Series, SeriesError};
pub use scalar::{Backend, Extended, Scalar};
pub use weights::WeightSequence;
