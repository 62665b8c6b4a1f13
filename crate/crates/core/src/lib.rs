//! k-gamma function family: multiprecision evaluation, independent oracles,
//! identity checks and sign-pattern certification for the ratio inequalities.

pub mod bernoulli;
pub mod certifier;
pub mod error;
pub mod identities;
pub mod kcore;
pub mod oracles;
pub mod real;

pub use error::{Error, Result};
pub use kcore::{Backend, EvalResult, Evaluator, KParams, PrecisionConfig};
pub use real::Real;
