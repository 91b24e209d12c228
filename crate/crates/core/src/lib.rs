//! Iwasawa lambda-invariants of p-adic Dirichlet L-functions.
//!
//! The crate computes `lambda_p(theta * omega^i)` in two independent ways
//! (interpolation of special values and a truncated series expansion), checks
//! generalised regularity through Bernoulli numbers, and provides the
//! random-matrix model that predicts how these invariants are distributed.

pub mod arith;
pub mod bernoulli;
pub mod cyclotomic;
pub mod dirichlet;
pub mod error;
pub mod experiments;
pub mod finite_field;
pub mod heuristics;
pub mod lambda;
pub mod padic;
pub mod real;
pub mod regularity;
pub mod rmt;

pub use bernoulli::{bernoulli, BernoulliCache};
pub use cyclotomic::CycRational;
pub use dirichlet::{CharGroup, DirichletChar, TwistedChar};
pub use error::{Error, Result};
pub use lambda::{LambdaParams, LambdaResult, LambdaValue};
pub use padic::{PadicScalar, UnramifiedElem, UnramifiedField};
pub use real::HiReal;
