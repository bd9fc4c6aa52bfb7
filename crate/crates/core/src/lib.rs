//! Numerical laboratory for the set 𝔅 of odd sums of two coprime squares.

pub mod arith;
pub mod dd;
pub mod error;
pub mod gaussian;
pub mod sum;

pub use error::{Error, Result};
pub mod expsum;
pub mod characters;
pub mod report;
pub mod sieve_identity;
pub mod bilinear;
pub mod quadrature;
pub mod local_model;
pub mod ternary;
pub mod diophantine;
