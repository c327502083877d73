//! Representation counts of `n = a^2 + b^2` with primality constraints, their
//! mean values, and the arithmetic needed to check them.

pub mod arith;
pub mod congruence;
pub mod constants;
pub mod error;
pub mod meanvalue;
pub mod quadruples;
pub mod sieve;
pub mod sum;

pub use error::{Error, Result};
