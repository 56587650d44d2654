//! Exact constructions for monotone couplings of probability measures on
//! tree-shaped posets: Class W classification, recursive inverse
//! transforms, synchronizing bijections, synchronizability of index posets,
//! explicit counterexamples and brute-force LP/flow oracles.
//!
//! All arithmetic is exact over arbitrary-precision rationals.

pub mod classw;
pub mod corpus;
pub mod counterexample;
pub mod error;
pub mod measures;
pub mod oracle;
pub mod poset;
pub mod rational;
pub mod realize;
pub mod rsb;
pub mod sync;
pub mod system;
pub mod transforms;

pub use error::{Error, Result};
pub use poset::{Poset, Subset};
pub use rational::Rational;
