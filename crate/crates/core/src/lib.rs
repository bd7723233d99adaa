//! Hamiltonian mechanics of a test particle in the Alcubierre-limit and
//! approximated Gödel spacetimes.
//!
//! Slot layout for every 8-vector and 8×8 array: `q¹..q⁴` (or `Q¹..Q⁴`) in
//! slots `0..4`, `p₁..p₄` (or `P₁..P₄`) in slots `4..8`.

pub mod canonical;
pub mod cli;
pub mod error;
pub mod flow;
pub mod master;
pub mod metrics;
pub mod numdiff;
pub mod phase;
pub mod recursion;
pub mod rng;

pub use error::{Result, WarpError};
