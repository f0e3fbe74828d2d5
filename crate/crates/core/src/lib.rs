//! Benes-family permutation networks.
//!
//! Builds Butterfly, Benes, band-exchange, K-Benes and KR-Benes networks as
//! explicit columns of 2x2 switching elements, routes permutations through
//! them (looping algorithm, K-Benes band routing, KR-Benes control), and
//! checks the resulting plans independently.
//!
//! Line model: every column is a set of disjoint line pairs. A switch in the
//! straight state keeps both packets on their lines, a crossed switch swaps
//! them. Wiring between consecutive columns is the identity on line numbers,
//! so all topology lives in which lines each column pairs.

pub mod analysis;
pub mod cli;
mod error;
pub mod matching;
mod permutation;
pub mod routing;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
pub use permutation::Permutation;

/// Base-2 logarithm of a power of two.
pub(crate) fn log2(n: usize) -> usize {
    debug_assert!(n.is_power_of_two());
    n.trailing_zeros() as usize
}
