//! Thermal entanglement of XXZ spin chains.
//!
//! The crate builds XXZ Hamiltonians on small rings, diagonalizes them sector
//! by sector in the total magnetization, assembles thermal states and
//! evaluates partial-transpose negativities for arbitrary bipartitions of the
//! chain or of any of its subsystems. On top of that it locates limit
//! temperatures (the largest temperature with non-zero negativity) and
//! entanglement borders, and carries the closed-form two- and three-qubit
//! results that serve as an independent check of the numerical engine.
//!
//! Bit convention: site `i` is bit `i` of a basis index, bit value 0 is spin
//! up (`m = +1/2`) and 1 is spin down. Sites are labelled `a, b, c, ...`.

pub mod analytic;
pub mod entanglement;
mod error;
pub mod limits;
pub mod spectral;
pub mod spinchain;

pub use error::{Error, Result};

/// Largest supported chain length (dense dimension 4096).
pub const MAX_SITES: usize = 12;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
