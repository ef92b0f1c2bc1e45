//! Natural occupation numbers of N-fermion states, generalized Pauli
//! constraints, pinning analysis, selection rules for pinned states and
//! the harmonium quasipinning model.
//!
//! Orbital indices are 1-based everywhere in the public API. Internally
//! orbital `i` lives in bit `i - 1` of a `u64` occupation mask.

pub mod cli;
pub mod error;
pub mod fock;
pub mod gpc;
pub mod harmonium;
pub mod linalg;
pub mod random;
pub mod schubert;
pub mod selection;

pub use error::{QmargError, Result};
pub use fock::{FermionState, NonVector, OneRdm, OrbitalSpace, SlaterDeterminant};
pub use gpc::{ConstraintCatalog, ConstraintKind, PauliConstraint, PinningReport};

pub use num_complex::Complex64 as C64;
