//! Finite-size exact diagonalization of the single-mode Dicke model and the
//! collective spin Hamiltonians proposed as its effective descriptions.
//!
//! The Hilbert space of `N` spin-1/2 atoms is decomposed into total angular
//! momentum sectors `J` with their combinatorial multiplicities, so that
//! thermal traces over the full `2^N` (times truncated Fock) space are exact.
//! Each sector further splits by the conserved excitation parity, and the
//! Dicke blocks are banded, which keeps `N = 32` sweeps at desk scale.

pub mod entanglement;
pub mod equivalence;
mod error;
pub mod hamiltonians;
pub mod linalg;
pub mod operators;
pub mod oracle;
pub mod thermo;

pub use error::{Error, Result};
pub use hamiltonians::{ModelKind, ModelSpec};
pub use operators::{SpinSector, SymMatrix};
pub use thermo::{Spectrum, ThermoOptions, ThermoResult};
