//! Construction and verification of quasi-periodic solutions of the
//! nonlinear Schrödinger equation on the torus.

pub mod characteristics;
pub mod conditions;
pub mod error;
pub mod intlin;
pub mod lattice;
pub mod linop;
pub mod newton;
pub mod symbols;
mod unionfind;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{FrequencyVector, Mode, ProblemSpec, SiteIndex, SparseSeries};
