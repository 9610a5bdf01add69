//! Trimmed discrete Schrödinger operators `H = -Δ + V` on finite boxes of
//! `Z^d`: assembly, spectra, closed-form lower bounds, Cheeger constants and
//! Monte Carlo experiments on the Γ-trimmed Anderson model.

pub mod anderson;
pub mod bounds;
pub mod cheeger;
pub mod error;
pub mod hamiltonian;
pub mod lattice;
pub mod runner;
pub mod spectra;
pub mod verify;

pub use error::{Error, Result};
