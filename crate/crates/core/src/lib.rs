//! Design of heralded linear-optical two-qubit gates.
//!
//! An interferometer acting on four dual-rail computational modes plus
//! ancilla modes, followed by photocounting on the ancillas, induces a
//! Kraus operator on the two-qubit subspace. This crate evaluates that
//! operator through matrix permanents, scores it against a target gate,
//! and searches for devices that reach unit fidelity with maximal success
//! probability. Targets are addressed by their Weyl-chamber coordinates.

pub mod error;
pub mod fock;
pub mod harness;
pub mod kraus;
pub mod linalg;
pub mod metrics;
pub mod optimizer;
pub mod weyl;

pub use error::{Error, Result};
