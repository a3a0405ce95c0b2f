//! Storage of weak coherent pulses and few-photon states in a single-atom
//! cavity quantum memory.
//!
//! Two independent solvers compute the probability `η` of transferring the
//! incident excitation into the metastable atomic level |r>:
//!
//! * [`master`] integrates the atom–cavity master equation in the frame that
//!   displaces the coherent input to the vacuum (exact in `n`, truncated Fock space);
//! * [`ladder`] evolves the no-jump pure state under the effective Hamiltonian in
//!   the one- and two-excitation blocks, with the line modes kept explicitly.

// `!(x > 0.0)` guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fields;
pub mod ladder;
pub mod master;
pub mod metrics;
pub mod ode;
pub mod operators;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
