//! Mode-selective effective Hamiltonians for quantum emitters coupled to the
//! localized surface plasmons of a metal nanosphere, and simulation of
//! plasmon-mediated STIRAP transfer between two emitters.
//!
//! The pipeline runs bottom-up:
//!
//! 1. [`greens`]: Drude multipole response, per-mode coupling spectra,
//!    Lorentzian fits and mode truncation.
//! 2. [`lowdin`]: overlap matrices and canonical orthonormalization of the
//!    per-emitter bright modes.
//! 3. [`hamiltonian`]: the driven single-excitation Hamiltonian and its
//!    adiabatic reduction.
//! 4. [`dynamics`]: pulses, propagation and parameter scans.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod dynamics;
mod error;
pub mod greens;
pub mod hamiltonian;
pub mod lowdin;
pub mod output;
pub mod system;
pub mod units;

pub use error::Error;
