//! Simulation and estimation toolkit for spin-1 divacancy thermometry.
//!
//! The crate is organised along the measurement chain:
//!
//! - [`spin`]: three-level ground-state model in the doubly rotating frame
//!   (transition frequencies, detunings, pulse and free-evolution propagators).
//! - [`noise`]: classical magnetic noise standing in for the spin bath
//!   (quasi-static Gaussian offsets plus an Ornstein-Uhlenbeck process).
//! - [`sequences`]: pulse-sequence representation, generators for Ramsey,
//!   thermal Ramsey, thermal echo and TCPMG-N, and an analytic phase oracle.
//! - [`simulator`]: Monte-Carlo engine with a photon-counting readout model,
//!   time sweeps and ODMR spectra.
//! - [`analysis`]: least-squares fits (damped cosine, Lorentzian pair, line,
//!   saturation), temperature calibration and shot-noise sensitivity.
//!
//! Monte-Carlo shots and sweep points run on rayon when the `parallel`
//! feature is enabled (the default). Every shot draws from its own seed
//! derived from the run seed, and results are gathered in index order, so
//! sequential and parallel execution produce bit-identical output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod exec;
pub mod noise;
pub mod rng;
pub mod sequences;
pub mod simulator;
pub mod spin;

pub use error::{Error, Result};
pub use exec::Execution;
