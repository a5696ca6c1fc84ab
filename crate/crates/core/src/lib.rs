//! Simulator for a vortex-lattice topological image sensor.
//!
//! Grayscale images become a background spin-polarization density, which acts
//! as a local effective magnetic field on exact self-dual vortices pinned at a
//! lattice of holes. Each hole yields a feature triple (cyclotron frequency,
//! quadrupole moment, excitation energy), and feature vectors are recalled
//! from an associative memory by dominant overlap.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod grid;
pub mod memory;
pub mod pnm;
pub mod sensor;
pub mod soliton;

pub use error::{Error, ErrorClass, Result};
