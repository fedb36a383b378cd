//! Optical tomograms of two-mode entangled coherent states produced by a
//! 50/50 beam splitter.
//!
//! [`tomography`] holds the closed-form tomograms and conditional states,
//! [`fock`] an independent truncated Fock-space model used to check them,
//! and [`analysis`] turns grids into strand verdicts, normalization audits
//! and photon-statistics curves.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod exec;
pub mod fock;
pub mod grid_io;
pub mod quad;
pub mod tomography;

pub use error::{Error, Result};
pub use exec::Exec;
