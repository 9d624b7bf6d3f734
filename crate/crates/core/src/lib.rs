//! Multi-regional input–output footprint accounting.
//!
//! Pure numerical core: Leontief kernels, the MRIO data model, scenario
//! final-demand scaling and indicator assembly. No IO; the `mrio-footprint`
//! crate carries file formats and the command-line driver.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod algebra;
pub mod error;
pub mod fixture;
pub mod indicators;
pub mod matrix;
pub mod model;
pub mod scenario;

pub use error::{Error, Result};
