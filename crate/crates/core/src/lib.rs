//! Secure key rates for three-intensity decoy-state BB84 with a heralded
//! single photon source, alongside the weak-coherent-state baseline.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channel;
pub mod config;
mod error;
pub mod observables;
pub mod optimizer;
pub mod protocol;
pub mod report;
pub mod series;
pub mod source;

pub use error::{Error, Result};
