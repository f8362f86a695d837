//! Evaluation toolkit for mutant reduction strategies on kill/coverage
//! matrices.
//!
//! The crate models boolean mutant-by-test relations ([`matrix`]), implements
//! the usual reduction strategies over the covered-mutant universe
//! ([`strategy`]), scores them with both classic and order-preservation
//! indicators ([`indicators`]), and ranks competing strategies with the
//! Scott-Knott ESD procedure ([`ranking`]). Everything randomized takes an
//! explicit seed; a run is a pure function of its inputs.

pub mod csv_io;
pub mod error;
pub mod indicators;
mod kmeans;
pub mod matrix;
pub mod ranking;
pub mod sampling;
pub mod strategy;

pub use error::{Error, Result};
