//! Experiment driver for the `loracs` library.
//!
//! The binary exposes one subcommand per study (`ser-grid`, `prr`,
//! `joint`, `sparsity`, `baseline-lossless`, `bandwidth`); this library
//! half holds the experiment implementations so integration tests can
//! drive them without shelling out.

pub mod config;
pub mod csvout;
pub mod dct;
pub mod experiments;
pub mod seed;
