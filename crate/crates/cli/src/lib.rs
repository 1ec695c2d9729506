//! Companion crate to `gw-core`: Monte Carlo experiment harness, sample
//! statistics, and the `gw` command-line tool's plumbing.

pub mod experiments;
pub mod stats;
pub mod svg;
