//! Simulation and verification toolkit for additive functionals of
//! conditioned Galton-Watson trees.
//!
//! The crate provides arena-based plane trees, exact samplers (free,
//! conditioned on size, depth-truncated, and size-biased), single-pass
//! evaluators for a catalogue of additive functionals, iterated tree
//! reductions, interval envelopes certifying depth-truncation errors, and
//! big-integer oracles for ground truth.
//!
//! Everything is `no_std`-compatible (with `alloc`); the `std` feature only
//! adds `std::error::Error` impls.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod bounds;
pub mod float;
pub mod functionals;
pub mod offspring;
pub mod oracle;
pub mod reductions;
pub mod rng;
pub mod sampler;
pub mod tree;

pub use functionals::{AdditiveEvaluation, FunctionalFamily};
pub use offspring::OffspringDistribution;
pub use reductions::ReductionKind;
pub use sampler::{ConditionedSampler, SamplerConfig};
pub use tree::Tree;
