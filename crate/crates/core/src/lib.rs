//! Simulation core for non-stationary dueling bandits.
//!
//! A learner picks a pair of arms each round and observes only which of the
//! two won a duel drawn from a (possibly time-varying) preference matrix.
//! This crate provides:
//!
//! - [`prefmat`]: preference matrices, variation measures, Condorcet/Borda winners
//! - [`envgen`]: random-walk, switching, budgeted-variation and lower-bound environments
//! - [`policies`]: sparring exponential-weights learners (DEX3.P, DEX3.S,
//!   Borda-DEX3.S) and the RAND / REX3 baselines
//! - [`regret`]: static, dynamic and Borda dynamic regret with benchmark construction
//! - [`simulate`]: the seeded episode engine
//! - [`stream`]: named, reproducible random streams
//!
//! Arms are 0-indexed everywhere in this crate and in every file format it writes.

pub mod envgen;
mod error;
pub mod policies;
pub mod prefmat;
pub mod regret;
pub mod simulate;
pub mod stream;
mod summation;

pub use error::{Error, Result};
pub use summation::KahanSum;
