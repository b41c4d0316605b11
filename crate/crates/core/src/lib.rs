//! Local learning: polynomial synaptic rules, their expectation dynamics,
//! Boolean and supervised-Hebb learnability, deep-targets training of
//! threshold networks, and learning-channel benchmarks.

pub mod boolean;
pub mod channel;
pub mod deep_targets;
pub mod error;
pub mod hopfield;
pub mod rng;
pub mod moments;
pub mod netsim;
pub mod reproduce;
pub mod rules;
pub mod ssh;

pub use error::{Error, Result};
