//! Federated linear contextual bandits under user-level differential privacy.
//!
//! - [`numkit`]: small dense linear algebra, Hadamard rotations, seeded samplers.
//! - [`env`]: problem instances and estimators for their diversity and margin constants.
//! - [`dp`]: winsorized private means, composition accounting, an empirical DP audit.
//! - [`bandit`]: LinUCB, the phased private protocol and baselines.
//! - [`sim`]: the round-synchronized simulator and its outputs.
//! - [`cli`]: the `fedbandit` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandit;
pub mod cli;
pub mod dp;
pub mod env;
pub mod error;
pub mod numkit;
pub mod sim;

pub use error::{Error, Result};
