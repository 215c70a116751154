//! Expected hitting times of Markov chains with restart.
//!
//! A chain with restart jumps to a fixed distribution `nu` with probability
//! `p` at every transition and otherwise follows its base kernel. This crate
//! computes, classifies and optimizes the expected time such a chain takes
//! to enter a target set:
//!
//! - [`kernel`]: validated stochastic kernels, the restarted kernel and the
//!   taboo kernel of a target set;
//! - [`hitting`]: the explicit hitting-time formula `V = V1 / D`, plus a
//!   truncated series and value iteration as independent oracles, and the
//!   four-way finiteness classification;
//! - [`stationary`]: the stationary distribution two independent ways;
//! - [`optimize`]: the hitting time as a function of `p` in `[0, 1]`,
//!   boundary closed forms included, and its minimization;
//! - [`simulate`]: seed-reproducible Monte Carlo estimates;
//! - [`exp_line`], [`lattice`]: two walks whose hitting times and optimal
//!   restart probabilities are known in closed form, used as end-to-end
//!   checks of everything above;
//! - [`chain_spec`]: the on-disk chain description format.

pub mod chain_spec;
pub mod error;
pub mod exp_line;
pub mod extreal;
pub mod hitting;
pub mod kernel;
pub mod lattice;
pub mod optimize;
pub mod simulate;
pub mod stationary;

pub use chain_spec::{ChainSpec, ValidatedChain};
pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use hitting::{hitting_time, HittingSolution};
pub use kernel::{FiniteKernel, RestartChain, TargetSet};
pub use optimize::{Objective, OptResult};
pub use simulate::SampleStats;
pub use stationary::StationaryDist;
