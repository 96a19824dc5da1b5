#![allow(clippy::needless_range_loop)]

//! A laboratory for Markov equilibria in finite stochastic games.
//!
//! The crate has four parts:
//!
//! - [`game`]: tabular finite-horizon and discounted stochastic games,
//!   trajectory simulation, and exact dynamic-programming oracles for
//!   values, best responses, equilibrium gaps, state visitation, and a
//!   backward-induction coarse-correlated-equilibrium baseline.
//! - [`bandit`]: an adversarial multi-armed bandit (Exp3-IX) with
//!   high-probability anytime regret, used per (player, state, step)
//!   by the learner.
//! - [`learner`]: a stage-based policy-cover learner that produces a
//!   nonstationary Markov coarse correlated equilibrium from trajectory
//!   access alone, with a decentralized execution mode built on shared
//!   randomness.
//! - [`circuit`]: generalized circuits, extended-gate desugaring, valid
//!   colorings, and a compiler embedding circuits into 2-player
//!   turn-based discounted games, with assignment extraction and
//!   unimprovability checks.
//!
//! The [`cli`] module backs the `sglab` binary. The `examples/` directory
//! carries one runnable example per capability:
//!
//! | example | shows |
//! | --- | --- |
//! | `solve_and_verify` | exact equilibrium baseline + exact gap checks |
//! | `learn_equilibrium` | the sample-based learner on an unknown game |
//! | `bandit_regret` | regret curve against an oblivious adversary |
//! | `decentralized_replay` | shared-randomness learning and replay |
//! | `compile_circuit` | circuit -> coloring -> game -> assignment |
//! | `reduce_and_truncate` | horizon reduction and support truncation |
//!
//! ```bash
//! cargo run --release --example learn_equilibrium
//! ```

pub mod bandit;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod game;
pub mod learner;
mod lp;
pub mod rng;

pub use error::{Error, Result};
