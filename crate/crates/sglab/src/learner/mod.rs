//! Stage-based policy-cover learner for nonstationary Markov coarse
//! correlated equilibria, with trajectory-only access to the game.
//!
//! Each stage replays every known cover policy (plus the uniform policy)
//! while one step runs per-player adversarial bandits, estimates optimistic
//! value targets backward over steps, and then probes the freshly built
//! mixture policy's state visitation. Pairs visited with probability at
//! least `p` gain a cover policy; the learner stops when a stage discovers
//! nothing new. The whole procedure can execute decentralized: agents
//! observe only their own actions and rewards and coordinate through a
//! shared random bit stream.

mod access;
mod decentralized;
mod engine;
mod params;
mod shared;

pub use access::{GameAccess, ShiftedRewardAccess, SimulatorAccess};
pub use decentralized::{
    run_decentralized, AgentView, DecentralizedOutput, FragmentSampler, MixtureSampler,
};
pub use engine::{
    bandit_loss, estimate_visitation, run_learner, value_update, LearnerMetrics, LearnerOutput,
    StageRecord,
};
pub use params::LearnerParams;
pub use shared::{SharedRandomness, SharedStats};
