use serde::{Deserialize, Serialize};

use super::access::GameAccess;
use super::engine::{run_core, LearnerOutput};
use super::params::LearnerParams;
use super::shared::{ActionSource, SharedRandomness, SharedSource, SharedStats};
use crate::game::{JointIndexer, NonstationaryJointPolicy};
use crate::rng::ChaCha8Rng;
use crate::{Error, Result};

/// One agent's private slice of a decentralized run: its own recorded
/// actions per `(stage, step, state)` (the policy fragments), its own
/// optimistic value estimates, and its stream accounting. By construction
/// the view holds no other player's actions or rewards.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentView {
    pub player: usize,
    pub num_actions: usize,
    /// `fragments[stage][h][s][j]` = this agent's action in the `j`-th
    /// recorded profile of that cell
    pub fragments: Vec<Vec<Vec<Vec<usize>>>>,
    /// own final-stage value estimates `[h][s]`
    pub value_estimates: Vec<Vec<f64>>,
    /// shared bits this agent consumed
    pub bits_consumed: u64,
}

#[derive(Debug, Clone)]
pub struct DecentralizedOutput {
    pub views: Vec<AgentView>,
    /// the scheduler-side transcript of the same run, kept for verification
    pub learner: LearnerOutput,
    pub shared_stats: SharedStats,
    /// index of the final stage (the output policy's stage)
    pub final_stage: usize,
}

impl DecentralizedOutput {
    /// Joint sampler over the final-stage fragments, driven by a fresh
    /// shared stream.
    pub fn fragment_sampler(&self, seed: u64) -> FragmentSampler<'_> {
        FragmentSampler {
            views: &self.views,
            stage: self.final_stage,
            stream: SharedRandomness::new(seed),
        }
    }
}

/// Runs the learner with every action draw routed through the
/// shared-randomness protocol: one stream replica per agent, stepped in
/// lockstep, with per-stage checksums over consumed bit counts. The
/// environment's own randomness stays private to the game.
pub fn run_decentralized(
    access: &mut dyn GameAccess,
    params: &LearnerParams,
    shared_seed: u64,
    env_rng: &mut ChaCha8Rng,
) -> Result<DecentralizedOutput> {
    let m = access.num_players();
    let mut source = SharedSource::new(shared_seed, m);
    let learner = run_core(access, params, &mut source, env_rng)?;
    let stats = source.stats().expect("shared source always reports stats");
    let ix = JointIndexer::new(access.action_counts());
    let views = (0..m)
        .map(|player| AgentView {
            player,
            num_actions: access.action_counts()[player],
            fragments: learner
                .stage_policies
                .iter()
                .map(|policy| {
                    policy
                        .cells
                        .iter()
                        .map(|row| {
                            row.iter()
                                .map(|cell| {
                                    cell.entries
                                        .iter()
                                        .map(|(flat, _)| ix.player_action(*flat, player))
                                        .collect()
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
            value_estimates: learner.value_estimates[player].clone(),
            bits_consumed: stats.total_bits,
        })
        .collect();
    let final_stage = learner.stage_policies.len() - 1;
    Ok(DecentralizedOutput { views, learner, shared_stats: stats, final_stage })
}

/// Samples joint profiles from per-agent fragments: a public uniform index
/// `j` picks the `j`-th recorded profile and each agent contributes its
/// stored action.
pub struct FragmentSampler<'a> {
    views: &'a [AgentView],
    stage: usize,
    stream: SharedRandomness,
}

impl FragmentSampler<'_> {
    pub fn sample(&mut self, h: usize, s: usize) -> Result<Vec<usize>> {
        let n = self.views[0].fragments[self.stage][h][s].len();
        for view in self.views {
            let len = view.fragments[self.stage][h][s].len();
            if len != n {
                return Err(Error::Desync(format!(
                    "agent {} stored {len} profiles at ({h}, {s}), agent {} stored {n}",
                    view.player, self.views[0].player
                )));
            }
        }
        let j = self.stream.draw_below(n as u64) as usize;
        Ok(self
            .views
            .iter()
            .map(|view| view.fragments[self.stage][h][s][j])
            .collect())
    }

    pub fn bits_consumed(&self) -> u64 {
        self.stream.bits_consumed()
    }
}

/// Reference sampler, drawing the same mixture centrally with the same
/// shared-stream protocol. Only valid for cells whose entries are a
/// uniform mixture (which is what the learner produces).
pub struct MixtureSampler<'a> {
    policy: &'a NonstationaryJointPolicy,
    ix: JointIndexer,
    stream: SharedRandomness,
}

impl<'a> MixtureSampler<'a> {
    pub fn new(policy: &'a NonstationaryJointPolicy, seed: u64) -> Self {
        Self { policy, ix: policy.indexer(), stream: SharedRandomness::new(seed) }
    }

    pub fn sample(&mut self, h: usize, s: usize) -> Vec<usize> {
        let cell = &self.policy.cells[h][s];
        let j = self.stream.draw_below(cell.entries.len() as u64) as usize;
        self.ix.split(cell.entries[j].0)
    }
}
