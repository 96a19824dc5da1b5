use serde::{Deserialize, Serialize};

use super::access::GameAccess;
use super::params::LearnerParams;
use super::shared::{ActionSource, CentralSource};
use crate::bandit::Exp3Ix;
use crate::game::{JointIndexer, NonstationaryJointPolicy, PolicyCell, VisitedSet};
use crate::rng::{split_rng, ChaCha8Rng};
use crate::Result;

/// Bandit loss for one player's step-`h` feedback (`h` is 0-based).
///
/// Visited pair: `(H - r - next_value) / H`, where `next_value` is the
/// optimistic estimate at the observed next state. Unvisited pair: the
/// constant `h / H` (which is `(H - (H+1-h'))/H` at 1-based `h' = h+1`).
/// Values outside `[0, 1]` are clamped and flagged; the schedule keeps
/// losses in range on the high-probability path, but nothing forbids a
/// stray excursion.
pub fn bandit_loss(
    horizon: usize,
    h: usize,
    visited: bool,
    reward: f64,
    next_value: f64,
) -> (f64, bool) {
    let hf = horizon as f64;
    let raw = if visited { (hf - reward - next_value) / hf } else { h as f64 / hf };
    let clamped = raw.clamp(0.0, 1.0);
    (clamped, clamped != raw)
}

/// Optimistic value update for one `(step, state)` cell (`h` 0-based):
/// the mean of `reward + next-step estimate` over recorded visits, or the
/// optimistic constant `H - h` for pairs outside the visited set (and for
/// admitted pairs that happened to go unseen this stage).
pub fn value_update(
    horizon: usize,
    h: usize,
    visited: bool,
    payoff_sum: f64,
    visits: usize,
) -> f64 {
    if !visited || visits == 0 {
        (horizon - h) as f64
    } else {
        payoff_sum / visits as f64
    }
}

/// Per-stage record kept for diagnostics and verification.
#[derive(Debug, Clone)]
pub struct StageRecord {
    /// index into `LearnerOutput::stage_policies`
    pub policy: usize,
    /// empirical visitation estimate `dhat[h][s]` for that policy
    pub dhat: Vec<Vec<f64>>,
    /// pairs admitted to the visited set at the end of this stage
    pub added: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LearnerMetrics {
    pub stages: usize,
    pub episodes: u64,
    pub visited_per_stage: Vec<usize>,
    pub clamped_losses: u64,
    /// true when the hard stage cap cut the run short
    pub budget_exceeded: bool,
    pub shared_bits: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct LearnerOutput {
    /// the final stage's mixture policy
    pub policy: NonstationaryJointPolicy,
    pub visited: VisitedSet,
    /// final-stage optimistic value estimates `[i][h][s]`
    pub value_estimates: Vec<Vec<Vec<f64>>>,
    /// every stage's mixture policy, in order
    pub stage_policies: Vec<NonstationaryJointPolicy>,
    pub stage_records: Vec<StageRecord>,
    pub metrics: LearnerMetrics,
}

/// Runs the learner against trajectory access with a private RNG.
pub fn run_learner(
    access: &mut dyn GameAccess,
    params: &LearnerParams,
    rng: &mut ChaCha8Rng,
) -> Result<LearnerOutput> {
    let mut env_rng = split_rng(rng);
    let mut source = CentralSource { rng: split_rng(rng) };
    run_core(access, params, &mut source, &mut env_rng)
}

/// Empirical per-step state distributions of a policy from `samples`
/// sampled trajectories.
pub fn estimate_visitation(
    access: &mut dyn GameAccess,
    policy: &NonstationaryJointPolicy,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let mut env_rng = split_rng(rng);
    let mut source = CentralSource { rng: split_rng(rng) };
    est_visit_with_source(access, policy, samples, &mut source, &mut env_rng)
}

pub(crate) fn est_visit_with_source(
    access: &mut dyn GameAccess,
    policy: &NonstationaryJointPolicy,
    samples: usize,
    source: &mut dyn ActionSource,
    env_rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let horizon = access.horizon();
    let mut counts = vec![vec![0u64; access.num_states()]; horizon];
    for _ in 0..samples {
        let mut s = access.reset(env_rng);
        for h in 0..horizon {
            counts[h][s] += 1;
            let cell = &policy.cells[h][s];
            let flat = cell.entries[source.mixture_entry(&cell.entries)].0;
            let (_, next) = access.step(h, s, flat, env_rng);
            s = next;
        }
    }
    counts
        .into_iter()
        .map(|row| row.into_iter().map(|c| c as f64 / samples as f64).collect())
        .collect()
}

struct BarEpisode {
    state_at_h: usize,
    profile_at_h: usize,
    arms: Vec<(usize, f64)>,
    rewards_at_h: Vec<f64>,
    next_state: Option<usize>,
}

/// One episode of the exploration policy for step `h`: the cover policy
/// (uniform when absent) before `h`, each player's bandit at `h`, uniform
/// joint actions afterwards.
fn run_bar_episode(
    access: &mut dyn GameAccess,
    ix: &JointIndexer,
    cover: Option<&NonstationaryJointPolicy>,
    h: usize,
    bandits: &mut [Vec<Exp3Ix>],
    source: &mut dyn ActionSource,
    env_rng: &mut ChaCha8Rng,
) -> Result<BarEpisode> {
    let horizon = access.horizon();
    let na = ix.num_profiles();
    let mut s = access.reset(env_rng);
    let mut record: Option<BarEpisode> = None;
    for step in 0..horizon {
        let flat = if step < h {
            match cover {
                Some(policy) => {
                    let cell = &policy.cells[step][s];
                    cell.entries[source.mixture_entry(&cell.entries)].0
                }
                None => source.uniform_joint(na),
            }
        } else if step == h {
            let mut cells: Vec<&mut Exp3Ix> =
                bandits.iter_mut().map(|row| &mut row[s]).collect();
            let arms = source.bandit_arms(&mut cells)?;
            let profile: Vec<usize> = arms.iter().map(|(a, _)| *a).collect();
            let flat = ix.flatten(&profile);
            record = Some(BarEpisode {
                state_at_h: s,
                profile_at_h: flat,
                arms,
                rewards_at_h: Vec::new(),
                next_state: None,
            });
            flat
        } else {
            source.uniform_joint(na)
        };
        let (rewards, next) = access.step(step, s, flat, env_rng);
        if step == h {
            let rec = record.as_mut().unwrap();
            rec.rewards_at_h = rewards;
            rec.next_state = if step + 1 < horizon { Some(next) } else { None };
        }
        s = next;
    }
    Ok(record.expect("bandit step always runs"))
}

pub(crate) fn run_core(
    access: &mut dyn GameAccess,
    params: &LearnerParams,
    source: &mut dyn ActionSource,
    env_rng: &mut ChaCha8Rng,
) -> Result<LearnerOutput> {
    params.validate()?;
    let m = access.num_players();
    let num_states = access.num_states();
    let horizon = access.horizon();
    let ix = JointIndexer::new(access.action_counts());
    let na = ix.num_profiles();
    let k_episodes = params.episodes_per_policy();
    let n_visit = params.visit_samples();
    let stage_cap = num_states * horizon;

    let mut visited = VisitedSet::empty(horizon, num_states);
    let mut cover: Vec<Vec<Option<usize>>> = vec![vec![None; num_states]; horizon];
    let mut stage_policies: Vec<NonstationaryJointPolicy> = Vec::new();
    let mut stage_records: Vec<StageRecord> = Vec::new();
    let mut metrics = LearnerMetrics::default();
    let mut final_vbar = vec![vec![vec![0.0; num_states]; horizon]; m];

    loop {
        let stage = stage_policies.len();
        // cover sets per step, fixed at stage start; identical policies
        // (same producing stage) are deduplicated
        let cover_sets: Vec<Vec<usize>> = (0..horizon)
            .map(|h| {
                let mut ids: Vec<usize> = cover[h].iter().flatten().copied().collect();
                ids.sort_unstable();
                ids.dedup();
                ids
            })
            .collect();

        let mut vbar = vec![vec![vec![0.0; num_states]; horizon]; m];
        let mut cells: Vec<Vec<PolicyCell>> = vec![Vec::new(); horizon];
        for h in (0..horizon).rev() {
            let t0 = ((cover_sets[h].len() + 1) * k_episodes) as u64;
            let mut bandits: Vec<Vec<Exp3Ix>> = (0..m)
                .map(|i| {
                    (0..num_states)
                        .map(|_| Exp3Ix::new(access.action_counts()[i], t0, params.delta))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let mut draws: Vec<Vec<usize>> = vec![Vec::new(); num_states];
            let mut payoff_sums = vec![vec![0.0; num_states]; m];
            let policy_ids: Vec<Option<usize>> = cover_sets[h]
                .iter()
                .map(|&id| Some(id))
                .chain(std::iter::once(None))
                .collect();
            for policy_id in policy_ids {
                let cover_policy: Option<&NonstationaryJointPolicy> =
                    policy_id.map(|id| &stage_policies[id]);
                for _ in 0..k_episodes {
                    let ep = run_bar_episode(
                        access,
                        &ix,
                        cover_policy,
                        h,
                        &mut bandits,
                        source,
                        env_rng,
                    )?;
                    let s_h = ep.state_at_h;
                    let in_visited = visited.contains(h, s_h);
                    draws[s_h].push(ep.profile_at_h);
                    for i in 0..m {
                        let next_value = match ep.next_state {
                            Some(s2) if h + 1 < horizon => vbar[i][h + 1][s2],
                            _ => 0.0,
                        };
                        let (loss, was_clamped) =
                            bandit_loss(horizon, h, in_visited, ep.rewards_at_h[i], next_value);
                        if was_clamped {
                            metrics.clamped_losses += 1;
                        }
                        bandits[i][s_h].update(ep.arms[i].0, loss)?;
                        payoff_sums[i][s_h] += ep.rewards_at_h[i] + next_value;
                    }
                }
            }
            for s in 0..num_states {
                let j = draws[s].len();
                let optimistic = (horizon - h) as f64;
                for (i, sums) in payoff_sums.iter().enumerate() {
                    vbar[i][h][s] =
                        value_update(horizon, h, visited.contains(h, s), sums[s], j);
                    debug_assert!(
                        vbar[i][h][s] <= optimistic + 1e-9
                            && vbar[i][h][s] >= -optimistic - 1e-9,
                        "value estimate out of range at ({h}, {s})"
                    );
                }
                cells[h].push(if j == 0 {
                    PolicyCell::uniform(na)
                } else {
                    PolicyCell::from_draws(&draws[s])
                });
            }
        }

        let stage_policy = NonstationaryJointPolicy {
            horizon,
            num_states,
            action_counts: access.action_counts().to_vec(),
            cells,
        };
        let dhat =
            est_visit_with_source(access, &stage_policy, n_visit, source, env_rng);
        stage_policies.push(stage_policy);
        final_vbar = vbar;

        let mut added = Vec::new();
        for h in 0..horizon {
            for s in 0..num_states {
                if dhat[h][s] >= params.p && !visited.contains(h, s) {
                    visited.insert(h, s);
                    cover[h][s] = Some(stage);
                    added.push((h, s));
                }
            }
        }
        let terminate = added.is_empty();
        stage_records.push(StageRecord { policy: stage, dhat, added });
        metrics.visited_per_stage.push(visited.len());
        source.end_stage()?;

        if terminate || stage + 1 >= stage_cap.max(2) {
            metrics.budget_exceeded = !terminate;
            metrics.stages = stage + 1;
            metrics.episodes = access.episodes_used();
            metrics.shared_bits = source.stats().map(|s| s.total_bits);
            return Ok(LearnerOutput {
                policy: stage_policies.last().unwrap().clone(),
                visited,
                value_estimates: final_vbar,
                stage_policies,
                stage_records,
                metrics,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::families::*;
    use crate::learner::SimulatorAccess;
    use crate::rng::seed_rng;
    use approx::assert_abs_diff_eq;

    fn tiny_params(game: &crate::game::FiniteHorizonGame, k: f64, n_visit: f64) -> LearnerParams {
        let mut params = LearnerParams::defaults(
            game.num_players,
            game.num_states,
            game.horizon,
            *game.action_counts.iter().max().unwrap(),
            0.1,
            0.1,
        )
        .unwrap();
        // practical budgets: hold p fixed and rescale (j, k) together so
        // the schedule identity k = 8 j / p stays intact
        params.k = k;
        params.j = k * params.p / 8.0;
        params.n_visit = n_visit;
        params
    }

    #[test]
    fn loss_construction_cases() {
        // unvisited pair: (H - (H+1-h))/H at 1-based h=2, H=4
        let (loss, clamped) = bandit_loss(4, 1, false, 0.3, 2.0);
        assert_abs_diff_eq!(loss, 0.25);
        assert!(!clamped);
        // r = 1 and maximal next value H - h' (1-based): loss (h'-1)/H
        let h1 = 3usize; // 1-based
        let (loss, _) = bandit_loss(4, h1 - 1, true, 1.0, (4 - h1) as f64);
        assert_abs_diff_eq!(loss, (h1 as f64 - 1.0) / 4.0);
        // r = -1 with a zero next estimate overflows and is clamped
        let (loss, clamped) = bandit_loss(2, 0, true, -1.0, 0.0);
        assert_abs_diff_eq!(loss, 1.0);
        assert!(clamped);
    }

    #[test]
    fn visitation_estimate_on_a_deterministic_chain() {
        let game = two_state_chain();
        let policy = NonstationaryJointPolicy::uniform_for(&game);
        let mut access = SimulatorAccess::new(&game);
        let dhat = estimate_visitation(&mut access, &policy, 50, &mut seed_rng(1));
        assert_eq!(dhat[0], vec![1.0, 0.0]);
        assert_eq!(dhat[1], vec![0.0, 1.0]);
        // single-sample estimates are point masses
        let dhat = estimate_visitation(&mut access, &policy, 1, &mut seed_rng(2));
        for row in dhat {
            assert_eq!(row.iter().sum::<f64>(), 1.0);
            assert!(row.iter().all(|p| *p == 0.0 || *p == 1.0));
        }
    }

    #[test]
    fn single_state_game_stops_at_stage_two() {
        let game = random_finite_game(1, 2, &[2, 2], 3, 77);
        let params = tiny_params(&game, 40.0, 25.0);
        let mut access = SimulatorAccess::new(&game);
        let out = run_learner(&mut access, &params, &mut seed_rng(3)).unwrap();
        assert_eq!(out.metrics.stages, 2);
        assert!(!out.metrics.budget_exceeded);
        assert_eq!(out.visited.len(), 3);
    }

    #[test]
    fn stage_count_never_exceeds_the_pair_bound() {
        for seed in 0..4 {
            let game = random_finite_game(2, 2, &[2, 2], 2, 500 + seed);
            let params = tiny_params(&game, 60.0, 40.0);
            let mut access = SimulatorAccess::new(&game);
            let out = run_learner(&mut access, &params, &mut seed_rng(seed)).unwrap();
            assert!(out.metrics.stages <= game.num_states * game.horizon);
            // the visited set grows monotonically
            for w in out.metrics.visited_per_stage.windows(2) {
                assert!(w[1] >= w[0]);
            }
        }
    }

    #[test]
    fn unvisited_pairs_keep_the_optimistic_estimate() {
        // state 1 is unreachable: all mass loops on state 0
        let mut game = random_finite_game(2, 2, &[2, 2], 2, 9);
        game.mu = vec![1.0, 0.0];
        for h in 0..2 {
            for s in 0..2 {
                for a in 0..4 {
                    game.transitions[h][s][a] = vec![1.0, 0.0];
                }
            }
        }
        let params = tiny_params(&game, 50.0, 30.0);
        let mut access = SimulatorAccess::new(&game);
        let out = run_learner(&mut access, &params, &mut seed_rng(4)).unwrap();
        for h in 0..2 {
            assert!(!out.visited.contains(h, 1));
            for i in 0..2 {
                assert_abs_diff_eq!(out.value_estimates[i][h][1], (2 - h) as f64);
            }
        }
    }

    #[test]
    fn empirical_mixture_weights_match_draw_counts() {
        let cell = PolicyCell::from_draws(&[1, 1, 1, 2]);
        let merged = cell.merged();
        assert_eq!(merged, vec![(1, 0.75), (2, 0.25)]);
    }

    #[test]
    fn value_update_cases() {
        // outside the visited set the optimistic constant wins regardless
        // of data (1-based H+1-h = 0-based horizon - h)
        assert_abs_diff_eq!(value_update(4, 1, false, 123.0, 7), 3.0);
        // a single visit with r = 0.5 and next estimate 1 averages to 1.5
        assert_abs_diff_eq!(value_update(2, 0, true, 0.5 + 1.0, 1), 1.5);
        // admitted but unseen this stage: optimistic fallback
        assert_abs_diff_eq!(value_update(3, 2, true, 0.0, 0), 1.0);
    }

    #[test]
    fn bar_episode_marginals_match_bandit_distributions() {
        let game = random_finite_game(1, 2, &[2, 2], 2, 30);
        let ix = game.indexer();
        let mut access = SimulatorAccess::new(&game);
        let mut source = CentralSource { rng: seed_rng(7) };
        let mut env_rng = seed_rng(8);
        // skew player 0's bandit away from uniform with a few updates
        let mut bandits: Vec<Vec<Exp3Ix>> = (0..2)
            .map(|_| (0..1).map(|_| Exp3Ix::new(2, 60_000, 0.05).unwrap()).collect())
            .collect();
        let mut skew_rng = seed_rng(9);
        for _ in 0..200 {
            let (arm, _) = bandits[0][0].sample(&mut skew_rng).unwrap();
            bandits[0][0].update(arm, if arm == 0 { 1.0 } else { 0.0 }).unwrap();
        }
        let expect0 = bandits[0][0].distribution();
        let expect1 = bandits[1][0].distribution();
        let n = 20_000;
        let mut count0 = 0usize;
        let mut count1 = 0usize;
        for _ in 0..n {
            let ep = run_bar_episode(
                &mut access, &ix, None, 0, &mut bandits, &mut source, &mut env_rng,
            )
            .unwrap();
            // feed back a constant loss so the distributions stay put
            for i in 0..2 {
                bandits[i][0].update(ep.arms[i].0, 0.0).unwrap();
            }
            let acts = ix.split(ep.profile_at_h);
            count0 += acts[0];
            count1 += acts[1];
        }
        assert!((count0 as f64 / n as f64 - expect0[1]).abs() < 0.02);
        assert!((count1 as f64 / n as f64 - expect1[1]).abs() < 0.02);
    }
}
