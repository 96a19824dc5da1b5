//! Learn a nonstationary Markov coarse correlated equilibrium from
//! trajectories alone, then grade the result against the true model.
//!
//! The learner never reads the transition or reward tables: it resets and
//! steps episodes through `GameAccess`, explores with per-state bandits
//! plus optimistic value targets, and keeps a cover policy for every
//! (step, state) pair it can reach. Rewards are shifted into [0, 1] for
//! training so every bandit loss stays in range; the learned policy is
//! judged on the original game.
//!
//! ```bash
//! cargo run --release --example learn_equilibrium
//! ```

use sglab::game::{equilibrium_gaps_finite, families, GapMode};
use sglab::learner::{run_learner, LearnerParams, ShiftedRewardAccess, SimulatorAccess};
use sglab::rng::seed_rng;

fn main() {
    let game = families::random_finite_game(2, 2, &[2, 2], 2, 75);

    let mut params = LearnerParams::defaults(
        game.num_players,
        game.num_states,
        game.horizon,
        2,
        0.1, // target accuracy
        0.1, // failure probability
    )
    .unwrap();
    // desk-scale budgets; k = 8 j / p stays intact
    params.k = 40_000.0;
    params.j = params.k * params.p / 8.0;
    params.n_visit = 10_000.0;

    let mut access = ShiftedRewardAccess::new(SimulatorAccess::new(&game));
    let mut rng = seed_rng(0);
    let out = run_learner(&mut access, &params, &mut rng).unwrap();

    println!(
        "finished after {} stages, {} episodes, visited {}/{} pairs, {} clamped losses",
        out.metrics.stages,
        out.metrics.episodes,
        out.visited.len(),
        game.num_states * game.horizon,
        out.metrics.clamped_losses
    );
    for (q, record) in out.stage_records.iter().enumerate() {
        println!("stage {}: admitted {:?}", q + 1, record.added);
    }

    let gaps = equilibrium_gaps_finite(&game, &out.policy, GapMode::CceAtMu).unwrap();
    println!("exact per-player deviation benefits: {gaps:?}");
    let worst = gaps.iter().cloned().fold(0.0, f64::max);
    println!("worst gap {worst:.4} (target 0.1)");
}
