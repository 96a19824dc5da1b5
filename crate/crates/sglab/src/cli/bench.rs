use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::game::{equilibrium_gaps_finite, families, FiniteHorizonGame, GapMode};
use crate::learner::{run_learner, LearnerParams, ShiftedRewardAccess, SimulatorAccess};
use crate::rng::stream_rng;
use crate::{Error, Result};

pub const BENCH_CSV_HEADER: &str = "game_id,seed,episodes,exact_gap";

/// One game entry of a benchmark suite; games are generated on the fly so
/// the suite file stays small and the exact model is available for
/// verification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteGame {
    pub id: String,
    #[serde(default = "default_family")]
    pub family: String,
    pub states: usize,
    pub players: usize,
    pub actions: usize,
    pub horizon: usize,
    pub seed: u64,
}

fn default_family() -> String {
    "uniform".into()
}

/// Benchmark suite: `(episodes, exact gap)` curves over an episode-budget
/// ladder, one learner run per `(game, seed, budget)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchSuite {
    pub games: Vec<SuiteGame>,
    pub seeds: Vec<u64>,
    /// per-(cover policy, step) episode budgets; larger means more samples
    pub budgets: Vec<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub n_visit: Option<f64>,
}

fn default_epsilon() -> f64 {
    0.1
}
fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub game_id: String,
    pub seed: u64,
    pub budget: f64,
    pub episodes: u64,
    pub exact_gap: f64,
}

fn build_game(entry: &SuiteGame) -> Result<FiniteHorizonGame> {
    let counts = vec![entry.actions; entry.players];
    match entry.family.as_str() {
        "uniform" => Ok(families::random_finite_game(
            entry.states,
            entry.players,
            &counts,
            entry.horizon,
            entry.seed,
        )),
        "layered-chain" => Ok(families::layered_chain_game(
            entry.states,
            entry.players,
            &counts,
            entry.horizon,
            entry.seed,
        )),
        other => Err(Error::InvalidParameter(format!("unknown suite family `{other}`"))),
    }
}

pub fn run_suite(suite: &BenchSuite) -> Result<Vec<BenchRow>> {
    let mut jobs = Vec::new();
    for game in &suite.games {
        for &seed in &suite.seeds {
            for &budget in &suite.budgets {
                jobs.push((game.clone(), seed, budget));
            }
        }
    }
    let rows: Result<Vec<BenchRow>> = jobs
        .par_iter()
        .map(|(entry, seed, budget)| {
            let game = build_game(entry)?;
            let mut params = LearnerParams::with_constants(
                game.num_players,
                game.num_states,
                game.horizon,
                *game.action_counts.iter().max().unwrap(),
                suite.epsilon,
                suite.delta,
                1.0,
                1.0,
            )?;
            params.k = *budget;
            params.j = params.k * params.p / 8.0;
            params.n_visit = suite.n_visit.unwrap_or((budget / 4.0).max(100.0));
            // replica stream keyed by everything that varies; rewards are
            // shifted into [0, 1] for training (the policy transfers back)
            let mut rng = stream_rng(*seed, entry.seed ^ (budget.to_bits()));
            let mut access = ShiftedRewardAccess::new(SimulatorAccess::new(&game));
            let out = run_learner(&mut access, &params, &mut rng)?;
            let gaps = equilibrium_gaps_finite(&game, &out.policy, GapMode::CceAtMu)?;
            Ok(BenchRow {
                game_id: entry.id.clone(),
                seed: *seed,
                budget: *budget,
                episodes: out.metrics.episodes,
                exact_gap: gaps.iter().cloned().fold(0.0, f64::max),
            })
        })
        .collect();
    let mut rows = rows?;
    rows.sort_by(|a, b| {
        (&a.game_id, a.seed, a.budget)
            .partial_cmp(&(&b.game_id, b.seed, b.budget))
            .unwrap()
    });
    Ok(rows)
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{:.9}\n",
            row.game_id, row.seed, row.episodes, row.exact_gap
        ));
    }
    out
}

/// `bench`: run the suite and write the CSV.
pub fn cmd_bench(suite_path: &Path, out: &Path) -> Result<Vec<BenchRow>> {
    let text = std::fs::read_to_string(suite_path)
        .map_err(|e| Error::InvalidParameter(format!("{}: {e}", suite_path.display())))?;
    let suite: BenchSuite = serde_json::from_str(&text)?;
    let rows = run_suite(&suite)?;
    let resolved = super::resolve_out(out);
    if let Some(parent) = resolved.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(resolved, rows_to_csv(&rows))?;
    Ok(rows)
}

/// Median exact gap per budget, in budget order.
pub fn median_gap_per_budget(rows: &[BenchRow], budgets: &[f64]) -> Vec<f64> {
    budgets
        .iter()
        .map(|b| {
            let mut gaps: Vec<f64> =
                rows.iter().filter(|r| r.budget == *b).map(|r| r.exact_gap).collect();
            gaps.sort_by(|x, y| x.partial_cmp(y).unwrap());
            if gaps.is_empty() {
                f64::NAN
            } else {
                gaps[gaps.len() / 2]
            }
        })
        .collect()
}
