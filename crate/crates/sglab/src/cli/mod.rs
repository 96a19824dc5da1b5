//! Command implementations behind the `sglab` binary. Everything here is
//! plain library code so the commands stay testable without spawning
//! processes; the binary only parses flags and maps errors to exit codes
//! (0 success, 1 tolerance failure, 2 invalid input).

mod bench;

pub use bench::{
    cmd_bench, median_gap_per_budget, BenchRow, BenchSuite, SuiteGame, BENCH_CSV_HEADER,
};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit::{
    check_assignment, compile, make_valid_coloring, normalize_circuit, Assignment, CircuitFile,
    CompileParams, CompiledGame, GeneralizedCircuit,
};
use crate::game::{
    backward_induction_cce, equilibrium_gaps_discounted, equilibrium_gaps_finite, families,
    DiscountedGame, FiniteHorizonGame, GapMode, NonstationaryJointPolicy, PolicyFile,
    ProductPolicy, StationaryJointPolicy, StationaryPolicy, TurnBasedAnnotation,
};
use crate::learner::{
    run_learner, LearnerMetrics, LearnerParams, ShiftedRewardAccess, SimulatorAccess,
};
use crate::rng::seed_rng;
use crate::{Error, Result};

/// Environment variable naming the default output directory for relative
/// output paths.
pub const OUT_DIR_ENV: &str = "SGLAB_OUT_DIR";

/// Resolves an output path: absolute paths pass through, relative paths
/// land in `$SGLAB_OUT_DIR` when that is set.
pub fn resolve_out(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) => PathBuf::from(dir).join(path),
        None => path.to_path_buf(),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let resolved = resolve_out(path);
    if let Some(parent) = resolved.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&resolved, text)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// Game file: finite-horizon or discounted, told apart by which of
/// `horizon` / `gamma` is present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GameFile {
    Finite(FiniteHorizonGame),
    Discounted(DiscountedGame),
}

pub fn load_game(path: &Path) -> Result<GameFile> {
    let game: GameFile = read_json(path)?;
    let violations = match &game {
        GameFile::Finite(g) => g.validate(),
        GameFile::Discounted(g) => g.validate(),
    };
    if !violations.is_empty() {
        let listing: Vec<String> = violations.iter().take(8).map(|v| v.to_string()).collect();
        return Err(Error::InvalidGame(format!(
            "{} ({} violations): {}",
            path.display(),
            violations.len(),
            listing.join("; ")
        )));
    }
    Ok(game)
}

pub fn load_finite_game(path: &Path) -> Result<FiniteHorizonGame> {
    match load_game(path)? {
        GameFile::Finite(g) => Ok(g),
        GameFile::Discounted(_) => Err(Error::ShapeMismatch(format!(
            "{}: expected a finite-horizon game",
            path.display()
        ))),
    }
}

pub fn load_policy(path: &Path) -> Result<NonstationaryJointPolicy> {
    let file: PolicyFile = read_json(path)?;
    NonstationaryJointPolicy::from_file(&file)
}

/// Manifest driving a `learn` run. The seed fully determines the run;
/// identical manifests produce byte-identical outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// must be "learn"
    pub command: String,
    pub game: PathBuf,
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_constant")]
    pub c_j: f64,
    #[serde(default = "default_constant")]
    pub c_n: f64,
    /// practical episode budget: overrides `k` (the sample floor `j` is
    /// rescaled to keep `k = 8 j / p`)
    #[serde(default)]
    pub k_override: Option<f64>,
    #[serde(default)]
    pub n_visit_override: Option<f64>,
    /// train on rewards shifted into [0, 1] so step losses stay in range;
    /// the output policy is unaffected by the shift
    #[serde(default = "default_true")]
    pub shift_rewards: bool,
    /// refuse to start when the projected episode count exceeds this
    /// (the theoretical schedule is astronomical at desk scale; set
    /// `k_override` for practical budgets)
    #[serde(default = "default_max_episodes")]
    pub max_episodes: u64,
    pub out_policy: PathBuf,
    #[serde(default)]
    pub out_metrics: Option<PathBuf>,
    /// model file for exact verification of the learned policy
    #[serde(default)]
    pub verify_model: Option<PathBuf>,
}

fn default_epsilon() -> f64 {
    0.1
}
fn default_delta() -> f64 {
    0.1
}
fn default_constant() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}
fn default_max_episodes() -> u64 {
    10_000_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LearnReport {
    pub metrics: LearnerMetrics,
    pub params: LearnerParams,
    /// per-player exact deviation benefit, present when a model was given
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_gaps: Option<Vec<f64>>,
}

pub fn manifest_params(manifest: &RunManifest, game: &FiniteHorizonGame) -> Result<LearnerParams> {
    let mut params = LearnerParams::with_constants(
        game.num_players,
        game.num_states,
        game.horizon,
        *game.action_counts.iter().max().unwrap(),
        manifest.epsilon,
        manifest.delta,
        manifest.c_j,
        manifest.c_n,
    )?;
    if let Some(k) = manifest.k_override {
        params.k = k;
        params.j = k * params.p / 8.0;
    }
    if let Some(n) = manifest.n_visit_override {
        params.n_visit = n;
    }
    params.validate()?;
    Ok(params)
}

/// `learn`: run the learner per a manifest, write the policy and metrics.
pub fn cmd_learn(manifest: &RunManifest) -> Result<LearnReport> {
    if manifest.command != "learn" {
        return Err(Error::InvalidParameter(format!(
            "manifest command must be `learn`, got `{}`",
            manifest.command
        )));
    }
    let game = match load_game(&manifest.game)? {
        GameFile::Finite(g) => g,
        // discounted games learn through their finite-horizon view
        GameFile::Discounted(g) => crate::game::discounted_to_finite(&g, manifest.epsilon)?,
    };
    let params = manifest_params(manifest, &game)?;
    // worst-case projection: every stage replays at most S covers plus the
    // uniform policy at each step, then probes visitation
    let per_stage = (game.horizon as u64)
        .saturating_mul((game.num_states as u64 + 1) * params.episodes_per_policy() as u64)
        .saturating_add(params.visit_samples() as u64);
    let projected = per_stage.saturating_mul((game.num_states * game.horizon).max(2) as u64);
    if projected > manifest.max_episodes {
        return Err(Error::InvalidParameter(format!(
            "projected episode budget {projected} exceeds max_episodes {}; \
             set k_override / n_visit_override for a desk-scale run",
            manifest.max_episodes
        )));
    }
    let mut rng = seed_rng(manifest.seed);
    let out = if manifest.shift_rewards {
        let mut access = ShiftedRewardAccess::new(SimulatorAccess::new(&game));
        run_learner(&mut access, &params, &mut rng)?
    } else {
        let mut access = SimulatorAccess::new(&game);
        run_learner(&mut access, &params, &mut rng)?
    };
    write_json(&manifest.out_policy, &out.policy.to_file())?;
    let exact_gaps = match &manifest.verify_model {
        Some(path) => {
            let model = load_finite_game(path)?;
            Some(equilibrium_gaps_finite(&model, &out.policy, GapMode::CceAtMu)?)
        }
        None => None,
    };
    let report = LearnReport { metrics: out.metrics, params, exact_gaps };
    if let Some(path) = &manifest.out_metrics {
        write_json(path, &report)?;
    }
    Ok(report)
}

/// Product policy file for the stage-game verification modes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductPolicyFile {
    pub states: usize,
    pub actions: Vec<usize>,
    /// `per_player[i][s][a_i]`
    pub per_player: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub mode: String,
    pub tolerance: f64,
    pub per_player_gaps: Vec<f64>,
    pub max_gap: f64,
    pub passed: bool,
}

/// `verify`: measure equilibrium gaps of a policy file against a game
/// file. Returns exit code 0 when the max gap meets the tolerance, 1
/// otherwise; shape mismatches and bad modes error out (exit 2).
pub fn cmd_verify(
    game_path: &Path,
    policy_path: &Path,
    mode: GapMode,
    tolerance: f64,
    out: Option<&Path>,
) -> Result<(i32, VerifyReport)> {
    let gaps = match load_game(game_path)? {
        GameFile::Finite(game) => {
            if mode.is_stage_mode() {
                return Err(Error::InvalidParameter(
                    "stage-game modes apply to discounted games".into(),
                ));
            }
            let policy = load_policy(policy_path)?;
            equilibrium_gaps_finite(&game, &policy, mode)?
        }
        GameFile::Discounted(game) => {
            if mode.is_stage_mode() {
                let file: ProductPolicyFile = read_json(policy_path)?;
                if file.states != game.num_states || file.actions != game.action_counts {
                    return Err(Error::ShapeMismatch(
                        "product policy does not match the game".into(),
                    ));
                }
                let policy = StationaryPolicy::Product(ProductPolicy {
                    per_player: file.per_player,
                });
                equilibrium_gaps_discounted(&game, &policy, mode)?
            } else {
                let policy = load_policy(policy_path)?;
                if policy.horizon != 1 {
                    return Err(Error::ShapeMismatch(format!(
                        "a discounted game takes a stationary (horizon-1) policy file; \
                         got horizon {}",
                        policy.horizon
                    )));
                }
                if policy.num_states != game.num_states
                    || policy.action_counts != game.action_counts
                {
                    return Err(Error::ShapeMismatch("policy does not match the game".into()));
                }
                let joint = StationaryJointPolicy {
                    dist: policy.cells[0]
                        .iter()
                        .map(|cell| cell.dense(game.num_joint_actions()))
                        .collect(),
                };
                equilibrium_gaps_discounted(&game, &StationaryPolicy::Joint(joint), mode)?
            }
        }
    };
    let max_gap = gaps.iter().cloned().fold(0.0, f64::max);
    let report = VerifyReport {
        mode: format!("{mode:?}"),
        tolerance,
        per_player_gaps: gaps,
        max_gap,
        passed: max_gap <= tolerance,
    };
    if let Some(path) = out {
        write_json(path, &report)?;
    }
    Ok((if report.passed { 0 } else { 1 }, report))
}

/// Turn-based game file: the discounted format plus the controller map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TurnBasedGameFile {
    #[serde(flatten)]
    pub game: DiscountedGame,
    pub controller: Vec<usize>,
}

/// `gen`: write a seed-deterministic random game from a named family.
#[allow(clippy::too_many_arguments)]
pub fn cmd_gen(
    family: &str,
    states: usize,
    players: usize,
    actions: usize,
    horizon: Option<usize>,
    gamma: Option<f64>,
    seed: u64,
    out: &Path,
) -> Result<()> {
    if states == 0 || players == 0 || actions == 0 {
        return Err(Error::InvalidParameter("sizes must be positive".into()));
    }
    let action_counts = vec![actions; players];
    match family {
        "uniform" => match (horizon, gamma) {
            (Some(h), None) => {
                let game = families::random_finite_game(states, players, &action_counts, h, seed);
                write_json(out, &game)
            }
            (None, Some(g)) => {
                let game =
                    families::random_discounted_game(states, players, &action_counts, g, seed);
                write_json(out, &game)
            }
            _ => Err(Error::InvalidParameter(
                "uniform family needs exactly one of --horizon / --gamma".into(),
            )),
        },
        "layered-chain" => {
            let h = horizon.ok_or_else(|| {
                Error::InvalidParameter("layered-chain family needs --horizon".into())
            })?;
            let game = families::layered_chain_game(states, players, &action_counts, h, seed);
            write_json(out, &game)
        }
        "turn-based-random" => {
            if actions != 2 {
                return Err(Error::InvalidParameter(
                    "turn-based-random family uses binary actions".into(),
                ));
            }
            let (game, annotation) =
                families::random_turn_based_game(states, players, gamma.unwrap_or(0.5), seed);
            debug_assert!(annotation.validate(&game).is_empty());
            write_json(out, &TurnBasedGameFile { game, controller: annotation.controller })
        }
        other => Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
    }
}

/// `compile-circuit`: normalize, color, and embed a circuit file into a
/// turn-based discounted game (discount `eps^2`, gadget slack `eps^4`).
pub fn cmd_compile_circuit(
    input: &Path,
    epsilon: f64,
    out: &Path,
    out_circuit: Option<&Path>,
) -> Result<CompiledGame> {
    let file: CircuitFile = read_json(input)?;
    let circuit = GeneralizedCircuit::from_file(&file)?;
    let normalized = normalize_circuit(&circuit)?;
    let (rebuilt, coloring, _) = make_valid_coloring(&normalized, epsilon)?;
    let compiled = compile(&rebuilt, &coloring, CompileParams::for_epsilon(epsilon))?;
    write_json(out, &compiled.to_file())?;
    if let Some(path) = out_circuit {
        write_json(path, &rebuilt.to_file())?;
    }
    Ok(compiled)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckCircuitReport {
    pub gates: usize,
    pub satisfied: usize,
    pub satisfied_fraction: f64,
    pub unsatisfied_gates: Vec<usize>,
}

/// `check-circuit`: evaluate an assignment file (node name -> value)
/// against a circuit at tolerance `eps`. Exit 0 when every gate is
/// satisfied, 1 otherwise.
pub fn cmd_check_circuit(
    circuit_path: &Path,
    assignment_path: &Path,
    epsilon: f64,
) -> Result<(i32, CheckCircuitReport)> {
    let file: CircuitFile = read_json(circuit_path)?;
    let circuit = GeneralizedCircuit::from_file(&file)?;
    let circuit =
        if circuit.is_base() { circuit } else { normalize_circuit(&circuit)? };
    let named: BTreeMap<String, f64> = read_json(assignment_path)?;
    let assignment = Assignment::from_named(&circuit, &named)?;
    let report = check_assignment(&circuit, &assignment, epsilon)?;
    let satisfied = report.gate_satisfied.iter().filter(|b| **b).count();
    let out = CheckCircuitReport {
        gates: report.gate_satisfied.len(),
        satisfied,
        satisfied_fraction: report.satisfied_fraction,
        unsatisfied_gates: report
            .gate_satisfied
            .iter()
            .enumerate()
            .filter(|(_, ok)| !**ok)
            .map(|(g, _)| g)
            .collect(),
    };
    Ok((if report.all_satisfied() { 0 } else { 1 }, out))
}

/// Baseline solver exposed for convenience: exact backward-induction CCE
/// of a finite-horizon game file.
pub fn cmd_solve_baseline(game_path: &Path, tol: f64, out: &Path) -> Result<()> {
    let game = load_finite_game(game_path)?;
    let policy = backward_induction_cce(&game, tol)?;
    write_json(out, &policy.to_file())
}

pub fn annotation_from_file(file: &TurnBasedGameFile) -> TurnBasedAnnotation {
    TurnBasedAnnotation { controller: file.controller.clone(), sink: None }
}
