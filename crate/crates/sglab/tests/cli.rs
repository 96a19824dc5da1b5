//! End-to-end tests of the `sglab` binary and the command layer: seeded
//! reproducibility, exit codes, and file formats.

use std::path::{Path, PathBuf};
use std::process::Command;

use sglab::cli::{self, BenchSuite, RunManifest, SuiteGame, BENCH_CSV_HEADER};
use sglab::game::{families, GapMode, TurnBasedAnnotation};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sglab"))
}

fn write_game(dir: &Path, name: &str, seed: u64) -> PathBuf {
    let game = families::random_finite_game(2, 2, &[2, 2], 2, seed);
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&game).unwrap()).unwrap();
    path
}

#[test]
fn learn_is_manifest_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let game_path = write_game(dir.path(), "game.json", 9001);
    let manifest = RunManifest {
        command: "learn".into(),
        game: game_path,
        seed: 5,
        epsilon: 0.3,
        delta: 0.1,
        c_j: 1.0,
        c_n: 1.0,
        k_override: Some(400.0),
        n_visit_override: Some(200.0),
        shift_rewards: true,
        max_episodes: 10_000_000,
        out_policy: dir.path().join("a.json"),
        out_metrics: Some(dir.path().join("a_metrics.json")),
        verify_model: None,
    };
    let report = cli::cmd_learn(&manifest).unwrap();
    assert!(report.metrics.stages <= 4, "stages {} > S*H", report.metrics.stages);
    let mut second = manifest.clone();
    second.out_policy = dir.path().join("b.json");
    second.out_metrics = None;
    cli::cmd_learn(&second).unwrap();
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b, "same manifest must produce byte-identical policies");
}

#[test]
fn learn_reports_exact_gaps_against_a_model() {
    let dir = tempfile::tempdir().unwrap();
    let game_path = write_game(dir.path(), "game.json", 9002);
    let manifest = RunManifest {
        command: "learn".into(),
        game: game_path.clone(),
        seed: 1,
        epsilon: 0.3,
        delta: 0.1,
        c_j: 1.0,
        c_n: 1.0,
        k_override: Some(2_000.0),
        n_visit_override: Some(400.0),
        shift_rewards: true,
        max_episodes: 10_000_000,
        out_policy: dir.path().join("pi.json"),
        out_metrics: Some(dir.path().join("metrics.json")),
        verify_model: Some(game_path),
    };
    let report = cli::cmd_learn(&manifest).unwrap();
    let gaps = report.exact_gaps.expect("model supplied");
    assert_eq!(gaps.len(), 2);
    assert!(gaps.iter().all(|g| *g >= 0.0));
    let metrics_text = std::fs::read_to_string(dir.path().join("metrics.json")).unwrap();
    assert!(metrics_text.contains("exact_gaps"));
}

#[test]
fn theoretical_budgets_are_refused_up_front() {
    let dir = tempfile::tempdir().unwrap();
    let game_path = write_game(dir.path(), "game.json", 9009);
    // no overrides: the derived schedule wants billions of episodes
    let manifest = RunManifest {
        command: "learn".into(),
        game: game_path,
        seed: 1,
        epsilon: 0.1,
        delta: 0.1,
        c_j: 1.0,
        c_n: 1.0,
        k_override: None,
        n_visit_override: None,
        shift_rewards: true,
        max_episodes: 10_000_000,
        out_policy: dir.path().join("pi.json"),
        out_metrics: None,
        verify_model: None,
    };
    let err = cli::cmd_learn(&manifest).unwrap_err();
    assert!(err.to_string().contains("k_override"), "{err}");
}

#[test]
fn learn_accepts_discounted_games_via_the_horizon_reduction() {
    let dir = tempfile::tempdir().unwrap();
    let dgame = families::random_discounted_game(2, 2, &[2, 2], 0.5, 313);
    let game_path = dir.path().join("dgame.json");
    std::fs::write(&game_path, serde_json::to_string(&dgame).unwrap()).unwrap();
    let manifest = RunManifest {
        command: "learn".into(),
        game: game_path,
        seed: 3,
        epsilon: 0.4, // horizon ceil(ln(1/0.4)/0.5) = 2
        delta: 0.1,
        c_j: 1.0,
        c_n: 1.0,
        k_override: Some(300.0),
        n_visit_override: Some(150.0),
        shift_rewards: true,
        max_episodes: 10_000_000,
        out_policy: dir.path().join("pi.json"),
        out_metrics: None,
        verify_model: None,
    };
    let report = cli::cmd_learn(&manifest).unwrap();
    assert!(report.metrics.episodes > 0);
    let policy = cli::load_policy(&dir.path().join("pi.json")).unwrap();
    assert_eq!(policy.horizon, 2);
}

#[test]
fn missing_game_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let manifest_path = dir.path().join("m.json");
    std::fs::write(
        &manifest_path,
        format!(
            r#"{{"command":"learn","game":"{}","seed":1,"out_policy":"{}"}}"#,
            dir.path().join("nope.json").display(),
            dir.path().join("pi.json").display()
        ),
    )
    .unwrap();
    let status = bin().args(["learn", "--manifest"]).arg(&manifest_path).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn verify_exit_codes_follow_the_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let game_path = write_game(dir.path(), "game.json", 9003);
    let policy_path = dir.path().join("cce.json");
    let status = bin()
        .args(["solve", "--game"])
        .arg(&game_path)
        .args(["--tolerance", "1e-9", "--out"])
        .arg(&policy_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    // the baseline passes a forgiving tolerance
    let status = bin()
        .args(["verify", "--game"])
        .arg(&game_path)
        .arg("--policy")
        .arg(&policy_path)
        .args(["--mode", "cce_at_mu", "--tolerance", "1e-6"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    // an adversarial policy (all mass on one profile) fails it
    let game = families::random_finite_game(2, 2, &[2, 2], 2, 9003);
    let mut bad = sglab::game::NonstationaryJointPolicy::uniform_for(&game);
    for h in 0..2 {
        for s in 0..2 {
            bad.cells[h][s] = sglab::game::PolicyCell::point(0);
        }
    }
    let gaps = sglab::game::equilibrium_gaps_finite(&game, &bad, GapMode::CceAtMu).unwrap();
    assert!(gaps.iter().cloned().fold(0.0, f64::max) > 1e-3);
    let bad_path = dir.path().join("bad.json");
    std::fs::write(&bad_path, serde_json::to_string(&bad.to_file()).unwrap()).unwrap();
    let out_path = dir.path().join("report.json");
    let status = bin()
        .args(["verify", "--game"])
        .arg(&game_path)
        .arg("--policy")
        .arg(&bad_path)
        .args(["--mode", "cce_at_mu", "--tolerance", "1e-6", "--out"])
        .arg(&out_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    assert!(out_path.exists());
}

#[test]
fn verify_rejects_shape_and_mode_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    // nonstationary (horizon 2) policy against a discounted game
    let dgame = families::random_discounted_game(2, 2, &[2, 2], 0.5, 77);
    let game_path = dir.path().join("dgame.json");
    std::fs::write(&game_path, serde_json::to_string(&dgame).unwrap()).unwrap();
    let policy = sglab::game::NonstationaryJointPolicy::uniform(2, 2, &[2, 2]);
    let policy_path = dir.path().join("pi.json");
    std::fs::write(&policy_path, serde_json::to_string(&policy.to_file()).unwrap()).unwrap();
    let status = bin()
        .args(["verify", "--game"])
        .arg(&game_path)
        .arg("--policy")
        .arg(&policy_path)
        .args(["--mode", "perfect"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // unknown mode
    let status = bin()
        .args(["verify", "--game"])
        .arg(&game_path)
        .arg("--policy")
        .arg(&policy_path)
        .args(["--mode", "zorp"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn verify_stage_modes_take_product_policies() {
    let dir = tempfile::tempdir().unwrap();
    let (game, _) = families::random_turn_based_game(3, 2, 0.5, 808);
    let game_path = dir.path().join("tb.json");
    std::fs::write(&game_path, serde_json::to_string(&game).unwrap()).unwrap();
    let product = families::random_product_policy(&game, 809);
    let file = cli::ProductPolicyFile {
        states: 3,
        actions: vec![2, 2],
        per_player: product.per_player.clone(),
    };
    let policy_path = dir.path().join("prod.json");
    std::fs::write(&policy_path, serde_json::to_string(&file).unwrap()).unwrap();
    // a random policy will not be a stage equilibrium at 1e-6
    let status = bin()
        .args(["verify", "--game"])
        .arg(&game_path)
        .arg("--policy")
        .arg(&policy_path)
        .args(["--mode", "pwsne_sg", "--tolerance", "1e-6"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    // a generous tolerance passes (gaps are bounded by the value range)
    let status = bin()
        .args(["verify", "--game"])
        .arg(&game_path)
        .arg("--policy")
        .arg(&policy_path)
        .args(["--mode", "pwsne_sg", "--tolerance", "10"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    // shape mismatch errors out
    let bad = cli::ProductPolicyFile { states: 2, actions: vec![2, 2], per_player: vec![] };
    std::fs::write(&policy_path, serde_json::to_string(&bad).unwrap()).unwrap();
    let status = bin()
        .args(["verify", "--game"])
        .arg(&game_path)
        .arg("--policy")
        .arg(&policy_path)
        .args(["--mode", "ne_sg"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn gen_families_validate_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tb.json");
    let run = |path: &Path| {
        bin()
            .args(["gen", "--family", "turn-based-random", "--states", "4", "--players", "2"])
            .args(["--seed", "11", "--out"])
            .arg(path)
            .status()
            .unwrap()
    };
    assert_eq!(run(&out).code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let file: cli::TurnBasedGameFile = serde_json::from_str(&text).unwrap();
    assert!(file.game.validate().is_empty());
    let annotation = TurnBasedAnnotation { controller: file.controller.clone(), sink: None };
    assert!(annotation.validate(&file.game).is_empty());
    // identical seed, identical bytes
    let out2 = dir.path().join("tb2.json");
    assert_eq!(run(&out2).code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&out2).unwrap());
    // a 3-state finite game has validated transition rows by construction
    let out3 = dir.path().join("fin.json");
    let status = bin()
        .args(["gen", "--family", "uniform", "--states", "3", "--players", "2"])
        .args(["--actions", "2", "--horizon", "3", "--seed", "4", "--out"])
        .arg(&out3)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(cli::load_game(&out3).is_ok());
}

#[test]
fn bench_writes_the_documented_header_and_monotone_medians() {
    let dir = tempfile::tempdir().unwrap();
    let suite = BenchSuite {
        games: vec![
            SuiteGame {
                id: "g0".into(),
                family: "uniform".into(),
                states: 2,
                players: 2,
                actions: 2,
                horizon: 2,
                seed: 71,
            },
            SuiteGame {
                id: "g1".into(),
                family: "uniform".into(),
                states: 2,
                players: 2,
                actions: 2,
                horizon: 2,
                seed: 74,
            },
        ],
        seeds: vec![0, 1],
        budgets: vec![150.0, 1_500.0, 15_000.0],
        epsilon: 0.1,
        delta: 0.1,
        n_visit: Some(500.0),
    };
    let suite_path = dir.path().join("suite.json");
    std::fs::write(&suite_path, serde_json::to_string(&suite).unwrap()).unwrap();
    let out = dir.path().join("bench.csv");
    let rows = cli::cmd_bench(&suite_path, &out).unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with(BENCH_CSV_HEADER));
    assert_eq!(text.lines().count(), 1 + 12);
    // medians non-increasing in the budget
    let medians = cli::median_gap_per_budget(&rows, &suite.budgets);
    assert!(
        medians[0] >= medians[1] && medians[1] >= medians[2],
        "medians not monotone: {medians:?}"
    );
    // reproducible
    let out2 = dir.path().join("bench2.csv");
    cli::cmd_bench(&suite_path, &out2).unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn circuit_compile_and_check_flow() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = r#"{
        "nodes": ["x", "y", "z"],
        "gates": [
            {"kind": "assign", "params": [1.0], "output": "x"},
            {"kind": "mul", "params": [0.6], "inputs": ["x"], "output": "y"},
            {"kind": "less", "inputs": ["y", "x"], "output": "z"}
        ]
    }"#;
    let circuit_path = dir.path().join("c.json");
    std::fs::write(&circuit_path, circuit).unwrap();
    let game_out = dir.path().join("g.json");
    let circuit_out = dir.path().join("c_rebuilt.json");
    let status = bin()
        .args(["compile-circuit", "--in"])
        .arg(&circuit_path)
        .args(["--epsilon", "0.0625", "--out"])
        .arg(&game_out)
        .arg("--out-circuit")
        .arg(&circuit_out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0), "compile-circuit failed");
    assert!(game_out.exists() && circuit_out.exists());

    // a satisfying assignment of the base circuit passes check-circuit
    let assignment_path = dir.path().join("a.json");
    std::fs::write(&assignment_path, r#"{"x": 1.0, "y": 0.6, "z": 1.0}"#).unwrap();
    let status = bin()
        .args(["check-circuit", "--circuit"])
        .arg(&circuit_path)
        .arg("--assignment")
        .arg(&assignment_path)
        .args(["--epsilon", "0.1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    // breaking the constant fails
    std::fs::write(&assignment_path, r#"{"x": 0.9, "y": 0.6, "z": 1.0}"#).unwrap();
    let status = bin()
        .args(["check-circuit", "--circuit"])
        .arg(&circuit_path)
        .arg("--assignment")
        .arg(&assignment_path)
        .args(["--epsilon", "0.1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn out_dir_env_redirects_relative_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let game = families::random_finite_game(2, 2, &[2, 2], 2, 12);
    let game_path = dir.path().join("g.json");
    std::fs::write(&game_path, serde_json::to_string(&game).unwrap()).unwrap();
    let policy_rel = "nested/pi.json";
    let status = bin()
        .env(cli::OUT_DIR_ENV, dir.path())
        .args(["solve", "--game"])
        .arg(&game_path)
        .args(["--tolerance", "1e-8", "--out", policy_rel])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join(policy_rel).exists());
}
