use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sglab::cli;
use sglab::game::GapMode;

/// Stochastic-game laboratory: learn, verify, and compile.
#[derive(Parser)]
#[command(name = "sglab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sample-based equilibrium learner from a JSON manifest.
    Learn {
        /// manifest file (game path, seed, parameter overrides, outputs)
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Measure equilibrium gaps of a policy file against a game file.
    Verify {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        /// cce_at_mu | perfect | ne_sg | pne_sg | wsne_sg | pwsne_sg
        #[arg(long, default_value = "cce_at_mu")]
        mode: String,
        /// exit 0 iff the max per-player gap is at most this
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        /// optional JSON report destination
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random game from a named family.
    Gen {
        /// uniform | layered-chain | turn-based-random
        #[arg(long)]
        family: String,
        #[arg(long)]
        states: usize,
        #[arg(long)]
        players: usize,
        #[arg(long, default_value_t = 2)]
        actions: usize,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact backward-induction equilibrium baseline for a game file.
    Solve {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark suite and write (episodes, exact gap) curves as CSV.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compile a generalized circuit into a turn-based discounted game.
    CompileCircuit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        out: PathBuf,
        /// also write the normalized, rewired circuit
        #[arg(long)]
        out_circuit: Option<PathBuf>,
    },
    /// Check an assignment file against a circuit at a tolerance.
    CheckCircuit {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long)]
        epsilon: f64,
    },
}

fn run(command: Command) -> sglab::Result<i32> {
    match command {
        Command::Learn { manifest } => {
            let manifest: cli::RunManifest = {
                let text = std::fs::read_to_string(&manifest).map_err(|e| {
                    sglab::Error::InvalidParameter(format!("{}: {e}", manifest.display()))
                })?;
                serde_json::from_str(&text)?
            };
            let report = cli::cmd_learn(&manifest)?;
            println!(
                "learned in {} stages, {} episodes, visited {:?}",
                report.metrics.stages, report.metrics.episodes, report.metrics.visited_per_stage
            );
            if let Some(gaps) = &report.exact_gaps {
                println!("exact per-player gaps: {gaps:?}");
            }
            Ok(0)
        }
        Command::Verify { game, policy, mode, tolerance, out } => {
            let mode = GapMode::parse(&mode)?;
            let (code, report) =
                cli::cmd_verify(&game, &policy, mode, tolerance, out.as_deref())?;
            for (i, gap) in report.per_player_gaps.iter().enumerate() {
                println!("player {i}: gap {gap:.6e}");
            }
            println!(
                "max gap {:.6e} {} tolerance {:.3e}",
                report.max_gap,
                if report.passed { "<=" } else { ">" },
                report.tolerance
            );
            Ok(code)
        }
        Command::Gen { family, states, players, actions, horizon, gamma, seed, out } => {
            cli::cmd_gen(&family, states, players, actions, horizon, gamma, seed, &out)?;
            println!("wrote {}", out.display());
            Ok(0)
        }
        Command::Solve { game, tolerance, out } => {
            cli::cmd_solve_baseline(&game, tolerance, &out)?;
            println!("wrote {}", out.display());
            Ok(0)
        }
        Command::Bench { suite, out } => {
            let rows = cli::cmd_bench(&suite, &out)?;
            println!("wrote {} rows to {}", rows.len(), out.display());
            Ok(0)
        }
        Command::CompileCircuit { input, epsilon, out, out_circuit } => {
            let compiled =
                cli::cmd_compile_circuit(&input, epsilon, &out, out_circuit.as_deref())?;
            println!(
                "compiled {} states ({} circuit nodes), gamma {}",
                compiled.game.num_states,
                compiled.meta.node_states.len(),
                compiled.game.gamma
            );
            Ok(0)
        }
        Command::CheckCircuit { circuit, assignment, epsilon } => {
            let (code, report) = cli::cmd_check_circuit(&circuit, &assignment, epsilon)?;
            println!(
                "{}/{} gates satisfied (fraction {:.4})",
                report.satisfied, report.gates, report.satisfied_fraction
            );
            if !report.unsatisfied_gates.is_empty() {
                println!("unsatisfied gates: {:?}", report.unsatisfied_gates);
            }
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
