#![allow(clippy::needless_range_loop)]

//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured quantities (run with `--nocapture` to see
//! them). Oracles here are deliberately independent of the code paths they
//! check: brute-force enumeration, Monte-Carlo simulation, grid search,
//! and direct constraint evaluation.

use rayon::prelude::*;
use sglab::bandit::Exp3Ix;
use sglab::circuit::{
    check_coloring, compile, gadgets, make_valid_coloring, CompileParams, Gate,
    GeneralizedCircuit,
};
use sglab::game::{
    backward_induction_cce, equilibrium_gaps_finite, exact_value_finite, exact_value_unnormalized,
    families, fix_player_action, sample_trajectory, stage_deviation_gaps, stage_support_gaps,
    state_visitation_finite, truncate_support, GapMode, NonstationaryJointPolicy, TurnBasedPolicy,
};
use sglab::learner::{
    estimate_visitation, run_learner, LearnerParams, ShiftedRewardAccess, SimulatorAccess,
};
use sglab::rng::{seed_rng, stream_rng};

/// Criterion 1: on random small games, dynamic-programming best responses
/// equal brute-force enumeration over all deterministic policies exactly,
/// and exact policy evaluation matches Monte-Carlo estimates within three
/// standard errors.
#[test]
fn acceptance_1_oracle_equivalence() {
    let episodes = 100_000usize;
    let mut checked_br = 0usize;
    let mut max_z = 0.0f64;
    for idx in 0..100u64 {
        let s = 2 + (idx % 2) as usize; // 2..3
        let m = 1 + (idx % 2) as usize; // alternate 1 and 2 players
        let h = 1 + (idx / 2 % 2) as usize; // 1..2
        let counts = vec![2usize; m];
        let game = families::random_finite_game(s, m, &counts, h, 10_000 + idx);
        let policy = families::random_nonstationary_policy(&game, 20_000 + idx);

        // best response vs enumeration, pointwise and exact
        for player in 0..m {
            let (_, v) = sglab::game::best_response_finite(&game, &policy, player).unwrap();
            let brute = brute_force_best_response(&game, &policy, player);
            for hh in 0..h {
                for ss in 0..s {
                    assert_eq!(
                        v[hh][ss], brute[hh][ss],
                        "game {idx} player {player} at ({hh},{ss})"
                    );
                    checked_br += 1;
                }
            }
        }

        // exact evaluation vs Monte-Carlo
        let exact = exact_value_finite(&game, &policy).unwrap();
        let mut rng = stream_rng(31_337, idx);
        let mut sums = vec![0.0f64; m];
        let mut sumsq = vec![0.0f64; m];
        for _ in 0..episodes {
            let t = sample_trajectory(&game, &policy, &mut rng);
            for i in 0..m {
                let ret: f64 = t.steps.iter().map(|st| st.rewards[i]).sum();
                sums[i] += ret;
                sumsq[i] += ret * ret;
            }
        }
        for i in 0..m {
            let mean = sums[i] / episodes as f64;
            let var = (sumsq[i] / episodes as f64 - mean * mean).max(1e-12);
            let se = (var / episodes as f64).sqrt();
            let z = (mean - exact.at_mu(&game, i)).abs() / se;
            max_z = max_z.max(z);
            assert!(z <= 3.0, "game {idx} player {i}: z = {z:.2}");
        }
    }
    println!(
        "ACCEPTANCE 1 (oracle equivalence): PASS — {checked_br} best-response cells exact, \
         max Monte-Carlo z-score {max_z:.2} <= 3"
    );
}

fn brute_force_best_response(
    game: &sglab::game::FiniteHorizonGame,
    policy: &NonstationaryJointPolicy,
    player: usize,
) -> Vec<Vec<f64>> {
    let n_own = game.action_counts[player];
    let cells = game.horizon * game.num_states;
    let total = n_own.pow(cells as u32);
    let mut best = vec![vec![f64::NEG_INFINITY; game.num_states]; game.horizon];
    for code in 0..total {
        let mut c = code;
        let mut det = vec![vec![0usize; game.num_states]; game.horizon];
        for row in det.iter_mut() {
            for slot in row.iter_mut() {
                *slot = c % n_own;
                c /= n_own;
            }
        }
        let joint = fix_player_action(policy, player, &det);
        let v = exact_value_finite(game, &joint).unwrap();
        for h in 0..game.horizon {
            for s in 0..game.num_states {
                if v.values[player][h][s] > best[h][s] {
                    best[h][s] = v.values[player][h][s];
                }
            }
        }
    }
    best
}

/// Criterion 2: the backward-induction baseline is an `H * tol`
/// equilibrium under exact verification, across sizes up to (4 states, 3
/// players, 3 actions, horizon 4).
#[test]
fn acceptance_2_backward_induction_cce() {
    let tol = 1e-6;
    let mut worst_ratio = 0.0f64;
    for idx in 0..50u64 {
        let s = 2 + (idx % 3) as usize; // 2..4
        let m = 2 + (idx % 2) as usize; // 2..3
        let a = 2 + (idx / 3 % 2) as usize; // 2..3
        let h = 1 + (idx % 4) as usize; // 1..4
        let counts = vec![a; m];
        let game = families::random_finite_game(s, m, &counts, h, 40_000 + idx);
        let policy = backward_induction_cce(&game, tol).unwrap();
        let gaps = equilibrium_gaps_finite(&game, &policy, GapMode::CceAtMu).unwrap();
        let bound = h as f64 * tol;
        for (i, g) in gaps.iter().enumerate() {
            assert!(*g <= bound, "game {idx} player {i}: gap {g:.3e} > {bound:.3e}");
            worst_ratio = worst_ratio.max(g / bound);
        }
    }
    println!(
        "ACCEPTANCE 2 (backward-induction equilibrium): PASS — 50 games, \
         worst gap at {:.3}% of the H*tol bound",
        100.0 * worst_ratio
    );
}

/// Criterion 3: the sample-based learner reaches an exact deviation
/// benefit of at most 0.1 on at least 4 of 5 seeds per game, on five fixed
/// tiny games, within 5e5 episodes per run.
#[test]
fn acceptance_3_learner_end_to_end() {
    let game_seeds = [71u64, 72, 73, 74, 75];
    let runs: Vec<(u64, u64)> = game_seeds
        .iter()
        .flat_map(|&g| (0..5u64).map(move |s| (g, s)))
        .collect();
    let results: Vec<(u64, u64, f64, u64)> = runs
        .par_iter()
        .map(|&(game_seed, seed)| {
            let game = families::random_finite_game(2, 2, &[2, 2], 2, game_seed);
            let mut params = LearnerParams::defaults(2, 2, 2, 2, 0.1, 0.1).unwrap();
            // practical budgets; the schedule identity k = 8 j / p is kept
            params.k = 40_000.0;
            params.j = params.k * params.p / 8.0;
            params.n_visit = 10_000.0;
            // rewards shifted into [0, 1] so the loss construction stays in
            // range; the output policy is judged against the original game
            let mut access = ShiftedRewardAccess::new(SimulatorAccess::new(&game));
            let mut rng = stream_rng(9000 + game_seed, seed);
            let out = run_learner(&mut access, &params, &mut rng).unwrap();
            assert!(
                out.metrics.episodes <= 500_000,
                "game {game_seed} seed {seed}: {} episodes",
                out.metrics.episodes
            );
            let gaps = equilibrium_gaps_finite(&game, &out.policy, GapMode::CceAtMu).unwrap();
            let gap = gaps.iter().cloned().fold(0.0, f64::max);
            (game_seed, seed, gap, out.metrics.episodes)
        })
        .collect();
    let mut summary = String::new();
    for &game_seed in &game_seeds {
        let ok = results
            .iter()
            .filter(|(g, _, gap, _)| *g == game_seed && *gap <= 0.1)
            .count();
        let worst = results
            .iter()
            .filter(|(g, _, _, _)| *g == game_seed)
            .map(|(_, _, gap, _)| *gap)
            .fold(0.0f64, f64::max);
        assert!(ok >= 4, "game {game_seed}: only {ok}/5 seeds reached gap <= 0.1 (worst {worst:.3})");
        summary.push_str(&format!(" g{game_seed}:{ok}/5(max {worst:.3})"));
    }
    let episodes = results.iter().map(|r| r.3).max().unwrap();
    println!(
        "ACCEPTANCE 3 (learner end-to-end): PASS —{summary}, max episodes {episodes} <= 5e5"
    );
}

/// Criterion 4: empirical bandit regret stays under
/// `10 sqrt(T B) log(T0 B / delta)` for every `T <= T0 = 1e4`, on at least
/// 95% of 200 seeded runs, for B in {2, 10}.
#[test]
fn acceptance_4_bandit_regret() {
    let t0 = 10_000u64;
    let delta = 0.05;
    for &arms in &[2usize, 10] {
        let ok: usize = (0..200u64)
            .into_par_iter()
            .map(|seed| {
                let mut rng = stream_rng(777, seed * 7 + arms as u64);
                let mut bandit = Exp3Ix::new(arms, t0, delta).unwrap();
                // oblivious adversary: arm 0 is best; Bernoulli losses with a
                // mean gap plus a deterministic periodic drift
                let means: Vec<f64> =
                    (0..arms).map(|b| 0.3 + 0.3 * (b.min(3) as f64) / 3.0).collect();
                let mut cum_chosen = 0.0f64;
                let mut cum_arm = vec![0.0f64; arms];
                let bound_factor = 10.0 * ((t0 * arms as u64) as f64 / delta).ln();
                let mut within = true;
                for t in 1..=t0 {
                    use rand::Rng;
                    let phase = if t % 100 < 50 { 0.1 } else { -0.1 };
                    let losses: Vec<f64> = means
                        .iter()
                        .enumerate()
                        .map(|(b, m)| {
                            let p = (m + if b % 2 == 0 { phase } else { -phase })
                                .clamp(0.0, 1.0);
                            if rng.gen::<f64>() < p {
                                1.0
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    let (arm, _) = bandit.sample(&mut rng).unwrap();
                    bandit.update(arm, losses[arm]).unwrap();
                    cum_chosen += losses[arm];
                    for (b, l) in losses.iter().enumerate() {
                        cum_arm[b] += l;
                    }
                    let regret = cum_arm
                        .iter()
                        .map(|c| cum_chosen - c)
                        .fold(f64::NEG_INFINITY, f64::max);
                    let bound = bound_factor * ((t * arms as u64) as f64).sqrt();
                    if regret > bound {
                        within = false;
                        break;
                    }
                }
                within as usize
            })
            .sum();
        assert!(ok >= 190, "B = {arms}: only {ok}/200 runs stayed under the bound");
        println!(
            "ACCEPTANCE 4 (bandit regret, B = {arms}): PASS — {ok}/200 runs within \
             10 sqrt(TB) log(T0 B / delta) for all T"
        );
    }
}

/// Criterion 5: the visitation estimator with `N = C_N S iota / eps_tvd^2`
/// samples lands within `eps_tvd` in L1 of the exact distribution at every
/// step, on at least 95% of 100 seeds.
#[test]
fn acceptance_5_visitation_concentration() {
    let game = families::random_finite_game(3, 2, &[2, 2], 3, 5150);
    let policy = families::random_nonstationary_policy(&game, 5151);
    let exact = state_visitation_finite(&game, &policy);
    let (eps, delta): (f64, f64) = (0.2, 0.1);
    let eps_tvd: f64 = 0.1;
    let c_n = 1.2;
    let iota = (3.0 * 3.0 * 2.0 / (eps * delta)).ln();
    let n = (c_n * 3.0 * iota / (eps_tvd * eps_tvd)).ceil() as usize;
    let ok: usize = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let mut access = SimulatorAccess::new(&game);
            let mut rng = stream_rng(6000, seed);
            let dhat = estimate_visitation(&mut access, &policy, n, &mut rng);
            let all_close = (0..game.horizon).all(|h| {
                let l1: f64 =
                    dhat[h].iter().zip(&exact[h]).map(|(a, b)| (a - b).abs()).sum();
                l1 <= eps_tvd
            });
            all_close as usize
        })
        .sum();
    assert!(ok >= 95, "only {ok}/100 seeds met the L1 budget");
    println!(
        "ACCEPTANCE 5 (visitation concentration): PASS — {ok}/100 seeds with \
         N = {n} samples, L1 <= {eps_tvd}"
    );
}

fn grid(res: usize) -> Vec<f64> {
    (0..=res).map(|k| k as f64 / res as f64).collect()
}

/// Criterion 6: brute-force verification of the three gate gadgets: over
/// the 0.05-resolution policy grid, every policy whose designated states
/// are eps'-unimprovable satisfies the gate's input-output condition.
#[test]
fn acceptance_6_gadget_lemmas() {
    let res = 20;
    let levels = grid(res);

    // constant gadget: eps < (1 - gamma) / 2
    for value in [false, true] {
        let g = gadgets::embed_assign(value, 0.5).unwrap();
        let eps = 0.2;
        let mut qualifying = 0;
        for &pv in &levels {
            let policy = TurnBasedPolicy { values: vec![pv, 0.0] };
            if g.gap(&policy, 0).unwrap() <= eps {
                qualifying += 1;
                let expect = if value { 1.0 } else { 0.0 };
                assert_eq!(policy.values[0], expect, "assign({value}) forced {pv}");
            }
        }
        assert!(qualifying >= 1);
    }

    // scaled-sum gadget over representative (alpha, psi, beta) tables
    let gamma = 0.03125;
    let eps = 0.5;
    let eps_prime = 0.0015;
    assert!(gamma * 0.25 * eps - 2.0 * gamma * gamma > eps_prime);
    let cases = [
        (0.25, 0.25, 0.25),   // xi = zeta = 1/2
        (0.5, -0.5, 0.25),    // xi = 1, zeta = -1
        (0.125, 0.25, 0.25),  // xi = 1/4, zeta = 1/2
        (-0.25, -0.25, -0.25) // negative stake
    ];
    let mut total_qualifying = 0usize;
    for &(alpha, psi, beta) in &cases {
        let g = gadgets::embed_muladd(alpha, psi, beta, gamma).unwrap();
        let xi = alpha / (2.0 * beta);
        let zeta = psi / (2.0 * beta);
        let counter = levels
            .par_iter()
            .map(|&p1| {
                let mut bad = 0usize;
                let mut good = 0usize;
                for &p2 in &levels {
                    for &p3 in &levels {
                        for &pw in &levels {
                            let policy =
                                TurnBasedPolicy { values: vec![p1, p2, p3, pw, 0.0] };
                            if g.gap(&policy, 2).unwrap() <= eps_prime
                                && g.gap(&policy, 3).unwrap() <= eps_prime
                            {
                                good += 1;
                                let target = (xi * p1 + zeta * p2).clamp(0.0, 1.0);
                                if (p3 - target).abs() > eps + 1e-12 {
                                    bad += 1;
                                }
                            }
                        }
                    }
                }
                (bad, good)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        assert_eq!(counter.0, 0, "scaled-sum ({alpha},{psi},{beta}): counterexamples");
        assert!(counter.1 > 0, "scaled-sum ({alpha},{psi},{beta}): vacuous test");
        total_qualifying += counter.1;
    }

    // duplicate-input scaled sum: both coefficients read the same state
    // and the helper's jump probability doubles
    {
        let (alpha, beta) = (0.25, 0.25);
        let g = gadgets::embed_muladd_dup(alpha, beta, gamma).unwrap();
        let coeff = alpha / (2.0 * beta); // each of xi = zeta
        let counter = levels
            .par_iter()
            .map(|&pv| {
                let mut bad = 0usize;
                let mut good = 0usize;
                for &p3 in &levels {
                    for &pw in &levels {
                        let policy = TurnBasedPolicy { values: vec![pv, p3, pw, 0.0] };
                        if g.gap(&policy, 1).unwrap() <= eps_prime
                            && g.gap(&policy, 2).unwrap() <= eps_prime
                        {
                            good += 1;
                            let target = (2.0 * coeff * pv).clamp(0.0, 1.0);
                            if (p3 - target).abs() > eps + 1e-12 {
                                bad += 1;
                            }
                        }
                    }
                }
                (bad, good)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        assert_eq!(counter.0, 0, "duplicate-input scaled sum: counterexamples");
        assert!(counter.1 > 0);
        total_qualifying += counter.1;
    }

    // comparison gadget, both stake signs
    for &beta in &[0.25, -0.25] {
        let g = gadgets::embed_less(beta, gamma).unwrap();
        let counter = levels
            .par_iter()
            .map(|&p1| {
                let mut bad = 0usize;
                let mut good = 0usize;
                for &p2 in &levels {
                    for &p3 in &levels {
                        for &pw in &levels {
                            let policy =
                                TurnBasedPolicy { values: vec![p1, p2, p3, pw, 0.0] };
                            if g.gap(&policy, 2).unwrap() <= eps_prime
                                && g.gap(&policy, 3).unwrap() <= eps_prime
                            {
                                good += 1;
                                if p1 <= p2 - eps && (p3 - 1.0).abs() > eps + 1e-12 {
                                    bad += 1;
                                }
                                if p1 >= p2 + eps && p3.abs() > eps + 1e-12 {
                                    bad += 1;
                                }
                            }
                        }
                    }
                }
                (bad, good)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        assert_eq!(counter.0, 0, "comparison (beta {beta}): counterexamples");
        assert!(counter.1 > 0);
        total_qualifying += counter.1;
    }
    println!(
        "ACCEPTANCE 6 (gadget guarantees by grid search): PASS — zero counterexamples, \
         {total_qualifying} qualifying grid policies across cases"
    );
}

/// Criterion 7: the coloring construction on a 50-gate random circuit is
/// valid, in range, and adds the closed-form chain size (48 nodes per
/// scaled-sum input at eps = 1/16).
#[test]
fn acceptance_7_coloring_pipeline() {
    let mut circuit = GeneralizedCircuit::default();
    let mut rng = seed_rng(333);
    let n = 50;
    for i in 0..n {
        circuit.add_node(format!("n{i}"));
    }
    use rand::Rng;
    for out in 0..n {
        let kind = rng.gen_range(0..6);
        let in1 = rng.gen_range(0..n);
        let in2 = rng.gen_range(0..n);
        circuit.gates.push(match kind {
            0 => Gate::Assign { value: rng.gen(), out },
            1..=3 => Gate::MulAdd {
                xi: rng.gen_range(-1.0..=1.0),
                zeta: rng.gen_range(-1.0..=1.0),
                in1,
                in2,
                out,
            },
            _ => Gate::Less { in1, in2, out },
        });
    }
    assert_eq!(circuit.gates.len(), 50);
    let (rebuilt, coloring, stats) = make_valid_coloring(&circuit, 1.0 / 16.0).unwrap();
    let report = check_coloring(&rebuilt, &coloring).unwrap();
    assert!(report.valid, "violations: {:?}", report.violations);
    for v in &coloring.values {
        let a = v.abs();
        assert!((0.25..=0.5).contains(&a), "color {v} out of range");
    }
    assert_eq!(stats.chain_nodes_per_input, 48);
    assert_eq!(stats.epsilon_prime, 0.25);
    let muladds = circuit
        .gates
        .iter()
        .filter(|g| matches!(g, Gate::MulAdd { .. }))
        .count();
    let expected_nodes = n + muladds * (2 + 2 * 48);
    assert_eq!(rebuilt.num_nodes(), expected_nodes);
    println!(
        "ACCEPTANCE 7 (coloring pipeline): PASS — 50-gate circuit, {} scaled-sum gates, \
         {} nodes after rebuilding, coloring valid and in range",
        muladds,
        rebuilt.num_nodes()
    );
}

fn mixed_test_circuit() -> GeneralizedCircuit {
    let mut c = GeneralizedCircuit::default();
    let a = c.add_node("a");
    let b = c.add_node("b");
    let d = c.add_node("d");
    let e = c.add_node("e");
    c.gates.push(Gate::Assign { value: true, out: a });
    c.gates.push(Gate::MulAdd { xi: 0.5, zeta: 0.5, in1: a, in2: a, out: b });
    c.gates.push(Gate::Less { in1: a, in2: b, out: d });
    c.gates.push(Gate::MulAdd { xi: 1.0, zeta: -1.0, in1: a, in2: b, out: e });
    c
}

/// Criterion 8: rescaling a compiled game to discount 1/2 preserves every
/// stationary policy's expected discounted reward sums to 1e-8.
#[test]
fn acceptance_8_rescale_invariance() {
    let mut worst = 0.0f64;
    for (cseed, circuit) in [mixed_test_circuit()].into_iter().enumerate() {
        let (rebuilt, coloring, _) = make_valid_coloring(&circuit, 0.09).unwrap();
        let params = CompileParams { epsilon: 0.3, gamma: 0.03, epsilon_prime: 4e-4 };
        let compiled = compile(&rebuilt, &coloring, params).unwrap();
        let half = compiled.rescale_to_half_discount().unwrap();
        for pseed in 0..10u64 {
            let policy =
                families::random_stationary_policy(&compiled.game, 88_000 + pseed);
            let u = exact_value_unnormalized(&compiled.game, &policy).unwrap();
            let u_half = exact_value_unnormalized(&half.game, &policy).unwrap();
            for i in 0..2 {
                for s in 0..compiled.game.num_states {
                    let diff = (u.values[i][s] - u_half.values[i][s]).abs();
                    worst = worst.max(diff);
                    assert!(
                        diff <= 1e-8,
                        "circuit {cseed} policy {pseed} player {i} state {s}: {diff:.3e}"
                    );
                }
            }
        }
    }
    println!(
        "ACCEPTANCE 8 (rescale invariance): PASS — max value discrepancy {worst:.3e} <= 1e-8"
    );
}

/// Criterion 9: the finite-horizon view of a discounted game changes any
/// stationary policy's (unnormalized) values by at most `eps / (1 - gamma)`.
#[test]
fn acceptance_9_discounted_to_finite() {
    let eps = 0.05;
    let mut worst_ratio = 0.0f64;
    for gseed in 0..10u64 {
        let gamma = 0.4 + 0.03 * gseed as f64;
        let game = families::random_discounted_game(3, 2, &[2, 2], gamma, 61_000 + gseed);
        let fin = sglab::game::discounted_to_finite(&game, eps).unwrap();
        let bound = eps / (1.0 - gamma);
        for pseed in 0..20u64 {
            let policy = families::random_stationary_policy(&game, 62_000 + 100 * gseed + pseed);
            let unnorm = exact_value_unnormalized(&game, &policy).unwrap();
            let nonstat = NonstationaryJointPolicy::from_stationary(
                &policy,
                fin.horizon,
                &game.action_counts,
            );
            let finv = exact_value_finite(&fin, &nonstat).unwrap();
            for i in 0..2 {
                for s in 0..3 {
                    let diff = (unnorm.values[i][s] - finv.values[i][0][s]).abs();
                    assert!(diff <= bound + 1e-9, "game {gseed} policy {pseed}: {diff}");
                    worst_ratio = worst_ratio.max(diff / bound);
                }
            }
        }
    }
    println!(
        "ACCEPTANCE 9 (discounted-to-finite reduction): PASS — 10 games x 20 policies, \
         worst error at {:.1}% of eps/(1-gamma)",
        100.0 * worst_ratio
    );
}

/// Criterion 10: support truncation moves each per-player per-state
/// distribution by at most `2/(k-1)` in L1, and the truncated policy's
/// worst supported-action gap obeys `k max rho + 8/(k (1-gamma))`.
#[test]
fn acceptance_10_support_truncation() {
    let mut worst_l1_ratio = 0.0f64;
    let mut worst_gap_ratio = 0.0f64;
    for gseed in 0..6u64 {
        let gamma = [0.3, 0.5, 0.6][gseed as usize % 3];
        let (game, _) = families::random_turn_based_game(4, 2, gamma, 71_000 + gseed);
        for pseed in 0..4u64 {
            let product = families::random_product_policy(&game, 72_000 + 10 * gseed + pseed);
            let rho = stage_deviation_gaps(&game, &product).unwrap();
            let max_rho = rho.iter().flatten().cloned().fold(0.0, f64::max);
            for k in [2.0, 4.0, 8.0] {
                let truncated = truncate_support(&game, &product, k).unwrap();
                for i in 0..2 {
                    for s in 0..4 {
                        let l1: f64 = truncated.per_player[i][s]
                            .iter()
                            .zip(&product.per_player[i][s])
                            .map(|(a, b)| (a - b).abs())
                            .sum();
                        let l1_bound = 2.0 / (k - 1.0);
                        assert!(l1 <= l1_bound + 1e-12);
                        worst_l1_ratio = worst_l1_ratio.max(l1 / l1_bound);
                    }
                }
                let support_gaps = stage_support_gaps(&game, &truncated).unwrap();
                let worst_gap = support_gaps.iter().flatten().cloned().fold(0.0, f64::max);
                let bound = k * max_rho + 8.0 / (k * (1.0 - gamma)) + 1e-9;
                assert!(
                    worst_gap <= bound,
                    "game {gseed} policy {pseed} k {k}: gap {worst_gap:.4} > {bound:.4}"
                );
                worst_gap_ratio = worst_gap_ratio.max(worst_gap / bound);
            }
        }
    }
    println!(
        "ACCEPTANCE 10 (support truncation): PASS — worst L1 at {:.1}% of 2/(k-1), \
         worst supported gap at {:.1}% of k*rho + 8/(k(1-gamma))",
        100.0 * worst_l1_ratio,
        100.0 * worst_gap_ratio
    );
}
