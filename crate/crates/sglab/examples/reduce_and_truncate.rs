//! Discounted-game toolbox: the finite-horizon view of a discounted game
//! (with its value-error guarantee) and support truncation turning a
//! stage equilibrium into a well-supported one.
//!
//! ```bash
//! cargo run --release --example reduce_and_truncate
//! ```

use sglab::game::{
    discounted_to_finite, exact_value_finite, exact_value_unnormalized, families,
    stage_deviation_gaps, stage_support_gaps, truncate_support, NonstationaryJointPolicy,
};

fn main() {
    let gamma = 0.6;
    let game = families::random_discounted_game(3, 2, &[2, 2], gamma, 11);
    let eps = 0.05;
    let finite = discounted_to_finite(&game, eps).unwrap();
    println!(
        "discounted game (gamma {gamma}) -> horizon-{} game; step-h rewards carry gamma^(h-1)",
        finite.horizon
    );
    let policy = families::random_stationary_policy(&game, 12);
    let unnorm = exact_value_unnormalized(&game, &policy).unwrap();
    let nonstat =
        NonstationaryJointPolicy::from_stationary(&policy, finite.horizon, &game.action_counts);
    let fin_values = exact_value_finite(&finite, &nonstat).unwrap();
    let worst = (0..2)
        .flat_map(|i| (0..3).map(move |s| (i, s)))
        .map(|(i, s)| (unnorm.values[i][s] - fin_values.values[i][0][s]).abs())
        .fold(0.0f64, f64::max);
    println!(
        "worst truncation error {worst:.5} <= eps/(1-gamma) = {:.5}",
        eps / (1.0 - gamma)
    );

    // support truncation on a turn-based game
    let (tb_game, _) = families::random_turn_based_game(4, 2, 0.5, 13);
    let product = families::random_product_policy(&tb_game, 14);
    let rho = stage_deviation_gaps(&tb_game, &product).unwrap();
    let max_rho = rho.iter().flatten().cloned().fold(0.0, f64::max);
    println!("stage deviation gap of the random policy: {max_rho:.4}");
    for k in [2.0, 4.0, 8.0] {
        let truncated = truncate_support(&tb_game, &product, k).unwrap();
        let support = stage_support_gaps(&tb_game, &truncated).unwrap();
        let worst_support = support.iter().flatten().cloned().fold(0.0, f64::max);
        let bound = k * max_rho + 8.0 / (k * 0.5);
        println!(
            "k = {k}: supported-action gap {worst_support:.4} <= k rho + 8/(k(1-gamma)) = {bound:.4}"
        );
    }
}
