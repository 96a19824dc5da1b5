//! Exp3-IX against a fixed oblivious adversary: print the running regret
//! against the best arm and the high-probability bound shape
//! `10 sqrt(T B) log(T0 B / delta)`.
//!
//! ```bash
//! cargo run --release --example bandit_regret
//! ```

use rand::Rng;
use sglab::bandit::Exp3Ix;
use sglab::rng::seed_rng;

fn main() {
    let arms = 5usize;
    let t0 = 20_000u64;
    let delta = 0.05;
    let mut bandit = Exp3Ix::new(arms, t0, delta).unwrap();
    let mut rng = seed_rng(2);

    // Bernoulli losses; arm 0 has the smallest mean
    let means: Vec<f64> = (0..arms).map(|b| 0.25 + 0.12 * b as f64).collect();
    let mut cum_chosen = 0.0;
    let mut cum_arm = vec![0.0; arms];
    let bound_factor = 10.0 * ((t0 * arms as u64) as f64 / delta).ln();

    println!("{:>8} {:>12} {:>12} {:>10}", "t", "regret", "bound", "p(best)");
    for t in 1..=t0 {
        let losses: Vec<f64> = means
            .iter()
            .map(|m| if rng.gen::<f64>() < *m { 1.0 } else { 0.0 })
            .collect();
        let (arm, _prob) = bandit.sample(&mut rng).unwrap();
        bandit.update(arm, losses[arm]).unwrap();
        cum_chosen += losses[arm];
        for (b, l) in losses.iter().enumerate() {
            cum_arm[b] += l;
        }
        if t % 2_000 == 0 || t == 1 {
            let regret = cum_arm
                .iter()
                .map(|c| cum_chosen - c)
                .fold(f64::NEG_INFINITY, f64::max);
            let bound = bound_factor * ((t * arms as u64) as f64).sqrt();
            println!(
                "{t:>8} {regret:>12.1} {bound:>12.1} {:>10.3}",
                bandit.distribution()[0]
            );
        }
    }
}
