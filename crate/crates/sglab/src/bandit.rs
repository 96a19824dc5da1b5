//! Adversarial multi-armed bandit with a high-probability anytime regret
//! guarantee: Exp3-IX with fixed learning rate `sqrt(2 ln B / (B T0))` and
//! implicit-exploration parameter equal to half the learning rate.
//!
//! Losses live in `[0, 1]`. The sampling distribution is the softmax of the
//! negated cumulative importance-weighted loss estimates; the IX term in
//! the estimator denominator keeps the high-probability bound anytime.

use serde::{Deserialize, Serialize};

use crate::rng::ChaCha8Rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Exp3Ix {
    arms: usize,
    round: u64,
    horizon_cap: u64,
    delta: f64,
    learning_rate: f64,
    ix: f64,
    /// cumulative importance-weighted loss estimate per arm
    loss_estimates: Vec<f64>,
    /// arm and probability of the draw awaiting its loss
    pending: Option<(usize, f64)>,
}

impl Exp3Ix {
    pub fn new(arms: usize, horizon_cap: u64, delta: f64) -> Result<Self> {
        if arms == 0 {
            return Err(Error::Bandit("need at least one arm".into()));
        }
        if horizon_cap == 0 {
            return Err(Error::Bandit("horizon cap must be positive".into()));
        }
        if !(0.0 < delta && delta < 1.0) {
            return Err(Error::Bandit(format!("confidence must lie in (0,1), got {delta}")));
        }
        let b = arms as f64;
        let learning_rate = if arms == 1 {
            0.0
        } else {
            (2.0 * b.ln() / (b * horizon_cap as f64)).sqrt()
        };
        Ok(Self {
            arms,
            round: 0,
            horizon_cap,
            delta,
            learning_rate,
            ix: learning_rate / 2.0,
            loss_estimates: vec![0.0; arms],
            pending: None,
        })
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    /// Current sampling distribution, renormalized from log-weights.
    pub fn distribution(&self) -> Vec<f64> {
        let min = self.loss_estimates.iter().cloned().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = self
            .loss_estimates
            .iter()
            .map(|l| (-self.learning_rate * (l - min)).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }

    /// Draw an arm from the current distribution, recording the probability
    /// for the importance-weighted update. Errors after the horizon cap.
    pub fn sample(&mut self, rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
        let p = self.prepare_sample()?;
        let arm = crate::rng::sample_index(&p, rng);
        Ok(self.commit_sample(arm, &p))
    }

    /// Draw via an externally supplied uniform quantile in `[0, 1)`. Used by
    /// the shared-randomness execution mode, where the draw must be a pure
    /// function of a public random word.
    pub fn sample_at_quantile(&mut self, u: f64) -> Result<(usize, f64)> {
        let p = self.prepare_sample()?;
        let arm = crate::rng::index_at_quantile(&p, u);
        Ok(self.commit_sample(arm, &p))
    }

    fn prepare_sample(&self) -> Result<Vec<f64>> {
        if self.round >= self.horizon_cap {
            return Err(Error::Bandit(format!(
                "round {} reached the horizon cap {}",
                self.round, self.horizon_cap
            )));
        }
        Ok(self.distribution())
    }

    fn commit_sample(&mut self, arm: usize, p: &[f64]) -> (usize, f64) {
        self.pending = Some((arm, p[arm]));
        (arm, p[arm])
    }

    /// Feed back the loss for the most recent draw. The loss must be the
    /// one observed for that arm and lie in `[0, 1]`; anything else signals
    /// a bug in the caller's loss construction.
    pub fn update(&mut self, arm: usize, loss: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&loss) {
            return Err(Error::Bandit(format!("loss {loss} outside [0, 1]")));
        }
        let Some((pending_arm, prob)) = self.pending.take() else {
            return Err(Error::Bandit("update without a pending sample".into()));
        };
        if pending_arm != arm {
            self.pending = Some((pending_arm, prob));
            return Err(Error::Bandit(format!(
                "update for arm {arm} but arm {pending_arm} was sampled"
            )));
        }
        self.loss_estimates[arm] += loss / (prob + self.ix);
        self.round += 1;
        Ok(())
    }

    /// Importance-weighted estimate this update would add for `(arm, prob,
    /// loss)`; exposed so tests can check the estimator's bias directly.
    pub fn loss_estimate_increment(&self, prob: f64, loss: f64) -> f64 {
        loss / (prob + self.ix)
    }

    pub fn to_snapshot(&self) -> BanditSnapshot {
        BanditSnapshot {
            arms: self.arms,
            round: self.round,
            horizon_cap: self.horizon_cap,
            delta: self.delta,
            log_weights: self
                .loss_estimates
                .iter()
                .map(|l| -self.learning_rate * l)
                .collect(),
        }
    }

    pub fn from_snapshot(snap: &BanditSnapshot) -> Result<Self> {
        let mut bandit = Self::new(snap.arms, snap.horizon_cap, snap.delta)?;
        bandit.round = snap.round;
        if snap.log_weights.len() != snap.arms {
            return Err(Error::Bandit("snapshot arm count mismatch".into()));
        }
        bandit.loss_estimates = snap
            .log_weights
            .iter()
            .map(|w| {
                if bandit.learning_rate == 0.0 {
                    0.0
                } else {
                    -w / bandit.learning_rate
                }
            })
            .collect();
        Ok(bandit)
    }
}

/// Checkpointable bandit state: log-weights plus scalars.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BanditSnapshot {
    pub arms: usize,
    pub round: u64,
    pub horizon_cap: u64,
    pub delta: f64,
    pub log_weights: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seed_rng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fresh_instance_is_uniform() {
        let b = Exp3Ix::new(4, 100, 0.05).unwrap();
        for p in b.distribution() {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-12);
        }
        assert!(Exp3Ix::new(0, 100, 0.05).is_err());
    }

    #[test]
    fn single_arm_always_plays_zero() {
        let mut b = Exp3Ix::new(1, 10, 0.1).unwrap();
        let (arm, p) = b.sample(&mut seed_rng(1)).unwrap();
        assert_eq!(arm, 0);
        assert_abs_diff_eq!(p, 1.0);
    }

    #[test]
    fn same_parameters_same_state() {
        let a = Exp3Ix::new(3, 1000, 0.01).unwrap();
        let b = Exp3Ix::new(3, 1000, 0.01).unwrap();
        assert_eq!(a, b);
        assert_abs_diff_eq!(a.learning_rate(), (2.0 * 3f64.ln() / 3000.0).sqrt());
    }

    #[test]
    fn distribution_sums_to_one() {
        let mut b = Exp3Ix::new(5, 1000, 0.05).unwrap();
        let mut rng = seed_rng(3);
        for t in 0..50 {
            let (arm, _) = b.sample(&mut rng).unwrap();
            b.update(arm, if t % 2 == 0 { 1.0 } else { 0.25 }).unwrap();
            let total: f64 = b.distribution().iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn punished_arm_loses_probability() {
        let mut b = Exp3Ix::new(4, 200, 0.05).unwrap();
        let mut rng = seed_rng(9);
        for _ in 0..100 {
            let (arm, _) = b.sample(&mut rng).unwrap();
            b.update(arm, if arm == 0 { 1.0 } else { 0.0 }).unwrap();
        }
        assert!(b.distribution()[0] < 0.25);
    }

    #[test]
    fn zero_losses_keep_the_distribution_uniform() {
        let mut b = Exp3Ix::new(3, 500, 0.05).unwrap();
        let mut rng = seed_rng(4);
        for _ in 0..200 {
            let (arm, _) = b.sample(&mut rng).unwrap();
            b.update(arm, 0.0).unwrap();
        }
        for p in b.distribution() {
            assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bad_arm_is_abandoned_quickly() {
        let mut b = Exp3Ix::new(2, 2000, 0.05).unwrap();
        let mut rng = seed_rng(12);
        for _ in 0..2000 {
            let (arm, _) = b.sample(&mut rng).unwrap();
            b.update(arm, if arm == 0 { 1.0 } else { 0.0 }).unwrap();
        }
        assert!(b.distribution()[1] > 0.9, "p = {:?}", b.distribution());
    }

    #[test]
    fn contract_violations_error() {
        let mut b = Exp3Ix::new(2, 2, 0.05).unwrap();
        let mut rng = seed_rng(5);
        assert!(b.update(0, 0.5).is_err());
        let (arm, _) = b.sample(&mut rng).unwrap();
        assert!(b.update(arm, 1.2).is_err());
        assert!(b.update(1 - arm, 0.5).is_err());
        b.update(arm, 0.5).unwrap();
        let (arm, _) = b.sample(&mut rng).unwrap();
        b.update(arm, 0.0).unwrap();
        assert!(b.sample(&mut rng).is_err(), "horizon cap should bind");
    }

    #[test]
    fn snapshot_roundtrip() {
        let mut b = Exp3Ix::new(3, 100, 0.05).unwrap();
        let mut rng = seed_rng(6);
        for _ in 0..10 {
            let (arm, _) = b.sample(&mut rng).unwrap();
            b.update(arm, 0.5).unwrap();
        }
        let snap = b.to_snapshot();
        let json = serde_json::to_string(&snap).unwrap();
        let back = Exp3Ix::from_snapshot(&serde_json::from_str(&json).unwrap()).unwrap();
        for (p, q) in back.distribution().iter().zip(b.distribution()) {
            assert_abs_diff_eq!(*p, q, epsilon = 1e-12);
        }
        assert_eq!(back.round(), b.round());
    }
}
