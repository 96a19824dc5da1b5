use crate::game::FiniteHorizonGame;
use crate::rng::ChaCha8Rng;

/// Trajectory-sampling access to an unknown game. The learner sees the
/// dimensions and can reset and step episodes; it never reads the
/// transition or reward tables.
pub trait GameAccess {
    fn num_players(&self) -> usize;
    fn num_states(&self) -> usize;
    fn action_counts(&self) -> &[usize];
    fn horizon(&self) -> usize;
    /// Start a new episode and return the initial state.
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> usize;
    /// Play a flat joint action at `(h, state)`; returns per-player rewards
    /// and the next state.
    fn step(&mut self, h: usize, state: usize, flat_action: usize, rng: &mut ChaCha8Rng)
        -> (Vec<f64>, usize);
    /// Episodes started so far.
    fn episodes_used(&self) -> u64;
}

/// Simulator-backed access for a known tabular game.
pub struct SimulatorAccess<'a> {
    game: &'a FiniteHorizonGame,
    episodes: u64,
}

impl<'a> SimulatorAccess<'a> {
    pub fn new(game: &'a FiniteHorizonGame) -> Self {
        Self { game, episodes: 0 }
    }

    pub fn game(&self) -> &FiniteHorizonGame {
        self.game
    }
}

/// Access adapter mapping rewards affinely into `[0, 1]` via
/// `r -> (r + 1) / 2`.
///
/// With nonnegative rewards every step loss the learner constructs stays
/// inside `[0, 1]` by the value-estimate bounds, so the bandit contract
/// holds without clamping. Policies transfer back unchanged; a deviation
/// benefit of `eps` on the shifted game is `2 eps` on the original, since
/// the shift rescales all value differences by exactly one half. Use this
/// wrapper whenever the game's rewards may be negative.
pub struct ShiftedRewardAccess<A> {
    inner: A,
}

impl<A: GameAccess> ShiftedRewardAccess<A> {
    pub fn new(inner: A) -> Self {
        Self { inner }
    }

    pub fn into_inner(self) -> A {
        self.inner
    }
}

impl<A: GameAccess> GameAccess for ShiftedRewardAccess<A> {
    fn num_players(&self) -> usize {
        self.inner.num_players()
    }

    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    fn action_counts(&self) -> &[usize] {
        self.inner.action_counts()
    }

    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) -> usize {
        self.inner.reset(rng)
    }

    fn step(
        &mut self,
        h: usize,
        state: usize,
        flat_action: usize,
        rng: &mut ChaCha8Rng,
    ) -> (Vec<f64>, usize) {
        let (mut rewards, next) = self.inner.step(h, state, flat_action, rng);
        for r in rewards.iter_mut() {
            *r = (*r + 1.0) / 2.0;
        }
        (rewards, next)
    }

    fn episodes_used(&self) -> u64 {
        self.inner.episodes_used()
    }
}

impl GameAccess for SimulatorAccess<'_> {
    fn num_players(&self) -> usize {
        self.game.num_players
    }

    fn num_states(&self) -> usize {
        self.game.num_states
    }

    fn action_counts(&self) -> &[usize] {
        &self.game.action_counts
    }

    fn horizon(&self) -> usize {
        self.game.horizon
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) -> usize {
        self.episodes += 1;
        crate::rng::sample_index(&self.game.mu, rng)
    }

    fn step(
        &mut self,
        h: usize,
        state: usize,
        flat_action: usize,
        rng: &mut ChaCha8Rng,
    ) -> (Vec<f64>, usize) {
        let rewards = self.game.reward_vector(h, state, flat_action);
        let next = crate::rng::sample_index(&self.game.transitions[h][state][flat_action], rng);
        (rewards, next)
    }

    fn episodes_used(&self) -> u64 {
        self.episodes
    }
}
