//! A public stream of uniform random bits, plus the action-sampling
//! protocols built on it. Every reader that consumes the same prefix of the
//! stream observes identical values, which is what lets agents coordinate
//! joint draws without communicating.

use rand::Rng;

use crate::bandit::Exp3Ix;
use crate::rng::{seed_rng, ChaCha8Rng};
use crate::{Error, Result};

/// Replayable stream of uniform bits with exact consumption accounting.
#[derive(Debug, Clone)]
pub struct SharedRandomness {
    rng: ChaCha8Rng,
    buffer: u64,
    buffered: u32,
    bits_consumed: u64,
}

impl SharedRandomness {
    pub fn new(seed: u64) -> Self {
        Self { rng: seed_rng(seed), buffer: 0, buffered: 0, bits_consumed: 0 }
    }

    pub fn bits_consumed(&self) -> u64 {
        self.bits_consumed
    }

    /// Next `n <= 56` bits as the low bits of a word.
    pub fn draw_bits(&mut self, n: u32) -> u64 {
        assert!(n <= 56);
        if n == 0 {
            return 0;
        }
        while self.buffered < n {
            let byte: u8 = self.rng.gen();
            self.buffer = (self.buffer << 8) | byte as u64;
            self.buffered += 8;
        }
        self.buffered -= n;
        let out = (self.buffer >> self.buffered) & ((1u64 << n) - 1);
        self.bits_consumed += n as u64;
        out
    }

    /// Uniform index in `[0, n)` by rejection sampling over
    /// `ceil(log2 n)`-bit words; consumes zero bits when `n <= 1`.
    pub fn draw_below(&mut self, n: u64) -> u64 {
        if n <= 1 {
            return 0;
        }
        let bits = 64 - (n - 1).leading_zeros();
        loop {
            let v = self.draw_bits(bits);
            if v < n {
                return v;
            }
        }
    }

    /// Uniform quantile in `[0, 1)` from 53 bits.
    pub fn draw_quantile(&mut self) -> f64 {
        self.draw_bits(53) as f64 / (1u64 << 53) as f64
    }
}

/// Per-category bit accounting for one stream reader.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SharedStats {
    pub total_bits: u64,
    pub mixture_draws: u64,
    pub mixture_bits: u64,
    pub max_mixture_draw_bits: u64,
    pub bandit_quantiles: u64,
    pub bandit_bits: u64,
    pub uniform_draws: u64,
    pub uniform_bits: u64,
}

/// Where episode actions come from. The learner itself is agnostic: the
/// centralized runner draws from a private RNG, the decentralized runner
/// follows the shared-bit protocol below.
pub(crate) trait ActionSource {
    /// Entry position drawn from a weighted mixture. Uniform mixtures (the
    /// learner's recorded-draw cells) take the cheap indexed path.
    fn mixture_entry(&mut self, entries: &[(usize, f64)]) -> usize;
    /// One arm per player from that player's bandit cell.
    fn bandit_arms(&mut self, cells: &mut [&mut Exp3Ix]) -> Result<Vec<(usize, f64)>>;
    /// Uniform flat joint profile out of `n`.
    fn uniform_joint(&mut self, n: usize) -> usize;
    /// Stage boundary: verify reader synchronization.
    fn end_stage(&mut self) -> Result<()> {
        Ok(())
    }
    fn stats(&self) -> Option<SharedStats> {
        None
    }
}

fn is_uniform(entries: &[(usize, f64)]) -> bool {
    entries.iter().all(|(_, w)| *w == entries[0].1)
}

fn entry_at_quantile(entries: &[(usize, f64)], u: f64) -> usize {
    let mut acc = 0.0;
    for (pos, (_, w)) in entries.iter().enumerate() {
        acc += w;
        if u < acc {
            return pos;
        }
    }
    entries.len() - 1
}

pub(crate) struct CentralSource {
    pub rng: ChaCha8Rng,
}

impl ActionSource for CentralSource {
    fn mixture_entry(&mut self, entries: &[(usize, f64)]) -> usize {
        if is_uniform(entries) {
            self.rng.gen_range(0..entries.len())
        } else {
            entry_at_quantile(entries, self.rng.gen())
        }
    }

    fn bandit_arms(&mut self, cells: &mut [&mut Exp3Ix]) -> Result<Vec<(usize, f64)>> {
        cells.iter_mut().map(|b| b.sample(&mut self.rng)).collect()
    }

    fn uniform_joint(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}

/// The shared-randomness protocol, simulated with one stream replica per
/// agent stepped in lockstep. Public draws (mixture indices, the uniform
/// tail of an episode) consume one rejection-sampled word that every
/// replica computes identically; at the bandit step each agent consumes one
/// 53-bit quantile per player and uses only its own slot, so consumption
/// stays identical without anyone revealing a private distribution.
pub(crate) struct SharedSource {
    replicas: Vec<SharedRandomness>,
    stats: SharedStats,
}

impl SharedSource {
    pub fn new(seed: u64, num_agents: usize) -> Self {
        assert!(num_agents > 0);
        Self {
            replicas: (0..num_agents).map(|_| SharedRandomness::new(seed)).collect(),
            stats: SharedStats::default(),
        }
    }

    fn lockstep_below(&mut self, n: u64) -> Result<(u64, u64)> {
        let mut value = 0;
        let mut bits = 0;
        for (i, r) in self.replicas.iter_mut().enumerate() {
            let before = r.bits_consumed();
            let v = r.draw_below(n);
            let used = r.bits_consumed() - before;
            if i == 0 {
                value = v;
                bits = used;
            } else if v != value || used != bits {
                return Err(Error::Desync(format!(
                    "replica {i} drew {v} ({used} bits), expected {value} ({bits} bits)"
                )));
            }
        }
        Ok((value, bits))
    }
}

impl ActionSource for SharedSource {
    fn mixture_entry(&mut self, entries: &[(usize, f64)]) -> usize {
        let (pos, bits) = if is_uniform(entries) {
            let (v, bits) =
                self.lockstep_below(entries.len() as u64).expect("lockstep replicas diverged");
            (v as usize, bits)
        } else {
            // weights are public, so one shared quantile settles the draw
            let mut q = 0.0;
            for (i, r) in self.replicas.iter_mut().enumerate() {
                let v = r.draw_quantile();
                if i == 0 {
                    q = v;
                } else {
                    assert_eq!(v, q, "lockstep replicas diverged");
                }
            }
            (entry_at_quantile(entries, q), 53)
        };
        self.stats.mixture_draws += 1;
        self.stats.mixture_bits += bits;
        self.stats.max_mixture_draw_bits = self.stats.max_mixture_draw_bits.max(bits);
        self.stats.total_bits += bits;
        pos
    }

    fn bandit_arms(&mut self, cells: &mut [&mut Exp3Ix]) -> Result<Vec<(usize, f64)>> {
        let mut out = Vec::with_capacity(cells.len());
        for (slot, bandit) in cells.iter_mut().enumerate() {
            // every agent consumes the word; only agent `slot` interprets it
            let mut q = 0.0;
            for (i, r) in self.replicas.iter_mut().enumerate() {
                let v = r.draw_quantile();
                if i == 0 {
                    q = v;
                } else if v != q {
                    return Err(Error::Desync(format!(
                        "replica {i} quantile {v} != {q} at bandit slot {slot}"
                    )));
                }
            }
            self.stats.bandit_quantiles += 1;
            self.stats.bandit_bits += 53;
            self.stats.total_bits += 53;
            out.push(bandit.sample_at_quantile(q)?);
        }
        Ok(out)
    }

    fn uniform_joint(&mut self, n: usize) -> usize {
        let (v, bits) = self.lockstep_below(n as u64).expect("lockstep replicas diverged");
        self.stats.uniform_draws += 1;
        self.stats.uniform_bits += bits;
        self.stats.total_bits += bits;
        v as usize
    }

    fn end_stage(&mut self) -> Result<()> {
        let reference = self.replicas[0].bits_consumed();
        for (i, r) in self.replicas.iter().enumerate().skip(1) {
            if r.bits_consumed() != reference {
                return Err(Error::Desync(format!(
                    "stage checksum: replica {i} consumed {} bits, replica 0 consumed {reference}",
                    r.bits_consumed()
                )));
            }
        }
        Ok(())
    }

    fn stats(&self) -> Option<SharedStats> {
        Some(self.stats)
    }
}
