//! Seeded, addressable random streams.
//!
//! Every draw is a pure function of `(master seed, trial, address)` where the
//! address names the draw's role: the birthplace of ball `i`, the tie-break
//! priority of neighbor `w` when ball `i` sits at vertex `v`, and so on.
//! Stateless addressing means two processes that share a plan consume
//! *identical* randomness at identical addresses regardless of how many draws
//! either one makes — which is exactly what the couplings in
//! [`crate::coupling`] need to be exact rather than approximate.
//!
//! Per-address words come from a splitmix-style mixing chain; streams that
//! need many draws (Poisson sampling, graph generation) use a ChaCha8 RNG
//! seeded from a derived word.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

const KIND_BIRTHPLACE: u64 = 0x01;
const KIND_TIE_PRIORITY: u64 = 0x02;
const KIND_CHOICE: u64 = 0x03;
const KIND_RANK: u64 = 0x04;
const KIND_POISSON: u64 = 0x05;
const KIND_PARAM: u64 = 0x06;
const KIND_STREAM: u64 = 0x07;

/// 64-bit finalizer from splitmix64.
#[inline]
fn mix(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^= x >> 31;
    x
}

/// Derives an independent seed from a master seed and a label.
pub fn derive_seed(master: u64, label: u64) -> u64 {
    mix(mix(master ^ 0x9e37_79b9_7f4a_7c15) ^ label)
}

/// Unbiased-enough map from a random word to `0..n` (bias `< n / 2^64`).
#[inline]
fn bounded(word: u64, n: usize) -> u32 {
    debug_assert!(n > 0 && n <= u32::MAX as usize);
    ((word as u128 * n as u128) >> 64) as u32
}

/// Reproducible randomness for one simulation trial.
///
/// Identical `(master_seed, trial, address)` always yields identical output,
/// across runs and across coupled processes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngPlan {
    master_seed: u64,
    trial: u64,
}

impl RngPlan {
    pub fn new(master_seed: u64) -> Self {
        RngPlan {
            master_seed,
            trial: 0,
        }
    }

    /// Same master seed, independent substreams for trial `trial`.
    pub fn for_trial(&self, trial: u64) -> Self {
        RngPlan {
            master_seed: self.master_seed,
            trial,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn trial(&self) -> u64 {
        self.trial
    }

    #[inline]
    fn addr(&self, kind: u64, a: u64, b: u64, c: u64) -> u64 {
        let mut h = mix(self.master_seed ^ 0x9e37_79b9_7f4a_7c15);
        h = mix(h ^ kind);
        h = mix(h ^ self.trial);
        h = mix(h ^ a);
        h = mix(h ^ b);
        mix(h ^ c)
    }

    /// Uniform birthplace of ball `ball` (1-based) on `n` vertices.
    #[inline]
    pub fn birthplace(&self, ball: u64, n: usize) -> u32 {
        bounded(self.addr(KIND_BIRTHPLACE, ball, 0, 0), n)
    }

    /// Tie-break priority of `neighbor` when ball `ball` sits at `at`.
    ///
    /// Independent priorities per neighbor realize a uniformly random
    /// ranking of all neighbors of `at` for this ball; taking the
    /// highest-priority vertex of any candidate subset picks uniformly
    /// within that subset.
    #[inline]
    pub fn tie_priority(&self, ball: u64, at: u32, neighbor: u32) -> u64 {
        self.addr(KIND_TIE_PRIORITY, ball, at as u64, neighbor as u64)
    }

    /// Highest-priority candidate (ties in the 64-bit priority, which are
    /// essentially impossible, fall to the smaller id). Panics on an empty
    /// candidate list.
    pub fn pick_by_priority(&self, ball: u64, at: u32, candidates: &[u32]) -> u32 {
        let mut best = candidates[0];
        let mut best_p = self.tie_priority(ball, at, best);
        for &w in &candidates[1..] {
            let p = self.tie_priority(ball, at, w);
            if p > best_p || (p == best_p && w < best) {
                best = w;
                best_p = p;
            }
        }
        best
    }

    /// The `slot`-th uniform bin choice of ball `ball` (d-choice process).
    #[inline]
    pub fn choice(&self, ball: u64, slot: u32, n: usize) -> u32 {
        bounded(self.addr(KIND_CHOICE, ball, slot as u64, 0), n)
    }

    /// Uniform rank in `0..n` for ball `ball` (rank-coupled runs).
    #[inline]
    pub fn rank(&self, ball: u64, n: usize) -> usize {
        bounded(self.addr(KIND_RANK, ball, 0, 0), n) as usize
    }

    /// Uniform draw in `0..n` for auxiliary case parameters.
    #[inline]
    pub fn param(&self, index: u64, n: usize) -> u32 {
        bounded(self.addr(KIND_PARAM, index, 0, 0), n)
    }

    pub fn param_u64(&self, index: u64) -> u64 {
        self.addr(KIND_PARAM, index, 1, 0)
    }

    /// Poisson-distributed ball count with the given mean.
    pub fn poisson_count(&self, mean: f64) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.addr(KIND_POISSON, 0, 0, 0));
        let poisson = rand_distr::Poisson::new(mean).expect("validated mean");
        poisson.sample(&mut rng) as u64
    }

    /// Seeded stream for consumers that need a sequence of draws.
    pub fn stream(&self, label: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.addr(KIND_STREAM, label, 0, 0))
    }
}
