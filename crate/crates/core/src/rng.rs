//! Random sources for the trustor and trustee.
//!
//! Every stochastic operation in the crate draws through [`RandomSource`],
//! which exposes exactly the two primitives the game needs: a uniform draw in
//! `[0, 1)` for the trustee's return decision and a Beta draw for the
//! trustor's posterior samples. Keeping the interface this small makes runs
//! recordable ([`Recorder`]) and replayable ([`Replay`]), which is how paired
//! experiments share one stream of randomness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

pub trait RandomSource {
    /// A draw from Uniform[0, 1). The upper end is excluded, so `u < 1`
    /// always holds.
    fn uniform(&mut self) -> f64;

    /// A draw from Beta(`a`, `b`), `a, b > 0`.
    fn beta(&mut self, a: f64, b: f64) -> f64;
}

impl<S: RandomSource + ?Sized> RandomSource for &mut S {
    fn uniform(&mut self) -> f64 {
        (**self).uniform()
    }

    fn beta(&mut self, a: f64, b: f64) -> f64 {
        (**self).beta(a, b)
    }
}

/// ChaCha8-backed source. Agent `k` of a batch seeded with `s` uses
/// `SeededSource::for_agent(s, k)`: the generator is keyed by `s` and
/// reads from stream `k`, so agents never overlap and each one's draws are a
/// fixed function of `(s, k)`.
#[derive(Clone, Debug)]
pub struct SeededSource {
    rng: ChaCha8Rng,
}

impl SeededSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn for_agent(base_seed: u64, agent_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
        rng.set_stream(agent_index);
        Self { rng }
    }
}

impl RandomSource for SeededSource {
    fn uniform(&mut self) -> f64 {
        // `random::<f64>()` is the standard 53-bit draw on [0, 1).
        self.rng.random::<f64>()
    }

    fn beta(&mut self, a: f64, b: f64) -> f64 {
        Beta::new(a, b)
            .expect("Beta parameters must be positive and finite")
            .sample(&mut self.rng)
    }
}

/// One value taken from a [`RandomSource`], tagged with its kind.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Draw {
    Uniform(f64),
    Beta(f64),
}

impl Draw {
    pub fn value(self) -> f64 {
        match self {
            Draw::Uniform(v) | Draw::Beta(v) => v,
        }
    }
}

/// Wraps a source and logs every value it hands out.
#[derive(Clone, Debug)]
pub struct Recorder<S> {
    inner: S,
    draws: Vec<Draw>,
}

impl<S: RandomSource> Recorder<S> {
    pub fn new(inner: S) -> Self {
        Self {
            inner,
            draws: Vec::new(),
        }
    }

    pub fn draws(&self) -> &[Draw] {
        &self.draws
    }

    pub fn into_draws(self) -> Vec<Draw> {
        self.draws
    }
}

impl<S: RandomSource> RandomSource for Recorder<S> {
    fn uniform(&mut self) -> f64 {
        let u = self.inner.uniform();
        self.draws.push(Draw::Uniform(u));
        u
    }

    fn beta(&mut self, a: f64, b: f64) -> f64 {
        let x = self.inner.beta(a, b);
        self.draws.push(Draw::Beta(x));
        x
    }
}

/// Plays back a recorded stream, ignoring the requested Beta parameters.
///
/// Panics if the stream runs out or if the kind of the next recorded draw
/// does not match the kind requested; either means the replaying run has
/// diverged from the recorded one.
#[derive(Clone, Debug)]
pub struct Replay {
    draws: Vec<Draw>,
    pos: usize,
}

impl Replay {
    pub fn new(draws: Vec<Draw>) -> Self {
        Self { draws, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.draws.len() - self.pos
    }

    fn next(&mut self) -> Draw {
        let d = *self
            .draws
            .get(self.pos)
            .unwrap_or_else(|| panic!("replay stream exhausted after {} draws", self.pos));
        self.pos += 1;
        d
    }
}

impl RandomSource for Replay {
    fn uniform(&mut self) -> f64 {
        match self.next() {
            Draw::Uniform(u) => u,
            d => panic!("replay diverged: expected a uniform draw, found {d:?}"),
        }
    }

    fn beta(&mut self, _a: f64, _b: f64) -> f64 {
        match self.next() {
            Draw::Beta(x) => x,
            d => panic!("replay diverged: expected a Beta draw, found {d:?}"),
        }
    }
}

/// Returns the same values forever. Handy for pinning a single round.
#[derive(Clone, Copy, Debug)]
pub struct Fixed {
    pub uniform: f64,
    pub beta: f64,
}

impl RandomSource for Fixed {
    fn uniform(&mut self) -> f64 {
        self.uniform
    }

    fn beta(&mut self, _a: f64, _b: f64) -> f64 {
        self.beta
    }
}
