//! Simulated teacher with persistent membership-query errors.

use crate::dfa::{find_counterexample, Dfa};
use crate::error::OracleError;
use crate::oracle::{LabelSource, QueryCache, QueryLabel};
use crate::word::Word;

/// Ground truth plus noise parameters for a simulated teacher.
#[derive(Debug, Clone)]
pub struct PmatConfig {
    pub target: Dfa,
    /// Probability that a fresh membership answer is flipped.
    pub epsilon: f64,
    pub seed: u64,
    /// Counterexamples are at least this long whenever one exists.
    pub ce_min_len: usize,
}

impl PmatConfig {
    pub fn new(target: Dfa, epsilon: f64, seed: u64, ce_min_len: usize) -> Self {
        assert!((0.0..=1.0).contains(&epsilon), "epsilon must lie in [0, 1], got {epsilon}");
        PmatConfig { target, epsilon, seed, ce_min_len }
    }

    /// Truth XOR (coin < ε). A pure function of `(seed, word)`.
    pub fn answer(&self, word: &Word) -> (bool, bool) {
        let truth = self.target.eval(word);
        let flip = coin(self.seed, word) < self.epsilon;
        (truth ^ flip, flip)
    }

    /// Counterexample for the `eq_index`-th equivalence query, labelled with
    /// its true membership. Never noisy.
    pub fn counterexample(
        &self,
        hypothesis: &Dfa,
        eq_index: u64,
    ) -> Result<Option<(Word, bool)>, OracleError> {
        exact_counterexample(&self.target, hypothesis, self.ce_min_len, self.seed, eq_index)
    }
}

/// The equivalence oracle: a counterexample of length at least `min_len`
/// (when one exists) for the `eq_index`-th query, with its true label.
pub(crate) fn exact_counterexample(
    target: &Dfa,
    hypothesis: &Dfa,
    min_len: usize,
    seed: u64,
    eq_index: u64,
) -> Result<Option<(Word, bool)>, OracleError> {
    let seed = seed ^ eq_index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let ce = find_counterexample(target, hypothesis, min_len, seed)?;
    Ok(ce.map(|w| {
        let label = target.eval(&w);
        (w, label)
    }))
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keyed pseudo-random value in `[0, 1)` for `(seed, word)`. Stable across
/// runs and platforms.
pub fn coin(seed: u64, word: &Word) -> f64 {
    let mut h = splitmix64(seed ^ 0xD6E8_FEB8_6659_FD93);
    for s in word {
        h = splitmix64(h ^ (s.0 as u64 + 1));
    }
    h = splitmix64(h ^ (word.len() as u64).rotate_left(32));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Membership backend answering from a [`PmatConfig`].
#[derive(Debug, Clone)]
pub struct PmatOracle {
    config: PmatConfig,
}

impl PmatOracle {
    pub fn new(config: PmatConfig) -> Self {
        PmatOracle { config }
    }

    pub fn config(&self) -> &PmatConfig {
        &self.config
    }
}

impl LabelSource for PmatOracle {
    fn label(&mut self, word: &Word, _: &QueryCache) -> QueryLabel {
        QueryLabel::from_bool(self.config.answer(word).0)
    }
}
