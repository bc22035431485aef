//! Learning through persistent membership errors: LearnAnyWay, LAPR, and
//! the counterexample-only passive baseline.

mod lapr;
mod learnanyway;

pub use lapr::{lapr_learn, LaprOutcome, RefinementEvent};
pub use learnanyway::learnanyway_learn;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::active::{FailureReason, LearnOutcome, LearnerKind};
use crate::dfa::Dfa;
use crate::error::{OracleError, SampleError};
use crate::oracle::{QueryCache, Teacher};
use crate::passive::{rpni_learn, LabeledSample, SampleStrategy, Scoring};
use crate::word::Word;

/// Membership queries asked while processing each counterexample.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CeToMqMap {
    map: BTreeMap<Word, Vec<(Word, bool)>>,
}

impl CeToMqMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn extend(&mut self, ce: &Word, mqs: &[(Word, bool)]) {
        self.map.entry(ce.clone()).or_default().extend_from_slice(mqs);
    }

    pub fn get(&self, ce: &Word) -> Option<&[(Word, bool)]> {
        self.map.get(ce).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &[(Word, bool)])> {
        self.map.iter().map(|(k, v)| (k, v.as_slice()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaprConfig {
    /// Noise level above which the passive hypothesis is rebuilt with
    /// equivalence-query guidance.
    pub epsilon_expected: f64,
    pub sample_strategy: SampleStrategy,
    pub passive_scoring: Scoring,
    pub inner: LearnerKind,
    /// Seed for the mixed-strategy draw.
    pub sample_seed: u64,
    /// Cap on equivalence queries spent in one guided passive phase.
    pub guided_rounds: usize,
    /// Learn the passive hypothesis with the noise-tolerant merger instead
    /// of exact red/blue merging with `passive_scoring`.
    pub noise_tolerant: bool,
    /// Once noise has been observed, counterexamples processed since the
    /// last passive phase that trigger another one.
    pub ce_limit: usize,
}

impl Default for LaprConfig {
    fn default() -> Self {
        LaprConfig {
            epsilon_expected: 0.15,
            sample_strategy: SampleStrategy::Mixed(10),
            passive_scoring: Scoring::Edsm,
            inner: LearnerKind::Ttt,
            sample_seed: 0,
            guided_rounds: 200,
            noise_tolerant: true,
            ce_limit: 6,
        }
    }
}

impl LaprConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.epsilon_expected) {
            return Err(format!("epsilon_expected must lie in [0, 1], got {}", self.epsilon_expected));
        }
        if self.guided_rounds == 0 {
            return Err("guided_rounds must be at least 1".into());
        }
        if self.ce_limit == 0 {
            return Err("ce_limit must be at least 1".into());
        }
        Ok(())
    }
}

/// Training set for the passive learner. Counterexamples are always
/// included and win over any cached membership label for the same word;
/// other words carry the membership oracle's own answer.
pub fn sample_training_set(
    cache: &QueryCache,
    strategy: SampleStrategy,
    seed: u64,
) -> Result<LabeledSample, SampleError> {
    if cache.eq_len() == 0 {
        return Err(SampleError::NoCounterexamples);
    }
    let mut sample = LabeledSample::new();
    for (w, l) in cache.counterexamples() {
        sample.insert(w.clone(), *l)?;
    }
    let others = cache.oracle_answers();
    let chosen: Vec<(&Word, bool)> = match strategy {
        SampleStrategy::CeOnly => Vec::new(),
        SampleStrategy::All => others,
        SampleStrategy::Mixed(k) => {
            let n = (k * cache.eq_len()).min(others.len());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            others.choose_multiple(&mut rng, n).copied().collect()
        }
    };
    for (w, l) in chosen {
        sample.insert(w.clone(), l)?;
    }
    Ok(sample)
}

/// Overwrites every non-counterexample cache entry with `h_p`'s
/// classification. Returns the number of labels that changed.
pub fn refine_cache(cache: &mut QueryCache, h_p: &Dfa) -> usize {
    cache.refine_with(h_p)
}

/// Counterexample-only passive baseline: RPNI on the counterexamples seen
/// so far, one equivalence query per round. Asks no membership queries.
pub fn passive_ce_learn(teacher: &mut Teacher, scoring: Scoring) -> LearnOutcome {
    let alphabet = teacher.target().alphabet().clone();
    let mut h = Dfa::constant(alphabet.clone(), false);
    let failure = loop {
        match teacher.eq(&h) {
            Err(e) => break FailureReason::from_oracle(&e),
            Ok(None) => break None,
            Ok(Some((w, l))) => {
                if let Err(e) = teacher.cache_mut().record_counterexample(w, l) {
                    debug_assert!(false, "{e}");
                    break Some(FailureReason::Conflict);
                }
                let sample = sample_training_set(teacher.cache(), SampleStrategy::CeOnly, 0)
                    .expect("counterexamples are consistent");
                h = rpni_learn(&sample, &alphabet, scoring).expect("consistent sample");
            }
        }
    };
    LearnOutcome { hypothesis: h, failure, stats: teacher.stats() }
}

pub(crate) fn failure_of(err: OracleError) -> FailureReason {
    FailureReason::from_oracle(&err).unwrap_or(FailureReason::Conflict)
}
