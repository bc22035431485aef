use serde::{Deserialize, Serialize};

use crate::dfa::Dfa;
use crate::error::OracleError;
use crate::oracle::audit;
use crate::oracle::pmat::exact_counterexample;
use crate::oracle::{LabelSource, MembershipOracle, PmatConfig, PmatOracle, QueryCache};
use crate::word::Word;

/// Query accounting for one session.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStats {
    /// Every membership query issued, cache hits included.
    pub mq_total: usize,
    /// Membership queries that reached the backend.
    pub mq_unique: usize,
    pub eq_total: usize,
    /// Backend answers that disagreed with the ground truth.
    pub errors_injected: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Cap on backend membership queries.
    pub mq: usize,
    pub eq: usize,
    /// Cap on membership queries issued while processing one counterexample.
    pub per_ce_mq: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { mq: 50_000, eq: 200, per_ce_mq: 2_000 }
    }
}

/// A cached membership oracle plus an exact equivalence oracle.
///
/// Fresh membership answers come from a [`LabelSource`]; an `Unknown`
/// answer goes to the fallback source when one is configured and is
/// otherwise cached as reject. Every answer is cached with oracle
/// provenance, so repeated queries are free and bit-identical.
pub struct Teacher {
    cache: QueryCache,
    source: Box<dyn LabelSource + Send>,
    fallback: Option<Box<dyn LabelSource + Send>>,
    target: Dfa,
    ce_min_len: usize,
    seed: u64,
    budgets: Budgets,
    stats: OracleStats,
}

impl Teacher {
    /// The simulated teacher for `config`.
    pub fn simulated(config: PmatConfig, budgets: Budgets) -> Self {
        let target = config.target.clone();
        let (ce_min_len, seed) = (config.ce_min_len, config.seed);
        Teacher::new(target, ce_min_len, seed, Box::new(PmatOracle::new(config)), budgets)
    }

    /// A teacher whose membership answers come from `source`; `target` drives
    /// equivalence queries and error accounting.
    pub fn new(
        target: Dfa,
        ce_min_len: usize,
        seed: u64,
        source: Box<dyn LabelSource + Send>,
        budgets: Budgets,
    ) -> Self {
        Teacher {
            cache: QueryCache::new(),
            source,
            fallback: None,
            target,
            ce_min_len,
            seed,
            budgets,
            stats: OracleStats::default(),
        }
    }

    pub fn with_fallback(mut self, fallback: Box<dyn LabelSource + Send>) -> Self {
        self.fallback = Some(fallback);
        self
    }

    pub fn cache(&self) -> &QueryCache {
        &self.cache
    }

    pub fn cache_mut(&mut self) -> &mut QueryCache {
        &mut self.cache
    }

    pub fn stats(&self) -> OracleStats {
        self.stats
    }

    pub fn budgets(&self) -> Budgets {
        self.budgets
    }

    pub fn target(&self) -> &Dfa {
        &self.target
    }

    pub fn ce_min_len(&self) -> usize {
        self.ce_min_len
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Membership query through the cache.
    pub fn mq(&mut self, word: &Word) -> Result<bool, OracleError> {
        self.stats.mq_total += 1;
        if let Some(label) = self.cache.label(word) {
            return Ok(label);
        }
        if self.stats.mq_unique >= self.budgets.mq {
            return Err(OracleError::MqBudget(self.budgets.mq));
        }
        self.target.alphabet().check_word(word)?;
        self.stats.mq_unique += 1;
        let mut answer = self.source.label(word, &self.cache).as_bool();
        if answer.is_none() {
            if let Some(fb) = self.fallback.as_mut() {
                answer = fb.label(word, &self.cache).as_bool();
            }
        }
        let label = answer.unwrap_or(false);
        if label != self.target.eval(word) {
            self.stats.errors_injected += 1;
        }
        Ok(self.cache.insert_oracle(word.clone(), label))
    }

    /// Equivalence query: `None` when `hypothesis` is correct, otherwise a
    /// counterexample with its true label. Does not touch the cache.
    pub fn eq(&mut self, hypothesis: &Dfa) -> Result<Option<(Word, bool)>, OracleError> {
        if self.stats.eq_total >= self.budgets.eq {
            return Err(OracleError::EqBudget(self.budgets.eq));
        }
        let index = self.stats.eq_total as u64;
        self.stats.eq_total += 1;
        let ce = exact_counterexample(&self.target, hypothesis, self.ce_min_len, self.seed, index)?;
        if let Some((w, label)) = &ce {
            audit::record(&self.target, hypothesis, w, *label, self.ce_min_len);
        }
        Ok(ce)
    }
}

impl MembershipOracle for Teacher {
    fn query(&mut self, word: &Word) -> Result<bool, OracleError> {
        self.mq(word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfa::tests::starts_with_a;
    use crate::oracle::{Provenance, QueryLabel};
    use crate::word::{Alphabet, Symbol};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> Word {
        let len = rng.gen_range(0..=max_len);
        (0..len).map(|_| Symbol(rng.gen_range(0..2))).collect()
    }

    #[test]
    fn zero_noise_matches_target() {
        let target = starts_with_a();
        let mut t = Teacher::simulated(PmatConfig::new(target.clone(), 0.0, 1, 0), Budgets::default());
        for w in crate::word::words_up_to(2, 7) {
            assert_eq!(t.mq(&w).unwrap(), target.eval(&w));
        }
        assert_eq!(t.stats().errors_injected, 0);
    }

    #[test]
    fn repeated_query_is_persistent() {
        let mut t = Teacher::simulated(PmatConfig::new(starts_with_a(), 0.5, 9, 0), Budgets::default());
        let w = Alphabet::ab().parse_word("abab").unwrap();
        let first = t.mq(&w).unwrap();
        for _ in 0..99 {
            assert_eq!(t.mq(&w).unwrap(), first);
        }
        assert_eq!(t.stats().mq_total, 100);
        assert_eq!(t.stats().mq_unique, 1);
        assert_eq!(t.cache().get(&w).unwrap().provenance, Provenance::Oracle);
    }

    #[test]
    fn answers_do_not_depend_on_query_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let words: Vec<Word> = (0..500).map(|_| random_word(&mut rng, 15)).collect();
        let cfg = PmatConfig::new(starts_with_a(), 0.2, 17, 0);
        let mut t1 = Teacher::simulated(cfg.clone(), Budgets::default());
        let mut t2 = Teacher::simulated(cfg, Budgets::default());
        let forward: Vec<bool> = words.iter().map(|w| t1.mq(w).unwrap()).collect();
        let mut backward: Vec<bool> = words.iter().rev().map(|w| t2.mq(w).unwrap()).collect();
        backward.reverse();
        assert_eq!(forward, backward);
    }

    #[test]
    fn flip_rate_concentrates() {
        let target = starts_with_a();
        let mut t = Teacher::simulated(
            PmatConfig::new(target, 0.1, 2024, 0),
            Budgets { mq: 1_000_000, ..Budgets::default() },
        );
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        while t.stats().mq_unique < 10_000 {
            let w = random_word(&mut rng, 30);
            t.mq(&w).unwrap();
        }
        let frac = t.stats().errors_injected as f64 / t.stats().mq_unique as f64;
        assert!((0.09..=0.11).contains(&frac), "{frac}");
        // the cache-based estimate against ground truth sees the same rate
        let est = t.cache().estimate_epsilon(&starts_with_a());
        assert!((est - frac).abs() < 1e-12);
    }

    #[test]
    fn budgets_are_enforced() {
        let mut t = Teacher::simulated(
            PmatConfig::new(starts_with_a(), 0.0, 0, 0),
            Budgets { mq: 2, eq: 1, per_ce_mq: 10 },
        );
        let ws = crate::word::words_up_to(2, 2);
        t.mq(&ws[0]).unwrap();
        t.mq(&ws[1]).unwrap();
        t.mq(&ws[1]).unwrap();
        assert_eq!(t.mq(&ws[2]), Err(OracleError::MqBudget(2)));
        let h = Dfa::constant(Alphabet::ab(), true);
        assert!(t.eq(&h).unwrap().is_some());
        assert_eq!(t.eq(&h), Err(OracleError::EqBudget(1)));
    }

    #[test]
    fn equivalence_answers_are_exact_and_long() {
        let target = starts_with_a();
        let mut t = Teacher::simulated(PmatConfig::new(target.clone(), 0.4, 3, 7), Budgets::default());
        let hyp = target.complement();
        for _ in 0..20 {
            let (w, label) = t.eq(&hyp).unwrap().unwrap();
            assert!(w.len() >= 7);
            assert_eq!(label, target.eval(&w));
            assert_ne!(label, hyp.eval(&w));
        }
        assert_eq!(t.eq(&target).unwrap(), None);
    }

    struct Unsure;
    impl LabelSource for Unsure {
        fn label(&mut self, _: &Word, _: &QueryCache) -> QueryLabel {
            QueryLabel::Unknown
        }
    }

    #[test]
    fn unknown_falls_back_or_rejects() {
        let target = starts_with_a();
        let a = Alphabet::ab().parse_word("a").unwrap();
        let mut plain = Teacher::new(target.clone(), 0, 0, Box::new(Unsure), Budgets::default());
        assert!(!plain.mq(&a).unwrap());
        assert_eq!(plain.cache().get(&a).unwrap().provenance, Provenance::Oracle);
        let fallback = PmatOracle::new(PmatConfig::new(target.clone(), 0.0, 0, 0));
        let mut backed = Teacher::new(target, 0, 0, Box::new(Unsure), Budgets::default())
            .with_fallback(Box::new(fallback));
        assert!(backed.mq(&a).unwrap());
    }
}
