use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::active::{ensure_consistent, replay, ActiveLearner, LearnOutcome};
use crate::dfa::Dfa;
use crate::error::OracleError;
use crate::oracle::{QueryCache, Teacher};
use crate::passive::{rpni_learn, rpni_learn_noisy_capped, LabeledSample};
use crate::tolerant::{failure_of, refine_cache, sample_training_set, CeToMqMap, LaprConfig};
use crate::word::{Alphabet, Word};

/// Disagreement levels tried by the noise-tolerant merger, loosest last.
const PASSIVE_AFTER: usize = 2;

const TOLERANCES: [f64; 4] = [0.1, 0.2, 0.3, 0.4];

/// One passive-refinement event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementEvent {
    /// Equivalence queries asked before the event.
    pub eq_index: usize,
    /// Estimate for the passive hypothesis that relabelled the cache.
    pub epsilon_estimate: f64,
    pub strategy: String,
    pub sample_size: usize,
    pub flips: usize,
    pub hp_states: usize,
    /// Equivalence queries spent rebuilding the passive hypothesis.
    pub guided_eqs: usize,
}

#[derive(Debug, Clone)]
pub struct LaprOutcome {
    pub outcome: LearnOutcome,
    pub log: Vec<RefinementEvent>,
    pub map: CeToMqMap,
}

/// Bits to write down `h` plus the oracle answers it gets wrong: a
/// transition table, one acceptance bit per state, and the position of
/// each disagreement among `answers` entries.
fn description_length(h: &Dfa, estimate: f64, answers: usize) -> f64 {
    let errors = (estimate * answers as f64).round();
    state_bits(h.num_states(), h.alphabet().len()) + errors * ((answers + 1) as f64).log2()
}

fn state_bits(states: usize, symbols: usize) -> f64 {
    let n = states as f64;
    n * (symbols as f64 * n.log2().max(1.0) + 1.0)
}

/// The passive hypothesis for `sample` and its error estimate against the
/// cache. The noise-tolerant merger is run at several tolerances and the
/// candidate with the shortest description wins.
pub(crate) fn passive_hypothesis(
    config: &LaprConfig,
    cache: &QueryCache,
    sample: &LabeledSample,
    alphabet: &Alphabet,
    cap: usize,
) -> Option<(Dfa, f64)> {
    if !config.noise_tolerant {
        let h = rpni_learn(sample, alphabet, config.passive_scoring).expect("sample is consistent");
        let e = cache.estimate_epsilon(&h);
        return Some((h, e));
    }
    let trusted: BTreeSet<Word> = cache.counterexamples().iter().map(|(w, _)| w.clone()).collect();
    let answers = cache.mq_len() - cache.eq_len();
    let mut best: Option<(Dfa, f64, f64)> = None;
    // loosest first: later, tighter runs stop once their size alone costs
    // more than the best description so far
    for &t in TOLERANCES.iter().rev() {
        let max_red = match &best {
            None => cap,
            Some((_, _, len)) => (1..).take_while(|&n| state_bits(n, alphabet.len()) <= *len).last().unwrap_or(1).min(cap),
        };
        let Some(h) = rpni_learn_noisy_capped(sample, &trusted, alphabet, t, max_red).expect("sample is consistent")
        else {
            continue;
        };
        let e = cache.estimate_epsilon(&h);
        let len = description_length(&h, e, answers);
        if best.as_ref().is_none_or(|b| len < b.2) {
            best = Some((h, e, len));
        }
    }
    best.map(|(h, e, _)| (h, e))
}

struct Session<'a> {
    config: &'a LaprConfig,
    learner: Box<dyn ActiveLearner>,
    map: CeToMqMap,
    log: Vec<RefinementEvent>,
    accepted: Option<Dfa>,
    /// Set once a label contradiction has been seen.
    noisy: bool,
    since_passive: usize,
    repairs: usize,
}

impl Session<'_> {
    fn per_ce(teacher: &Teacher) -> usize {
        teacher.budgets().per_ce_mq
    }

    /// Passive branch: learn H_p from the cache, rebuild it under
    /// equivalence-query guidance while its error estimate is too high,
    /// relabel the cache with it and rebuild the active learner. Returns true
    /// when an equivalence query accepted H_p outright.
    fn passive(&mut self, teacher: &mut Teacher) -> Result<bool, OracleError> {
        self.noisy = true;
        self.since_passive = 0;
        let alphabet = teacher.target().alphabet().clone();
        let eq_index = teacher.stats().eq_total;
        let seed = self.config.sample_seed ^ eq_index as u64;
        let sample_of = |teacher: &Teacher| {
            sample_training_set(teacher.cache(), self.config.sample_strategy, seed).expect("counterexamples recorded")
        };
        let sample = sample_of(teacher);
        let sample_size = sample.len();
        let (mut hp, mut estimate) = passive_hypothesis(self.config, teacher.cache(), &sample, &alphabet, usize::MAX)
            .expect("uncapped runs always finish");
        // keep the active hypothesis when it explains the answers more cheaply
        let answers = teacher.cache().mq_len() - teacher.cache().eq_len();
        let active = self.learner.hypothesis();
        let active_len = description_length(&active, teacher.cache().estimate_epsilon(&active), answers);
        if self.config.noise_tolerant && active_len < description_length(&hp, estimate, answers) {
            let ces = teacher.cache().counterexamples().to_vec();
            let per_ce = Self::per_ce(teacher);
            self.learner = replay(self.config.inner, &alphabet, &ces, teacher, per_ce)?.0;
            return Ok(false);
        }
        let mut guided_eqs = 0;
        while estimate > self.config.epsilon_expected && guided_eqs < self.config.guided_rounds {
            let Some((w, label)) = teacher.eq(&hp)? else {
                self.push_event(eq_index, estimate, sample_size, 0, &hp, guided_eqs);
                self.accepted = Some(hp);
                return Ok(true);
            };
            teacher.cache_mut().record_counterexample(w, label)?;
            guided_eqs += 1;
            let sample = sample_of(teacher);
            // guided rounds may not grow H_p far past its previous size
            let cap = 2 * hp.num_states() + 2;
            (hp, estimate) = passive_hypothesis(self.config, teacher.cache(), &sample, &alphabet, cap)
                .or_else(|| passive_hypothesis(self.config, teacher.cache(), &sample, &alphabet, usize::MAX))
                .expect("uncapped runs always finish");
        }
        let flips = refine_cache(teacher.cache_mut(), &hp);
        self.push_event(eq_index, estimate, sample_size, flips, &hp, guided_eqs);
        let ces = teacher.cache().counterexamples().to_vec();
        let per_ce = Self::per_ce(teacher);
        self.learner = replay(self.config.inner, &alphabet, &ces, teacher, per_ce)?.0;
        Ok(false)
    }

    fn push_event(&mut self, eq_index: usize, estimate: f64, sample_size: usize, flips: usize, hp: &Dfa, guided_eqs: usize) {
        self.log.push(RefinementEvent {
            eq_index,
            epsilon_estimate: estimate,
            strategy: self.config.sample_strategy.to_string(),
            sample_size,
            flips,
            hp_states: hp.num_states(),
            guided_eqs,
        });
    }

    fn run(&mut self, teacher: &mut Teacher) -> Result<(), OracleError> {
        let per_ce = Self::per_ce(teacher);
        self.learner.initialize(teacher)?;
        let mut after_passive = false;
        loop {
            if !after_passive {
                let ces = teacher.cache().counterexamples().to_vec();
                let map = &mut self.map;
                let failed = ensure_consistent(self.learner.as_mut(), &ces, teacher, per_ce, &mut |w, r| {
                    map.extend(w, &r.mqs_asked)
                })?;
                if failed.is_some() {
                    if self.repair(teacher)? {
                        return Ok(());
                    }
                    after_passive = true;
                    continue;
                }
            }
            after_passive = false;
            let Some((w, label)) = teacher.eq(&self.learner.hypothesis())? else {
                return Ok(());
            };
            let record = teacher.cache_mut().record_counterexample(w.clone(), label)?;
            self.noisy |= record.corrected();
            if record.new {
                let report = self.learner.refine(&w, label, teacher, per_ce)?;
                if report.succeeded {
                    self.map.extend(&w, &report.mqs_asked);
                    self.since_passive += 1;
                    if !(self.noisy && self.since_passive >= self.config.ce_limit) {
                        continue;
                    }
                }
            }
            if self.repair(teacher)? {
                return Ok(());
            }
            after_passive = true;
        }
    }

    /// The first contradiction is handled by rebuilding the active learner
    /// from the cache as it stands; later ones go through the passive branch.
    fn repair(&mut self, teacher: &mut Teacher) -> Result<bool, OracleError> {
        self.repairs += 1;
        if self.repairs < PASSIVE_AFTER && !(self.noisy && self.since_passive >= self.config.ce_limit) {
            self.noisy = true;
            self.since_passive = 0;
            let alphabet = teacher.target().alphabet().clone();
            let ces = teacher.cache().counterexamples().to_vec();
            let per_ce = Self::per_ce(teacher);
            self.learner = replay(self.config.inner, &alphabet, &ces, teacher, per_ce)?.0;
            return Ok(false);
        }
        self.passive(teacher)
    }
}

/// LearnAnyWay with passive refinement. Counterexamples refine the active
/// learner as usual. When a refinement fails, or once noise has shown up
/// and counterexamples keep piling up, a passive hypothesis learned from
/// the cache relabels every untrusted entry and the active learner is
/// rebuilt from the corrected cache.
pub fn lapr_learn(config: &LaprConfig, teacher: &mut Teacher) -> LaprOutcome {
    let alphabet = teacher.target().alphabet().clone();
    let mut s = Session {
        config,
        learner: config.inner.build(&alphabet),
        map: CeToMqMap::new(),
        log: Vec::new(),
        accepted: None,
        noisy: false,
        since_passive: 0,
        repairs: 0,
    };
    let result = s.run(teacher);
    let hypothesis = s.accepted.take().unwrap_or_else(|| s.learner.hypothesis());
    LaprOutcome {
        outcome: LearnOutcome { hypothesis, failure: result.err().map(failure_of), stats: teacher.stats() },
        log: s.log,
        map: s.map,
    }
}
