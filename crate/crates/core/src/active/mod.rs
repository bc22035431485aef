//! Minimally-adequate-teacher learners: L* with an observation table and a
//! discrimination-tree learner in the TTT family. Both process
//! counterexamples by Rivest–Schapire binary search.

mod decompose;
mod lstar;
mod ttt;

pub use lstar::{LStarLearner, ObservationTable};
pub use ttt::{DiscriminationTree, DtNode, NodeId, SiftResult, TttLearner};

use serde::{Deserialize, Serialize};

use crate::dfa::Dfa;
use crate::error::OracleError;
use crate::oracle::{MembershipOracle, OracleStats, Teacher};
use crate::word::{Alphabet, Word};

/// A membership answer that contradicts what refinement needed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub word: Word,
    pub cached: bool,
    pub required: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RefinementFailure {
    /// The answers no longer support a split (stale or pinned labels).
    Conflict,
    /// The per-counterexample query budget ran out.
    StepBudget,
    /// The hypothesis already classifies the counterexample correctly.
    AlreadyCorrect,
}

/// What happened while processing one counterexample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementReport {
    pub succeeded: bool,
    /// Every membership query issued during the step, in order.
    pub mqs_asked: Vec<(Word, bool)>,
    pub conflict: Option<Conflict>,
    pub failure: Option<RefinementFailure>,
}

impl RefinementReport {
    fn success(mqs_asked: Vec<(Word, bool)>) -> Self {
        RefinementReport { succeeded: true, mqs_asked, conflict: None, failure: None }
    }

    fn failed(mqs_asked: Vec<(Word, bool)>, failure: RefinementFailure, conflict: Option<Conflict>) -> Self {
        RefinementReport { succeeded: false, mqs_asked, conflict, failure: Some(failure) }
    }
}

/// An active learner driven by a membership oracle and counterexamples.
pub trait ActiveLearner: Send {
    /// Builds the initial hypothesis.
    fn initialize(&mut self, mq: &mut dyn MembershipOracle) -> Result<(), OracleError>;

    fn hypothesis(&self) -> Dfa;

    fn state_count(&self) -> usize;

    /// Classification of `word` by the current hypothesis.
    fn classify(&self, word: &Word) -> bool;

    /// Processes `ce` until the hypothesis classifies it as `label`, or a
    /// failure condition is hit. Oracle errors other than the step budget
    /// propagate.
    fn refine(
        &mut self,
        ce: &Word,
        label: bool,
        mq: &mut dyn MembershipOracle,
        step_budget: usize,
    ) -> Result<RefinementReport, OracleError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    LStar,
    Ttt,
}

impl LearnerKind {
    pub fn build(self, alphabet: &Alphabet) -> Box<dyn ActiveLearner> {
        match self {
            LearnerKind::LStar => Box::new(LStarLearner::new(alphabet.clone())),
            LearnerKind::Ttt => Box::new(TttLearner::new(alphabet.clone())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::LStar => "lstar",
            LearnerKind::Ttt => "ttt",
        }
    }
}

/// Forwards queries while logging them, failing once `budget` queries have
/// been issued.
pub(crate) struct Recorder<'a> {
    inner: &'a mut dyn MembershipOracle,
    pub(crate) log: Vec<(Word, bool)>,
    budget: usize,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(inner: &'a mut dyn MembershipOracle, budget: usize) -> Self {
        Recorder { inner, log: Vec::new(), budget }
    }
}

impl MembershipOracle for Recorder<'_> {
    fn query(&mut self, word: &Word) -> Result<bool, OracleError> {
        if self.log.len() >= self.budget {
            return Err(OracleError::StepBudget(self.budget));
        }
        let answer = self.inner.query(word)?;
        self.log.push((word.clone(), answer));
        Ok(answer)
    }
}

/// Why a learning run stopped without an equivalent hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    MqBudget,
    EqBudget,
    Conflict,
    StepBudget,
    RepeatedCounterexample,
}

impl FailureReason {
    pub fn from_oracle(err: &OracleError) -> Option<Self> {
        match err {
            OracleError::MqBudget(_) => Some(FailureReason::MqBudget),
            OracleError::EqBudget(_) => Some(FailureReason::EqBudget),
            OracleError::StepBudget(_) => Some(FailureReason::StepBudget),
            _ => None,
        }
    }

    pub fn from_refinement(f: RefinementFailure) -> Self {
        match f {
            RefinementFailure::StepBudget => FailureReason::StepBudget,
            RefinementFailure::Conflict => FailureReason::Conflict,
            RefinementFailure::AlreadyCorrect => FailureReason::RepeatedCounterexample,
        }
    }
}

/// Result of a learning session.
#[derive(Debug, Clone)]
pub struct LearnOutcome {
    /// The last hypothesis; equivalent to the target iff `failure` is `None`.
    pub hypothesis: Dfa,
    pub failure: Option<FailureReason>,
    pub stats: OracleStats,
}

impl LearnOutcome {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

/// Re-processes recorded counterexamples that the current hypothesis gets
/// wrong. `on_step` sees every successful step; returns the first failed
/// report, if any.
pub fn ensure_consistent(
    learner: &mut dyn ActiveLearner,
    counterexamples: &[(Word, bool)],
    mq: &mut dyn MembershipOracle,
    step_budget: usize,
    on_step: &mut dyn FnMut(&Word, &RefinementReport),
) -> Result<Option<RefinementReport>, OracleError> {
    let max_rounds = 4 * counterexamples.len() + 16;
    for _ in 0..max_rounds {
        let Some((w, l)) = counterexamples.iter().find(|(w, l)| learner.classify(w) != *l) else {
            return Ok(None);
        };
        let report = learner.refine(w, *l, mq, step_budget)?;
        if !report.succeeded {
            return Ok(Some(report));
        }
        on_step(w, &report);
    }
    match counterexamples.iter().find(|(w, l)| learner.classify(w) != *l) {
        None => Ok(None),
        Some(_) => Ok(Some(RefinementReport::failed(Vec::new(), RefinementFailure::Conflict, None))),
    }
}

/// Builds a fresh learner and replays `counterexamples` through it.
pub fn replay(
    kind: LearnerKind,
    alphabet: &Alphabet,
    counterexamples: &[(Word, bool)],
    mq: &mut dyn MembershipOracle,
    step_budget: usize,
) -> Result<(Box<dyn ActiveLearner>, Option<RefinementReport>), OracleError> {
    let mut learner = kind.build(alphabet);
    learner.initialize(mq)?;
    let failed = ensure_consistent(learner.as_mut(), counterexamples, mq, step_budget, &mut |_, _| {})?;
    Ok((learner, failed))
}

/// Plain MAT loop: hypothesize, ask an equivalence query, refine with the
/// counterexample. Stops at the first refinement failure.
pub fn learn_plain(kind: LearnerKind, teacher: &mut Teacher) -> LearnOutcome {
    let alphabet = teacher.target().alphabet().clone();
    let mut learner = kind.build(&alphabet);
    let per_ce = teacher.budgets().per_ce_mq;
    let mut seen: Vec<(Word, bool)> = Vec::new();
    let failure = (|| -> Result<Option<FailureReason>, OracleError> {
        learner.initialize(teacher)?;
        loop {
            if let Some(r) = ensure_consistent(learner.as_mut(), &seen, teacher, per_ce, &mut |_, _| {})? {
                return Ok(Some(FailureReason::from_refinement(r.failure.unwrap_or(RefinementFailure::Conflict))));
            }
            let Some((w, label)) = teacher.eq(&learner.hypothesis())? else {
                return Ok(None);
            };
            let report = learner.refine(&w, label, teacher, per_ce)?;
            if !report.succeeded {
                return Ok(Some(FailureReason::from_refinement(
                    report.failure.unwrap_or(RefinementFailure::Conflict),
                )));
            }
            if !seen.iter().any(|(s, _)| *s == w) {
                seen.push((w, label));
            }
        }
    })();
    let failure = match failure {
        Ok(f) => f,
        Err(e) => Some(FailureReason::from_oracle(&e).unwrap_or(FailureReason::Conflict)),
    };
    LearnOutcome { hypothesis: learner.hypothesis(), failure, stats: teacher.stats() }
}

/// L* against `teacher`.
pub fn lstar_learn(teacher: &mut Teacher) -> LearnOutcome {
    learn_plain(LearnerKind::LStar, teacher)
}

/// The discrimination-tree learner against `teacher`.
pub fn ttt_learn(teacher: &mut Teacher) -> LearnOutcome {
    learn_plain(LearnerKind::Ttt, teacher)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfa::tests::starts_with_a;
    use crate::dfa::equivalent;
    use crate::oracle::{Budgets, DfaOracle, PmatConfig, QueryCache};

    fn w(s: &str) -> Word {
        Alphabet::ab().parse_word(s).unwrap()
    }

    /// Cache-backed oracle used to seed pinned labels by hand.
    struct CacheOracle<'a> {
        cache: &'a mut QueryCache,
        truth: &'a Dfa,
        calls: Vec<Word>,
    }

    impl MembershipOracle for CacheOracle<'_> {
        fn query(&mut self, word: &Word) -> Result<bool, OracleError> {
            self.calls.push(word.clone());
            if let Some(l) = self.cache.label(word) {
                return Ok(l);
            }
            Ok(self.cache.insert_oracle(word.clone(), self.truth.eval(word)))
        }
    }

    #[test]
    fn pinned_contradiction_is_a_conflict() {
        let target = starts_with_a();
        for kind in [LearnerKind::Ttt, LearnerKind::LStar] {
            let mut cache = QueryCache::new();
            let mut learner = kind.build(&Alphabet::ab());
            let mut mq = CacheOracle { cache: &mut cache, truth: &target, calls: Vec::new() };
            learner.initialize(&mut mq).unwrap();
            while let Some(ce) = equivalent(&target, &learner.hypothesis()).unwrap() {
                let l = target.eval(&ce);
                assert!(learner.refine(&ce, l, &mut mq, 1000).unwrap().succeeded);
            }
            // pin the access word of the accepting state to the wrong label
            mq.cache.record_counterexample(w("a"), false).unwrap();
            let before = learner.hypothesis();
            let r = learner.refine(&w("ab"), false, &mut mq, 1000).unwrap();
            assert!(!r.succeeded, "{kind:?}");
            let c = r.conflict.expect("conflict");
            assert_eq!(c.word, w("a"));
            assert!(!c.cached && c.required);
            assert_eq!(r.failure, Some(RefinementFailure::Conflict));
            assert_eq!(learner.hypothesis(), before);
        }
    }

    #[test]
    fn report_lists_exactly_the_queries_made() {
        let target = Dfa::random(Alphabet::ab(), 9, &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3));
        for kind in [LearnerKind::Ttt, LearnerKind::LStar] {
            let mut cache = QueryCache::new();
            let mut learner = kind.build(&Alphabet::ab());
            let mut mq = CacheOracle { cache: &mut cache, truth: &target, calls: Vec::new() };
            learner.initialize(&mut mq).unwrap();
            while let Some(ce) = equivalent(&target, &learner.hypothesis()).unwrap() {
                mq.calls.clear();
                let r = learner.refine(&ce, target.eval(&ce), &mut mq, usize::MAX).unwrap();
                assert!(r.succeeded);
                let asked: Vec<Word> = r.mqs_asked.iter().map(|(w, _)| w.clone()).collect();
                assert_eq!(asked, mq.calls);
                assert!(r.mqs_asked.iter().all(|(w, l)| *l == target.eval(w)));
            }
        }
    }

    #[test]
    fn step_budget_failure_restores_learner() {
        let target = Dfa::random(Alphabet::ab(), 10, &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(8));
        let mut learner = LearnerKind::Ttt.build(&Alphabet::ab());
        learner.initialize(&mut DfaOracle(&target)).unwrap();
        let ce = equivalent(&target, &learner.hypothesis()).unwrap().unwrap();
        let before = learner.hypothesis();
        let r = learner.refine(&ce, target.eval(&ce), &mut DfaOracle(&target), 1).unwrap();
        assert_eq!(r.failure, Some(RefinementFailure::StepBudget));
        assert_eq!(r.mqs_asked.len(), 1);
        assert_eq!(learner.hypothesis(), before);
    }

    #[test]
    fn exact_sessions_succeed_and_ttt_is_cheaper() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(21);
        let (mut ttt_total, mut lstar_total) = (0, 0);
        for _ in 0..10 {
            let target = Dfa::random(Alphabet::ab(), 8, &mut rng).minimize();
            for kind in [LearnerKind::Ttt, LearnerKind::LStar] {
                let mut t = Teacher::simulated(PmatConfig::new(target.clone(), 0.0, 1, 0), Budgets::default());
                let out = learn_plain(kind, &mut t);
                assert!(out.succeeded());
                assert_eq!(equivalent(&target, &out.hypothesis).unwrap(), None);
                assert_eq!(out.hypothesis.num_states(), target.num_states());
                match kind {
                    LearnerKind::Ttt => ttt_total += out.stats.mq_unique,
                    LearnerKind::LStar => lstar_total += out.stats.mq_unique,
                }
            }
        }
        assert!(ttt_total < lstar_total, "{ttt_total} vs {lstar_total}");
    }

    #[test]
    fn accept_all_takes_one_equivalence_query() {
        let target = Dfa::constant(Alphabet::ab(), true);
        let mut t = Teacher::simulated(PmatConfig::new(target, 0.0, 1, 0), Budgets::default());
        let out = ttt_learn(&mut t);
        assert!(out.succeeded());
        assert_eq!(out.stats.eq_total, 1);
        assert!(out.stats.mq_unique <= 3);
    }

    #[test]
    fn noisy_plain_lstar_often_fails() {
        let target = Dfa::random(Alphabet::ab(), 10, &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(2)).minimize();
        let failures = (0..10)
            .filter(|&seed| {
                let mut t = Teacher::simulated(PmatConfig::new(target.clone(), 0.1, seed, 10), Budgets::default());
                !lstar_learn(&mut t).succeeded()
            })
            .count();
        assert!(failures >= 5, "{failures}");
    }
}
