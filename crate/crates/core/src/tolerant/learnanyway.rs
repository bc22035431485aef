use crate::active::{ensure_consistent, replay, ActiveLearner, LearnOutcome, LearnerKind};
use crate::error::OracleError;
use crate::oracle::Teacher;
use crate::tolerant::failure_of;

/// LearnAnyWay around `inner`: each counterexample overwrites its own cache
/// entry, and whenever that changes a label the learner is rebuilt from the
/// corrected cache. Runs until the hypothesis is accepted or a budget runs
/// out.
pub fn learnanyway_learn(inner: LearnerKind, teacher: &mut Teacher) -> LearnOutcome {
    let alphabet = teacher.target().alphabet().clone();
    let per_ce = teacher.budgets().per_ce_mq;
    let mut learner: Box<dyn ActiveLearner> = inner.build(&alphabet);
    let result = (|| -> Result<(), OracleError> {
        learner.initialize(teacher)?;
        loop {
            let ces = teacher.cache().counterexamples().to_vec();
            if ensure_consistent(learner.as_mut(), &ces, teacher, per_ce, &mut |_, _| {})?.is_some() {
                learner = replay(inner, &alphabet, &ces, teacher, per_ce)?.0;
            }
            let Some((w, label)) = teacher.eq(&learner.hypothesis())? else {
                return Ok(());
            };
            let record = teacher.cache_mut().record_counterexample(w.clone(), label)?;
            if record.corrected() {
                let ces = teacher.cache().counterexamples().to_vec();
                learner = replay(inner, &alphabet, &ces, teacher, per_ce)?.0;
                continue;
            }
            let report = learner.refine(&w, label, teacher, per_ce)?;
            if !report.succeeded {
                let ces = teacher.cache().counterexamples().to_vec();
                learner = replay(inner, &alphabet, &ces, teacher, per_ce)?.0;
            }
        }
    })();
    LearnOutcome {
        hypothesis: learner.hypothesis(),
        failure: result.err().map(failure_of),
        stats: teacher.stats(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::active::learn_plain;
    use crate::dfa::{equivalent, Dfa};
    use crate::oracle::{Budgets, PmatConfig};
    use crate::word::Alphabet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_noise_matches_inner_learner() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..8 {
            let target = Dfa::random(Alphabet::ab(), 9, &mut rng).minimize();
            for kind in [LearnerKind::Ttt, LearnerKind::LStar] {
                let cfg = PmatConfig::new(target.clone(), 0.0, 3, 6);
                let mut t1 = Teacher::simulated(cfg.clone(), Budgets::default());
                let mut t2 = Teacher::simulated(cfg, Budgets::default());
                let a = learn_plain(kind, &mut t1);
                let b = learnanyway_learn(kind, &mut t2);
                assert!(a.succeeded() && b.succeeded());
                assert_eq!(a.hypothesis, b.hypothesis);
                // counterexample words are answered by the cache, never by the backend
                assert_eq!(a.stats.mq_total, b.stats.mq_total);
                assert_eq!(a.stats.eq_total, b.stats.eq_total);
            }
        }
    }

    #[test]
    fn short_counterexamples_recover_from_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut ok = 0;
        for seed in 0..10 {
            let target = Dfa::random(Alphabet::ab(), 5, &mut rng).minimize();
            let mut t = Teacher::simulated(PmatConfig::new(target.clone(), 0.05, seed, 0), Budgets::default());
            let out = learnanyway_learn(LearnerKind::Ttt, &mut t);
            if out.succeeded() {
                assert_eq!(equivalent(&target, &out.hypothesis).unwrap(), None);
                ok += 1;
            }
        }
        assert!(ok >= 7, "{ok}");
    }
}
