use lapr_core::active::{learn_plain, LearnerKind};
use lapr_core::dfa::{equivalent, parse_dfa, serialize_dfa};
use lapr_core::oracle::{Budgets, PmatConfig, Teacher};
use lapr_core::tolerant::{lapr_learn, learnanyway_learn, LaprConfig};
use lapr_core::{Alphabet, Dfa};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn teacher(target: &Dfa, epsilon: f64, seed: u64, ce_min_len: usize) -> Teacher {
    Teacher::simulated(PmatConfig::new(target.clone(), epsilon, seed, ce_min_len), Budgets::default())
}

#[test]
fn every_learner_is_exact_without_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let target = Dfa::random(Alphabet::ab(), 6, &mut rng);
        for kind in [LearnerKind::LStar, LearnerKind::Ttt] {
            let out = learn_plain(kind, &mut teacher(&target, 0.0, 0, 0));
            assert!(out.succeeded());
            assert_eq!(equivalent(&target, &out.hypothesis).unwrap(), None);
            assert_eq!(out.hypothesis.num_states(), target.minimize().num_states());
        }
        let out = learnanyway_learn(LearnerKind::Ttt, &mut teacher(&target, 0.0, 0, 5));
        assert_eq!(equivalent(&target, &out.hypothesis).unwrap(), None);
    }
}

#[test]
fn lapr_recovers_from_persistent_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..8 {
        let target = Dfa::random(Alphabet::ab(), 5, &mut rng);
        let mut t = teacher(&target, 0.1, seed, 10);
        let out = lapr_learn(&LaprConfig::default(), &mut t);
        assert!(out.outcome.succeeded(), "{:?}", out.outcome.failure);
        assert_eq!(equivalent(&target, &out.outcome.hypothesis).unwrap(), None);
    }
}

#[test]
fn lapr_without_noise_matches_its_inner_learner() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let target = Dfa::random(Alphabet::ab(), 6, &mut rng);
        let plain = learn_plain(LearnerKind::Ttt, &mut teacher(&target, 0.0, 1, 4));
        let lapr = lapr_learn(&LaprConfig::default(), &mut teacher(&target, 0.0, 1, 4));
        // counterexample words are cached, so they are never asked again
        assert_eq!(plain.stats.eq_total, lapr.outcome.stats.eq_total);
        assert!(lapr.outcome.stats.mq_unique <= plain.stats.mq_unique);
        assert_eq!(equivalent(&plain.hypothesis, &lapr.outcome.hypothesis).unwrap(), None);
        assert!(lapr.log.is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn learned_machines_survive_the_text_format(seed in any::<u64>(), states in 1usize..8) {
        let target = Dfa::random(Alphabet::ab(), states, &mut ChaCha8Rng::seed_from_u64(seed));
        let out = learn_plain(LearnerKind::Ttt, &mut teacher(&target, 0.0, seed, 0));
        let back = parse_dfa(&serialize_dfa(&out.hypothesis)).unwrap();
        prop_assert_eq!(equivalent(&target, &back).unwrap(), None);
    }
}
