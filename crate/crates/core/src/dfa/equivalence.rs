//! Product-automaton equivalence and counterexample extraction.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dfa;
use crate::error::Result;
use crate::word::{Symbol, Word};

/// Returns `None` when `L(a) = L(b)`, otherwise the shortest word in the
/// symmetric difference, least in lexicographic order among the shortest.
pub fn equivalent(a: &Dfa, b: &Dfa) -> Result<Option<Word>> {
    a.check_same_alphabet(b)?;
    Ok(shortest_difference(a, b))
}

fn shortest_difference(a: &Dfa, b: &Dfa) -> Option<Word> {
    let nb = b.num_states();
    let pair = |p: usize, q: usize| p * nb + q;
    let total = a.num_states() * nb;
    // parent[pair] = (predecessor pair, symbol)
    let mut parent: Vec<Option<(usize, Symbol)>> = vec![None; total];
    let mut seen = vec![false; total];
    let start = pair(a.initial(), b.initial());
    seen[start] = true;
    let mut queue = VecDeque::from([(a.initial(), b.initial())]);
    while let Some((p, q)) = queue.pop_front() {
        if a.is_accepting(p) != b.is_accepting(q) {
            let mut symbols = Vec::new();
            let mut cur = pair(p, q);
            while let Some((prev, s)) = parent[cur] {
                symbols.push(s);
                cur = prev;
            }
            symbols.reverse();
            return Some(Word::from(symbols));
        }
        for s in a.alphabet().symbols() {
            let (p2, q2) = (a.next(p, s), b.next(q, s));
            let id = pair(p2, q2);
            if !seen[id] {
                seen[id] = true;
                parent[id] = Some((pair(p, q), s));
                queue.push_back((p2, q2));
            }
        }
    }
    None
}

/// Finds a word classified differently by `a` and `b` with length at least
/// `min_len`, or the shortest such word when no longer one exists.
///
/// Layers of the product automaton are explored breadth-first up to
/// `min_len + |Q_a|·|Q_b|`; within a layer, each parent explores its
/// successors in an order shuffled by `seed`, so different seeds pick
/// different words. With `min_len = 0` the result is the shortest
/// counterexample regardless of `seed`.
pub fn find_counterexample(a: &Dfa, b: &Dfa, min_len: usize, seed: u64) -> Result<Option<Word>> {
    a.check_same_alphabet(b)?;
    let Some(shortest) = shortest_difference(a, b) else {
        return Ok(None);
    };
    if min_len == 0 {
        return Ok(Some(shortest));
    }

    let nb = b.num_states();
    let total = a.num_states() * nb;
    let horizon = min_len + total;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<Symbol> = a.alphabet().symbols().collect();

    // each layer entry: (product state, index of parent in previous layer, symbol)
    let mut layers: Vec<Vec<(usize, usize, Symbol)>> =
        vec![vec![(a.initial() * nb + b.initial(), usize::MAX, Symbol(0))]];
    let mut stamp = vec![usize::MAX; total];

    for depth in 0..=horizon {
        let layer = &layers[depth];
        if depth >= min_len {
            if let Some(hit) = layer
                .iter()
                .position(|&(id, _, _)| a.is_accepting(id / nb) != b.is_accepting(id % nb))
            {
                return Ok(Some(rebuild(&layers, depth, hit)));
            }
        }
        if depth == horizon {
            break;
        }
        let mut next = Vec::with_capacity(layer.len() * order.len());
        for (idx, &(id, _, _)) in layer.iter().enumerate() {
            order.shuffle(&mut rng);
            let (p, q) = (id / nb, id % nb);
            for &s in &order {
                let succ = a.next(p, s) * nb + b.next(q, s);
                if stamp[succ] != depth {
                    stamp[succ] = depth;
                    next.push((succ, idx, s));
                }
            }
        }
        layers.push(next);
    }
    Ok(Some(shortest))
}

fn rebuild(layers: &[Vec<(usize, usize, Symbol)>], depth: usize, mut idx: usize) -> Word {
    let mut symbols = Vec::with_capacity(depth);
    for d in (1..=depth).rev() {
        let (_, parent, s) = layers[d][idx];
        symbols.push(s);
        idx = parent;
    }
    symbols.reverse();
    Word::from(symbols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfa::tests::starts_with_a;
    use crate::error::DfaError;
    use crate::word::{words_up_to, Alphabet};
    use rand::Rng;

    #[test]
    fn reflexive() {
        let d = starts_with_a();
        assert_eq!(equivalent(&d, &d).unwrap(), None);
        assert_eq!(find_counterexample(&d, &d, 10, 1).unwrap(), None);
    }

    #[test]
    fn starts_with_a_vs_everything() {
        let d = starts_with_a();
        let all = Dfa::constant(Alphabet::ab(), true);
        assert_eq!(equivalent(&d, &all).unwrap(), Some(Word::empty()));
        assert_eq!(find_counterexample(&d, &all, 0, 99).unwrap(), Some(Word::empty()));
        for seed in 0..20 {
            let w = find_counterexample(&d, &all, 5, seed).unwrap().unwrap();
            assert!(w.len() >= 5);
            assert_ne!(d.eval(&w), all.eval(&w));
        }
    }

    #[test]
    fn different_seeds_give_different_long_words() {
        let d = starts_with_a();
        let all = Dfa::constant(Alphabet::ab(), true);
        let words: std::collections::BTreeSet<Word> = (0..20)
            .map(|seed| find_counterexample(&d, &all, 8, seed).unwrap().unwrap())
            .collect();
        assert!(words.len() > 1);
    }

    #[test]
    fn falls_back_to_shortest_when_no_long_word_exists() {
        // languages differ only on "a"
        let only_a = Dfa::new(Alphabet::ab(), 0, vec![false, true, false], vec![1, 2, 2, 2, 2, 2])
            .unwrap();
        let none = Dfa::constant(Alphabet::ab(), false);
        let w = find_counterexample(&only_a, &none, 6, 3).unwrap().unwrap();
        assert_eq!(w, Alphabet::ab().parse_word("a").unwrap());
    }

    #[test]
    fn alphabet_mismatch() {
        let d = starts_with_a();
        let other = Dfa::constant(Alphabet::new(['x', 'y']).unwrap(), true);
        assert!(matches!(equivalent(&d, &other), Err(DfaError::AlphabetMismatch { .. })));
        assert!(find_counterexample(&d, &other, 0, 0).is_err());
    }

    #[test]
    fn agrees_with_enumeration_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let universe = words_up_to(2, 12);
        for _ in 0..200 {
            let na = rng.gen_range(1..=6);
            let nb = rng.gen_range(1..=36 / na);
            let a = Dfa::random(Alphabet::ab(), na, &mut rng);
            let b = Dfa::random(Alphabet::ab(), nb, &mut rng);
            let brute = universe.iter().find(|w| a.eval(w) != b.eval(w)).cloned();
            let fast = equivalent(&a, &b).unwrap();
            match &brute {
                Some(_) => assert_eq!(fast, brute),
                None => {
                    assert!(fast.as_ref().is_none_or(|w| w.len() > 12));
                    if fast.is_none() {
                        assert_eq!(a.minimize(), b.minimize());
                    }
                }
            }
            let seed = rng.gen();
            let min_len = rng.gen_range(0..8);
            match find_counterexample(&a, &b, min_len, seed).unwrap() {
                None => assert!(fast.is_none()),
                Some(w) => {
                    assert_ne!(a.eval(&w), b.eval(&w));
                    if w.len() < min_len {
                        // only allowed when no qualifying word exists at all
                        assert_eq!(Some(w), fast);
                        assert!(!universe
                            .iter()
                            .any(|v| v.len() >= min_len && a.eval(v) != b.eval(v)));
                    }
                }
            }
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Dfa::random(Alphabet::ab(), 5, &mut rng);
        let b = Dfa::random(Alphabet::ab(), 4, &mut rng);
        for seed in 0..10 {
            assert_eq!(
                find_counterexample(&a, &b, 9, seed).unwrap(),
                find_counterexample(&a, &b, 9, seed).unwrap()
            );
        }
    }
}
