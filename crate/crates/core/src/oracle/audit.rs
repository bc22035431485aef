//! Process-wide check of every counterexample a teacher hands out.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::dfa::Dfa;
use crate::word::Word;

static CHECKED: AtomicUsize = AtomicUsize::new(0);
static VIOLATIONS: AtomicUsize = AtomicUsize::new(0);

/// Counts since process start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterexampleAudit {
    pub checked: usize,
    pub violations: usize,
}

pub fn counterexample_audit() -> CounterexampleAudit {
    CounterexampleAudit { checked: CHECKED.load(Ordering::Relaxed), violations: VIOLATIONS.load(Ordering::Relaxed) }
}

pub(crate) fn record(target: &Dfa, hypothesis: &Dfa, word: &Word, label: bool, min_len: usize) {
    CHECKED.fetch_add(1, Ordering::Relaxed);
    if !valid(target, hypothesis, word, label, min_len) {
        VIOLATIONS.fetch_add(1, Ordering::Relaxed);
    }
}

/// `word` separates the two machines, `label` is the target's answer, and
/// `word` is at least `min_len` long unless no separating word that long
/// exists, in which case it is a shortest one.
pub fn valid(target: &Dfa, hypothesis: &Dfa, word: &Word, label: bool, min_len: usize) -> bool {
    if target.eval(word) != label || hypothesis.eval(word) == label {
        return false;
    }
    if word.len() >= min_len {
        return true;
    }
    // layer by layer: which state pairs are reachable with words of
    // exactly the current length
    let nb = hypothesis.num_states();
    let total = target.num_states() * nb;
    let differs = |id: usize| target.is_accepting(id / nb) != hypothesis.is_accepting(id % nb);
    let mut layer = vec![false; total];
    layer[target.initial() * nb + hypothesis.initial()] = true;
    let mut shortest = None;
    for len in 0..=min_len + total {
        if shortest.is_none() && (0..total).any(|id| layer[id] && differs(id)) {
            shortest = Some(len);
        }
        if len >= min_len && (0..total).any(|id| layer[id] && differs(id)) {
            return false;
        }
        let mut next = vec![false; total];
        for id in (0..total).filter(|&id| layer[id]) {
            for a in target.alphabet().symbols() {
                next[target.next(id / nb, a) * nb + hypothesis.next(id % nb, a)] = true;
            }
        }
        layer = next;
    }
    shortest == Some(word.len())
}
