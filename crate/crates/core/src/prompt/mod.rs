//! Exemplar selection for discrimination prompts: a hypothesis learned from
//! the counterexample history, its discrimination tree, and edit distance to
//! the queried word.

use std::collections::VecDeque;

use crate::active::{ActiveLearner, DiscriminationTree, DtNode, NodeId, SiftResult, TttLearner};
use crate::dfa::Dfa;
use crate::error::PromptError;
use crate::oracle::{DfaOracle, HistoryOracle, QueryCache};
use crate::word::{Alphabet, Word};

/// Queries one refinement of the history hypothesis may spend.
const REFINE_BUDGET: usize = 100_000;

/// The two words shown to the oracle next to a query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExemplarPair {
    /// Closest word in the query's own state.
    pub w_q: Word,
    /// Closest word on the other side of the separating discriminator;
    /// `None` when the hypothesis has a single state.
    pub w_s: Option<Word>,
    pub l_q: usize,
    pub l_s: Option<usize>,
    /// Discriminator at the node separating `w_q` from `w_s`.
    pub discriminator: Option<Word>,
}

/// Edit distance with unit-cost insertions, deletions and substitutions.
pub fn levenshtein(a: &Word, b: &Word) -> usize {
    let (a, b) = (a.symbols(), b.symbols());
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Shortest, then lexicographically least, word separating states `p` and `q`.
fn distinguishing_suffix(h: &Dfa, p: usize, q: usize) -> Option<Word> {
    let n = h.num_states();
    let mut seen = vec![false; n * n];
    let mut queue = VecDeque::from([(p, q, Word::empty())]);
    seen[p * n + q] = true;
    while let Some((x, y, w)) = queue.pop_front() {
        if h.is_accepting(x) != h.is_accepting(y) {
            return Some(w);
        }
        for a in h.alphabet().symbols() {
            let (nx, ny) = (h.next(x, a), h.next(y, a));
            if !seen[nx * n + ny] {
                seen[nx * n + ny] = true;
                queue.push_back((nx, ny, w.append(a)));
            }
        }
    }
    None
}

/// A discrimination tree whose leaves are the states of `h` (minimized
/// first). The root discriminator is the empty word; below it each block of
/// states is split by the shortest suffix separating its two lowest states.
pub fn build_dt_from_dfa(h: &Dfa) -> DiscriminationTree {
    let h = h.minimize();
    let access: Vec<Word> = h.access_words().into_iter().map(|w| w.expect("minimal dfas are reachable")).collect();
    if h.num_states() == 1 {
        return DiscriminationTree::single_leaf(0, Word::empty());
    }
    let mut nodes = Vec::new();
    build_node(&h, &access, (0..h.num_states()).collect(), Some(Word::empty()), None, &mut nodes);
    DiscriminationTree::from_nodes(nodes)
}

fn build_node(
    h: &Dfa,
    access: &[Word],
    block: Vec<usize>,
    discriminator: Option<Word>,
    parent: Option<NodeId>,
    nodes: &mut Vec<DtNode>,
) -> NodeId {
    let id = nodes.len();
    if block.len() == 1 {
        let q = block[0];
        nodes.push(DtNode::Leaf { state: q, access: access[q].clone(), parent });
        return id;
    }
    let d = discriminator.unwrap_or_else(|| {
        distinguishing_suffix(h, block[0], block[1]).expect("states of a minimal dfa are distinguishable")
    });
    nodes.push(DtNode::Inner { discriminator: d.clone(), children: [None, None], parent });
    let (yes, no): (Vec<usize>, Vec<usize>) =
        block.into_iter().partition(|&q| h.is_accepting(h.run_from(q, &d).expect("alphabet checked")));
    let mut children = [None, None];
    for (side, part) in [(false, no), (true, yes)] {
        if !part.is_empty() {
            children[side as usize] = Some(build_node(h, access, part, None, Some(id), nodes));
        }
    }
    if let DtNode::Inner { children: c, .. } = &mut nodes[id] {
        *c = children;
    }
    id
}

/// Learns a hypothesis from the counterexample history alone: membership
/// answers come from the history oracle and an equivalence query succeeds
/// once every recorded counterexample is classified as recorded.
pub fn history_hypothesis(cache: &QueryCache, alphabet: &Alphabet) -> Dfa {
    let mut learner = TttLearner::new(alphabet.clone());
    let mut oracle = HistoryOracle(cache);
    learner.initialize(&mut oracle).expect("the history oracle never fails");
    // each successful refinement adds a state, and the history language
    // needs at most one state per counterexample prefix plus a sink
    let bound: usize = cache.counterexamples().iter().map(|(w, _)| w.len() + 1).sum::<usize>() + 1;
    for _ in 0..bound {
        let Some((w, label)) = cache.counterexamples().iter().find(|(w, l)| learner.classify(w) != *l).cloned() else {
            break;
        };
        match learner.refine(&w, label, &mut oracle, REFINE_BUDGET) {
            Ok(report) if report.succeeded => {}
            _ => break,
        }
    }
    learner.hypothesis()
}

/// Exemplar pair for `query`, with the hypothesis learned from the
/// counterexample history.
pub fn discrimination_word_search(
    cache: &QueryCache,
    alphabet: &Alphabet,
    query: &Word,
) -> Result<ExemplarPair, PromptError> {
    if cache.eq_len() == 0 {
        return Err(PromptError::NoCounterexamples);
    }
    let h = history_hypothesis(cache, alphabet);
    search_with_hypothesis(&h, cache, query)
}

fn closest<'a>(query: &Word, words: impl Iterator<Item = &'a Word>) -> Option<(Word, usize)> {
    words.map(|w| (levenshtein(w, query), w)).min().map(|(d, w)| (w.clone(), d))
}

/// Exemplar pair for `query` under a given hypothesis. Candidates are all
/// cached words, membership and counterexample alike.
pub fn search_with_hypothesis(h: &Dfa, cache: &QueryCache, query: &Word) -> Result<ExemplarPair, PromptError> {
    h.alphabet().check_word(query)?;
    let h = h.minimize();
    let tree = build_dt_from_dfa(&h);
    let words: Vec<&Word> = cache.entries().into_iter().map(|(w, _)| w).filter(|w| h.alphabet().check_word(w).is_ok()).collect();
    let leaf_of = |w: &Word| match tree.sift(w, &mut DfaOracle(&h)).expect("dfa oracles never fail") {
        SiftResult::Leaf(l) => l,
        SiftResult::Vacant { .. } => unreachable!("every branch of a tree built from a dfa is populated"),
    };
    let home = leaf_of(query);
    let (w_q, l_q) = closest(query, words.iter().copied().filter(|w| leaf_of(w) == home)).unwrap_or_else(|| {
        let access = tree.access(home).expect("sifting ends at a leaf").clone();
        let d = levenshtein(&access, query);
        (access, d)
    });
    let Some(mut parent) = tree.parent(home) else {
        return Ok(ExemplarPair { w_q, w_s: None, l_q, l_s: None, discriminator: None });
    };
    let mut child = home;
    let first = (parent, child);
    loop {
        let sibling = tree.child(parent, !tree.side(child).expect("child has a parent")).expect("inner nodes have two children");
        let leaves = tree.leaves_under(sibling);
        if let Some((w_s, l_s)) = closest(query, words.iter().copied().filter(|w| leaves.contains(&leaf_of(w)))) {
            let discriminator = tree.discriminator(parent).cloned();
            return Ok(ExemplarPair { w_q, w_s: Some(w_s), l_q, l_s: Some(l_s), discriminator });
        }
        child = parent;
        match tree.parent(parent) {
            Some(p) => parent = p,
            None => break,
        }
    }
    // no cached word outside the query's leaf: fall back to access words
    // under the nearest sibling
    let (parent, child) = first;
    let sibling = tree.child(parent, !tree.side(child).expect("child has a parent")).expect("inner nodes have two children");
    let accesses: Vec<&Word> = tree.leaves_under(sibling).into_iter().filter_map(|l| tree.access(l)).collect();
    let (w_s, l_s) = closest(query, accesses.into_iter()).expect("subtrees hold at least one leaf");
    Ok(ExemplarPair { w_q, w_s: Some(w_s), l_q, l_s: Some(l_s), discriminator: tree.discriminator(parent).cloned() })
}
