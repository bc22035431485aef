use std::collections::BTreeSet;

use crate::error::SampleError;
use crate::passive::LabeledSample;
use crate::word::Word;

/// Trie over every prefix of a sample. Node ids follow shortlex order of
/// the prefixes, so the root is 0 and parents precede children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixTreeAcceptor {
    alphabet_len: usize,
    words: Vec<Word>,
    labels: Vec<Option<bool>>,
    children: Vec<Option<usize>>,
}

impl PrefixTreeAcceptor {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn alphabet_len(&self) -> usize {
        self.alphabet_len
    }

    /// The prefix a node stands for.
    pub fn word(&self, node: usize) -> &Word {
        &self.words[node]
    }

    pub fn label(&self, node: usize) -> Option<bool> {
        self.labels[node]
    }

    pub fn child(&self, node: usize, symbol: usize) -> Option<usize> {
        self.children[node * self.alphabet_len + symbol]
    }

    /// The node reached by `word`, if it is a sample prefix.
    pub fn find(&self, word: &Word) -> Option<usize> {
        word.iter().try_fold(0, |n, a| self.child(n, a.index()))
    }

    pub(crate) fn labels(&self) -> &[Option<bool>] {
        &self.labels
    }

    pub(crate) fn children_table(&self) -> &[Option<usize>] {
        &self.children
    }
}

/// Builds the prefix-tree acceptor of `sample` over an alphabet of
/// `alphabet_len` symbols.
pub fn build_pta(sample: &LabeledSample, alphabet_len: usize) -> Result<PrefixTreeAcceptor, SampleError> {
    if let Some(w) = sample.positives().intersection(sample.negatives()).next() {
        return Err(SampleError::Inconsistent(format!("{w:?}")));
    }
    let mut prefixes: BTreeSet<(usize, Word)> = BTreeSet::new();
    prefixes.insert((0, Word::empty()));
    for (w, _) in sample.iter() {
        for i in 1..=w.len() {
            prefixes.insert((i, w.prefix(i)));
        }
    }
    let words: Vec<Word> = prefixes.into_iter().map(|(_, w)| w).collect();
    let index: std::collections::HashMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut children = vec![None; words.len() * alphabet_len];
    let mut labels = vec![None; words.len()];
    for (i, w) in words.iter().enumerate() {
        labels[i] = sample.label(w);
        if let Some((&last, _)) = w.symbols().split_last() {
            let parent = index[&w.prefix(w.len() - 1)];
            children[parent * alphabet_len + last.index()] = Some(i);
        }
    }
    Ok(PrefixTreeAcceptor { alphabet_len, words, labels, children })
}
