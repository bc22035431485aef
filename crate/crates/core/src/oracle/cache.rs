//! Membership and counterexample caches.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dfa::Dfa;
use crate::error::OracleError;
use crate::word::Word;

/// Answer to a membership query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryLabel {
    Accept,
    Reject,
    Unknown,
}

impl QueryLabel {
    pub fn from_bool(b: bool) -> Self {
        if b {
            QueryLabel::Accept
        } else {
            QueryLabel::Reject
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            QueryLabel::Accept => Some(true),
            QueryLabel::Reject => Some(false),
            QueryLabel::Unknown => None,
        }
    }
}

/// Where a cached label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Answered by the (possibly noisy) membership oracle.
    Oracle,
    /// Pinned by an equivalence-query counterexample; always correct.
    Counterexample,
    /// Relabelled from a passive hypothesis.
    Refined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheEntry {
    pub label: bool,
    pub provenance: Provenance,
}

/// Outcome of [`QueryCache::record_counterexample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterexampleRecord {
    /// False when the same word was already a counterexample.
    pub new: bool,
    pub label: bool,
    /// The entry the counterexample replaced, if any.
    pub previous: Option<CacheEntry>,
}

impl CounterexampleRecord {
    /// True when the counterexample overwrote a cached label with a
    /// different value.
    pub fn corrected(&self) -> bool {
        self.previous.is_some_and(|e| {
            e.provenance != Provenance::Counterexample && e.label != self.label
        })
    }
}

/// The membership cache `C_MQ` and the counterexample cache `C_EQ`.
#[derive(Debug, Clone, Default)]
pub struct QueryCache {
    mq: HashMap<Word, CacheEntry>,
    eq: Vec<(Word, bool)>,
    /// First answer the membership oracle gave for each word, kept when
    /// the cached label is later relabelled or pinned.
    answers: HashMap<Word, bool>,
}

impl QueryCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, word: &Word) -> Option<CacheEntry> {
        self.mq.get(word).copied()
    }

    pub fn label(&self, word: &Word) -> Option<bool> {
        self.mq.get(word).map(|e| e.label)
    }

    pub fn mq_len(&self) -> usize {
        self.mq.len()
    }

    pub fn eq_len(&self) -> usize {
        self.eq.len()
    }

    /// Counterexamples in the order they were recorded.
    pub fn counterexamples(&self) -> &[(Word, bool)] {
        &self.eq
    }

    /// Membership entries sorted by word, for deterministic iteration.
    pub fn entries(&self) -> Vec<(&Word, CacheEntry)> {
        let mut v: Vec<_> = self.mq.iter().map(|(w, e)| (w, *e)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    /// Stores an oracle answer. Counterexample-pinned entries are never
    /// overwritten; returns the label now cached.
    pub fn insert_oracle(&mut self, word: Word, label: bool) -> bool {
        self.answers.entry(word.clone()).or_insert(label);
        self.insert_with(word, label, Provenance::Oracle)
    }

    fn insert_with(&mut self, word: Word, label: bool, provenance: Provenance) -> bool {
        let entry = self.mq.entry(word).or_insert(CacheEntry { label, provenance });
        if entry.provenance != Provenance::Counterexample {
            *entry = CacheEntry { label, provenance };
        }
        entry.label
    }

    /// Appends a counterexample to `C_EQ` and pins its label in `C_MQ`,
    /// replacing any oracle or refined entry. Re-recording the same word with
    /// the same label is idempotent.
    pub fn record_counterexample(
        &mut self,
        word: Word,
        label: bool,
    ) -> Result<CounterexampleRecord, OracleError> {
        let previous = self.mq.get(&word).copied();
        if let Some(prev) = previous {
            if prev.provenance == Provenance::Counterexample {
                if prev.label != label {
                    return Err(OracleError::ConflictingCounterexample { word: format!("{word:?}") });
                }
                return Ok(CounterexampleRecord { new: false, label, previous });
            }
        }
        self.mq.insert(word.clone(), CacheEntry { label, provenance: Provenance::Counterexample });
        self.eq.push((word, label));
        Ok(CounterexampleRecord { new: true, label, previous })
    }

    /// The membership oracle's own answer for `word`, if it was ever asked.
    pub fn oracle_answer(&self, word: &Word) -> Option<bool> {
        self.answers.get(word).copied()
    }

    /// Raw oracle answers for every word that is not a counterexample,
    /// sorted by word. Relabelling does not change these.
    pub fn oracle_answers(&self) -> Vec<(&Word, bool)> {
        let mut v: Vec<_> = self
            .mq
            .iter()
            .filter(|(_, e)| e.provenance != Provenance::Counterexample)
            .map(|(w, e)| (w, self.answers.get(w).copied().unwrap_or(e.label)))
            .collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    /// The history oracle: the counterexample label when `word` is in
    /// `C_EQ`, otherwise `false`.
    pub fn history_oracle(&self, word: &Word) -> bool {
        match self.mq.get(word) {
            Some(e) if e.provenance == Provenance::Counterexample => e.label,
            _ => false,
        }
    }

    /// Fraction of non-counterexample entries whose oracle answer disagrees
    /// with `h`. Zero when there are no such entries.
    pub fn estimate_epsilon(&self, h: &Dfa) -> f64 {
        let mut total = 0usize;
        let mut wrong = 0usize;
        for (w, e) in &self.mq {
            if e.provenance == Provenance::Counterexample {
                continue;
            }
            total += 1;
            if self.answers.get(w).copied().unwrap_or(e.label) != h.eval(w) {
                wrong += 1;
            }
        }
        if total == 0 {
            0.0
        } else {
            wrong as f64 / total as f64
        }
    }

    /// Overwrites every oracle or refined entry with `h`'s classification
    /// and marks it refined. Returns how many labels changed.
    pub fn refine_with(&mut self, h: &Dfa) -> usize {
        let mut flips = 0;
        for (w, e) in self.mq.iter_mut() {
            if e.provenance == Provenance::Counterexample {
                continue;
            }
            let label = h.eval(w);
            if label != e.label {
                flips += 1;
            }
            *e = CacheEntry { label, provenance: Provenance::Refined };
        }
        flips
    }
}
