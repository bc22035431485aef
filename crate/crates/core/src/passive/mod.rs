//! Passive inference by state merging: prefix-tree acceptors and RPNI with
//! optional evidence-driven (EDSM) scoring.

mod pta;
mod noisy;
mod rpni;

pub use pta::{build_pta, PrefixTreeAcceptor};
pub use noisy::{rpni_learn_noisy, rpni_learn_noisy_capped};
pub use rpni::{edsm_score, rpni_learn, Scoring};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::SampleError;
use crate::word::{Alphabet, Word};

/// Positive and negative example words. The two sets never overlap.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledSample {
    positives: BTreeSet<Word>,
    negatives: BTreeSet<Word>,
}

impl LabeledSample {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_sets(
        positives: impl IntoIterator<Item = Word>,
        negatives: impl IntoIterator<Item = Word>,
    ) -> Result<Self, SampleError> {
        let mut s = Self::new();
        for w in positives {
            s.insert(w, true)?;
        }
        for w in negatives {
            s.insert(w, false)?;
        }
        Ok(s)
    }

    /// Adds a labelled word; re-adding with the same label is a no-op.
    pub fn insert(&mut self, word: Word, label: bool) -> Result<(), SampleError> {
        let other = if label { &self.negatives } else { &self.positives };
        if other.contains(&word) {
            return Err(SampleError::Inconsistent(format!("{word:?}")));
        }
        if label {
            self.positives.insert(word);
        } else {
            self.negatives.insert(word);
        }
        Ok(())
    }

    pub fn positives(&self) -> &BTreeSet<Word> {
        &self.positives
    }

    pub fn negatives(&self) -> &BTreeSet<Word> {
        &self.negatives
    }

    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self, word: &Word) -> Option<bool> {
        if self.positives.contains(word) {
            Some(true)
        } else if self.negatives.contains(word) {
            Some(false)
        } else {
            None
        }
    }

    /// All words with their labels, positives first.
    pub fn iter(&self) -> impl Iterator<Item = (&Word, bool)> {
        self.positives.iter().map(|w| (w, true)).chain(self.negatives.iter().map(|w| (w, false)))
    }
}

/// Where LAPR draws its passive training set from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SampleStrategy {
    /// Counterexamples only.
    CeOnly,
    /// Counterexamples plus every cached membership answer.
    All,
    /// Counterexamples plus a seeded uniform draw of `k` membership answers
    /// per counterexample.
    Mixed(usize),
}

impl std::str::FromStr for SampleStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ce_only" => Ok(SampleStrategy::CeOnly),
            "all" => Ok(SampleStrategy::All),
            _ => s
                .strip_prefix("mixed:")
                .and_then(|k| k.parse().ok())
                .map(SampleStrategy::Mixed)
                .ok_or_else(|| format!("unknown sample strategy {s:?} (expected ce_only, all or mixed:K)")),
        }
    }
}

impl std::fmt::Display for SampleStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SampleStrategy::CeOnly => f.write_str("ce_only"),
            SampleStrategy::All => f.write_str("all"),
            SampleStrategy::Mixed(k) => write!(f, "mixed:{k}"),
        }
    }
}

/// Reads a sample: one word per line prefixed by `+` or `-`; a bare sign is
/// the empty word. Blank lines and `#` comments are skipped.
pub fn parse_sample(text: &str, alphabet: &Alphabet) -> Result<LabeledSample, SampleError> {
    let mut sample = LabeledSample::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| SampleError::Parse { line: i + 1, message };
        let (label, rest) = if let Some(rest) = line.strip_prefix('+') {
            (true, rest)
        } else if let Some(rest) = line.strip_prefix('-') {
            (false, rest)
        } else {
            return Err(err(format!("expected '+' or '-' at start of {line:?}")));
        };
        let word = alphabet.parse_word(rest.trim()).map_err(|e| err(e.to_string()))?;
        sample.insert(word, label).map_err(|e| err(e.to_string()))?;
    }
    Ok(sample)
}

pub fn write_sample(sample: &LabeledSample, alphabet: &Alphabet) -> String {
    let mut out = String::new();
    for (w, label) in sample.iter() {
        out.push(if label { '+' } else { '-' });
        out.push_str(&alphabet.format_word(w));
        out.push('\n');
    }
    out
}
