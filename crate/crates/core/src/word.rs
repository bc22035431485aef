//! Symbols, alphabets and words.
//!
//! A [`Symbol`] is an index into an [`Alphabet`]; the alphabet owns the
//! printable character used for each index. Words compare lexicographically
//! by symbol index, with a proper prefix ordering before its extensions.

use std::fmt;

use crate::error::{DfaError, Result};

/// Maximum number of symbols an alphabet may carry.
pub const MAX_ALPHABET: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(transparent)]
pub struct Symbol(pub u8);

impl Symbol {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An ordered set of distinct printable characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    chars: Vec<char>,
}

impl Alphabet {
    pub fn new(chars: impl IntoIterator<Item = char>) -> Result<Self> {
        let chars: Vec<char> = chars.into_iter().collect();
        if chars.is_empty() || chars.len() > MAX_ALPHABET {
            return Err(DfaError::Alphabet(format!(
                "alphabet must have between 1 and {MAX_ALPHABET} symbols, got {}",
                chars.len()
            )));
        }
        for (i, c) in chars.iter().enumerate() {
            if c.is_whitespace() || c.is_control() || *c == '#' || *c == '+' || *c == '-' {
                return Err(DfaError::Alphabet(format!("symbol {c:?} is not allowed")));
            }
            if chars[..i].contains(c) {
                return Err(DfaError::Alphabet(format!("duplicate symbol {c:?}")));
            }
        }
        Ok(Alphabet { chars })
    }

    /// The two-letter alphabet `{a, b}` used throughout the corpus.
    pub fn ab() -> Self {
        Alphabet { chars: vec!['a', 'b'] }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.chars.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.chars.len()).map(|i| Symbol(i as u8))
    }

    pub fn symbol(&self, c: char) -> Option<Symbol> {
        self.chars.iter().position(|&x| x == c).map(|i| Symbol(i as u8))
    }

    pub fn display(&self, s: Symbol) -> char {
        self.chars[s.index()]
    }

    pub fn contains(&self, s: Symbol) -> bool {
        s.index() < self.chars.len()
    }

    /// Parses a word written as a plain character string. The empty string
    /// and the literal `ε` both denote the empty word.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        if text == "ε" {
            return Ok(Word::empty());
        }
        text.chars()
            .map(|c| {
                self.symbol(c)
                    .ok_or_else(|| DfaError::UnknownSymbol(c.to_string()))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word::from)
    }

    pub fn format_word(&self, word: &Word) -> String {
        word.iter().map(|&s| self.display(s)).collect()
    }

    /// Checks that every symbol of `word` belongs to this alphabet.
    pub fn check_word(&self, word: &Word) -> Result<()> {
        match word.iter().find(|s| !self.contains(**s)) {
            Some(s) => Err(DfaError::SymbolOutOfRange {
                symbol: s.index(),
                alphabet: self.len(),
            }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.chars.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A finite sequence of symbols; the empty word is a valid value.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_indices(indices: &[u8]) -> Self {
        Word(indices.iter().map(|&i| Symbol(i)).collect())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Symbol> {
        self.0.iter()
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }

    pub fn suffix_from(&self, start: usize) -> Word {
        Word(self.0[start..].to_vec())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn append(&self, s: Symbol) -> Word {
        let mut v = Vec::with_capacity(self.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(s);
        Word(v)
    }

    /// Shortlex order: shorter words first, then lexicographic.
    pub fn shortlex_cmp(&self, other: &Word) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.cmp(other))
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

impl FromIterator<Symbol> for Word {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Word {
    type Item = &'a Symbol;
    type IntoIter = std::slice::Iter<'a, Symbol>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// All words over `alphabet_len` symbols with length at most `max_len`, in
/// shortlex order.
pub fn words_up_to(alphabet_len: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * alphabet_len);
        for w in &layer {
            for s in 0..alphabet_len {
                next.push(w.append(Symbol(s as u8)));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}
