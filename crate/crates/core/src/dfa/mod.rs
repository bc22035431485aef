//! Deterministic finite automata over a small printable alphabet.

mod equivalence;
mod format;
mod minimize;

pub use equivalence::{equivalent, find_counterexample};
pub use format::{parse_dfa, serialize_dfa};

use rand::Rng;

use crate::error::{DfaError, Result};
use crate::word::{Alphabet, Symbol, Word};

/// A complete DFA `⟨Q, Σ, q0, δ, F⟩` with states numbered `0..n`.
///
/// The transition table is stored row-major: `delta[q * |Σ| + a]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dfa {
    alphabet: Alphabet,
    initial: usize,
    accepting: Vec<bool>,
    delta: Vec<usize>,
}

impl Dfa {
    /// Builds a DFA, checking that the table is total and every index is in range.
    pub fn new(
        alphabet: Alphabet,
        initial: usize,
        accepting: Vec<bool>,
        delta: Vec<usize>,
    ) -> Result<Self> {
        let n = accepting.len();
        if n == 0 {
            return Err(DfaError::NoStates);
        }
        if initial >= n {
            return Err(DfaError::StateOutOfRange { state: initial, states: n });
        }
        if delta.len() != n * alphabet.len() {
            let missing = delta.len().min(n * alphabet.len());
            return Err(DfaError::NotTotal {
                state: missing / alphabet.len(),
                symbol: alphabet.chars()[missing % alphabet.len()],
            });
        }
        if let Some(&bad) = delta.iter().find(|&&t| t >= n) {
            return Err(DfaError::StateOutOfRange { state: bad, states: n });
        }
        Ok(Dfa { alphabet, initial, accepting, delta })
    }

    /// Builds a DFA from closures; used by tests and the corpus generators.
    pub fn from_fn(
        alphabet: Alphabet,
        states: usize,
        initial: usize,
        accepting: impl Fn(usize) -> bool,
        next: impl Fn(usize, Symbol) -> usize,
    ) -> Result<Self> {
        let k = alphabet.len();
        let mut delta = Vec::with_capacity(states * k);
        for q in 0..states {
            for a in 0..k {
                delta.push(next(q, Symbol(a as u8)));
            }
        }
        Dfa::new(alphabet, initial, (0..states).map(accepting).collect(), delta)
    }

    /// The one-state DFA accepting (or rejecting) every word.
    pub fn constant(alphabet: Alphabet, accept: bool) -> Self {
        let k = alphabet.len();
        Dfa { alphabet, initial: 0, accepting: vec![accept], delta: vec![0; k] }
    }

    /// A uniformly random complete DFA with `states` states and a random
    /// acceptance flag per state. Not necessarily minimal or connected.
    pub fn random<R: Rng + ?Sized>(alphabet: Alphabet, states: usize, rng: &mut R) -> Self {
        let states = states.max(1);
        let k = alphabet.len();
        let delta = (0..states * k).map(|_| rng.gen_range(0..states)).collect();
        let accepting = (0..states).map(|_| rng.gen_bool(0.5)).collect();
        Dfa { alphabet, initial: 0, accepting, delta }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    #[inline]
    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    #[inline]
    pub fn initial(&self) -> usize {
        self.initial
    }

    #[inline]
    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.accepting.iter().enumerate().filter(|(_, &f)| f).map(|(q, _)| q)
    }

    #[inline]
    pub fn next(&self, q: usize, a: Symbol) -> usize {
        self.delta[q * self.alphabet.len() + a.index()]
    }

    /// Extended transition function from an arbitrary state.
    pub fn run_from(&self, q: usize, word: &Word) -> Result<usize> {
        self.alphabet.check_word(word)?;
        if q >= self.num_states() {
            return Err(DfaError::StateOutOfRange { state: q, states: self.num_states() });
        }
        Ok(self.walk(q, word))
    }

    /// `δ(q0, word)`.
    pub fn run(&self, word: &Word) -> Result<usize> {
        self.run_from(self.initial, word)
    }

    /// True iff `δ(q0, word) ∈ F`.
    pub fn accepts(&self, word: &Word) -> Result<bool> {
        Ok(self.accepting[self.run(word)?])
    }

    /// Unchecked classification for words already known to be over this
    /// alphabet. Panics on out-of-range symbols.
    #[inline]
    pub fn eval(&self, word: &Word) -> bool {
        self.accepting[self.walk(self.initial, word)]
    }

    /// Unchecked `δ(q0, word)`.
    #[inline]
    pub fn state_of(&self, word: &Word) -> usize {
        self.walk(self.initial, word)
    }

    #[inline]
    fn walk(&self, mut q: usize, word: &Word) -> usize {
        let k = self.alphabet.len();
        for s in word {
            q = self.delta[q * k + s.index()];
        }
        q
    }

    pub fn complement(&self) -> Dfa {
        Dfa {
            alphabet: self.alphabet.clone(),
            initial: self.initial,
            accepting: self.accepting.iter().map(|f| !f).collect(),
            delta: self.delta.clone(),
        }
    }

    /// States reachable from `q0`, in breadth-first order with symbols
    /// explored in alphabet order.
    pub fn reachable_bfs(&self) -> Vec<usize> {
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut head = 0;
        while head < order.len() {
            let q = order[head];
            head += 1;
            for a in self.alphabet.symbols() {
                let t = self.next(q, a);
                if !seen[t] {
                    seen[t] = true;
                    order.push(t);
                }
            }
        }
        order
    }

    /// Shortest, lexicographically least access word of every reachable state.
    pub fn access_words(&self) -> Vec<Option<Word>> {
        let mut access: Vec<Option<Word>> = vec![None; self.num_states()];
        access[self.initial] = Some(Word::empty());
        let mut queue = std::collections::VecDeque::from([self.initial]);
        while let Some(q) = queue.pop_front() {
            let base = access[q].clone().expect("queued states have access words");
            for a in self.alphabet.symbols() {
                let t = self.next(q, a);
                if access[t].is_none() {
                    access[t] = Some(base.append(a));
                    queue.push_back(t);
                }
            }
        }
        access
    }

    /// Language-equivalent, reachable, minimal DFA with states renumbered in
    /// breadth-first order from the initial state.
    pub fn minimize(&self) -> Dfa {
        minimize::minimize(self)
    }

    /// Renumbers reachable states in breadth-first order and drops the rest.
    /// Does not merge equivalent states.
    pub fn canonical_numbering(&self) -> Dfa {
        let order = self.reachable_bfs();
        let mut rename = vec![usize::MAX; self.num_states()];
        for (new, &old) in order.iter().enumerate() {
            rename[old] = new;
        }
        let k = self.alphabet.len();
        let mut delta = Vec::with_capacity(order.len() * k);
        for &old in &order {
            for a in self.alphabet.symbols() {
                delta.push(rename[self.next(old, a)]);
            }
        }
        Dfa {
            alphabet: self.alphabet.clone(),
            initial: 0,
            accepting: order.iter().map(|&q| self.accepting[q]).collect(),
            delta,
        }
    }

    pub(crate) fn check_same_alphabet(&self, other: &Dfa) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(DfaError::AlphabetMismatch {
                left: self.alphabet.to_string(),
                right: other.alphabet.to_string(),
            });
        }
        Ok(())
    }
}
