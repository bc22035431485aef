//! Teachers: membership and equivalence oracles, their caches, and the
//! backends that answer fresh membership queries.

pub mod audit;
mod cache;
pub mod llm;
mod pmat;
mod teacher;
pub mod terminal;

pub use cache::{CacheEntry, CounterexampleRecord, Provenance, QueryCache, QueryLabel};
pub use pmat::{coin, PmatConfig, PmatOracle};
pub use teacher::{Budgets, OracleStats, Teacher};

use crate::dfa::Dfa;
use crate::error::OracleError;
use crate::word::Word;

/// Anything that can answer a membership query.
pub trait MembershipOracle {
    fn query(&mut self, word: &Word) -> Result<bool, OracleError>;
}

impl<T: MembershipOracle + ?Sized> MembershipOracle for &mut T {
    fn query(&mut self, word: &Word) -> Result<bool, OracleError> {
        (**self).query(word)
    }
}

/// A backend that produces a fresh answer for an uncached word. The cache
/// is passed read-only so backends can draw on earlier answers.
pub trait LabelSource {
    fn label(&mut self, word: &Word, history: &QueryCache) -> QueryLabel;
}

/// Exact oracle answering from a DFA.
#[derive(Debug, Clone, Copy)]
pub struct DfaOracle<'a>(pub &'a Dfa);

impl MembershipOracle for DfaOracle<'_> {
    fn query(&mut self, word: &Word) -> Result<bool, OracleError> {
        Ok(self.0.eval(word))
    }
}

impl LabelSource for DfaOracle<'_> {
    fn label(&mut self, word: &Word, _: &QueryCache) -> QueryLabel {
        QueryLabel::from_bool(self.0.eval(word))
    }
}

/// Answers from the counterexample cache, `false` for everything else.
#[derive(Debug, Clone, Copy)]
pub struct HistoryOracle<'a>(pub &'a QueryCache);

impl MembershipOracle for HistoryOracle<'_> {
    fn query(&mut self, word: &Word) -> Result<bool, OracleError> {
        Ok(self.0.history_oracle(word))
    }
}

/// Wraps a closure as a membership oracle.
pub struct FnOracle<F>(pub F);

impl<F: FnMut(&Word) -> bool> MembershipOracle for FnOracle<F> {
    fn query(&mut self, word: &Word) -> Result<bool, OracleError> {
        Ok((self.0)(word))
    }
}

/// Answers from a hypothesis, except on counterexample words where the
/// pinned label wins.
pub struct PinnedOracle<'a> {
    pub hypothesis: &'a Dfa,
    pub cache: &'a QueryCache,
}

impl MembershipOracle for PinnedOracle<'_> {
    fn query(&mut self, word: &Word) -> Result<bool, OracleError> {
        Ok(match self.cache.get(word) {
            Some(e) if e.provenance == Provenance::Counterexample => e.label,
            _ => self.hypothesis.eval(word),
        })
    }
}
