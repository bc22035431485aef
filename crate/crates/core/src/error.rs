use thiserror::Error;

pub type Result<T, E = DfaError> = std::result::Result<T, E>;

/// Errors raised while building, parsing or comparing automata.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DfaError {
    #[error("invalid alphabet: {0}")]
    Alphabet(String),
    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(String),
    #[error("symbol index {symbol} is outside an alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },
    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: String, right: String },
    #[error("state {state} is out of range (dfa has {states} states)")]
    StateOutOfRange { state: usize, states: usize },
    #[error("dfa must have at least one state")]
    NoStates,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("transition table is not total: missing ({state}, {symbol})")]
    NotTotal { state: usize, symbol: char },
}

/// Errors raised by oracles during a learning session.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("membership query budget of {0} exhausted")]
    MqBudget(usize),
    #[error("per-counterexample query budget of {0} exhausted")]
    StepBudget(usize),
    #[error("equivalence query budget of {0} exhausted")]
    EqBudget(usize),
    #[error("counterexample {word} recorded with conflicting labels")]
    ConflictingCounterexample { word: String },
    #[error(transparent)]
    Dfa(#[from] DfaError),
}

/// Errors raised by the passive learner and its sample handling.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SampleError {
    #[error("word {0:?} is labelled both positive and negative")]
    Inconsistent(String),
    #[error("training set requested from a cache with no counterexamples")]
    NoCounterexamples,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Errors raised while picking exemplar words for a prompt.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("exemplar search needs at least one counterexample in the cache")]
    NoCounterexamples,
    #[error(transparent)]
    Dfa(#[from] DfaError),
}
