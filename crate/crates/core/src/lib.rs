//! Learning regular languages from a teacher whose membership answers may be
//! persistently wrong while its counterexamples are always correct.

pub mod active;
pub mod dfa;
pub mod error;
pub mod oracle;
pub mod passive;
pub mod prompt;
pub mod tolerant;
pub mod word;

pub use dfa::Dfa;
pub use error::{DfaError, OracleError, PromptError, SampleError};
pub use word::{Alphabet, Symbol, Word};
