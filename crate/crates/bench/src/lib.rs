//! Benchmark corpus, single sessions and parameter sweeps over the
//! simulated noisy teacher.

pub mod corpus;
pub mod session;
pub mod sweep;

pub use corpus::{default_corpus_dir, load_corpus, CorpusEntry, CorpusError};
pub use session::{run_session, run_with_teacher, Algorithm, SessionConfig, SessionRecord};
pub use sweep::{crossover, summarize, sweep, write_csv, Grid, Preset, SummaryRow};
