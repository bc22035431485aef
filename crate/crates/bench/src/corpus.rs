//! The shipped benchmark corpus: one DFA file per entry plus a tab-separated
//! metadata file `corpus.tsv` with lines
//! `id<TAB>dfa-file<TAB>description<TAB>+word: why<TAB>-word: why`.

use std::fmt;
use std::path::{Path, PathBuf};

use lapr_core::dfa::{parse_dfa, Dfa};
use lapr_core::word::{Alphabet, Word};

/// Largest minimal automaton accepted into the corpus.
pub const MAX_STATES: usize = 20;

/// The name of the metadata file inside a corpus directory.
pub const METADATA_FILE: &str = "corpus.tsv";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub word: Word,
    pub explanation: String,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: String,
    pub dfa: Dfa,
    pub description: String,
    pub positive: Example,
    pub negative: Example,
}

impl CorpusEntry {
    /// Checks the entry invariants: minimal, small, over `{a, b}`, and with
    /// correctly classified examples.
    pub fn validate(&self) -> Result<(), String> {
        if self.dfa.alphabet().chars().iter().any(|c| !matches!(c, 'a' | 'b')) {
            return Err(format!("alphabet {} is not a subset of {{a, b}}", self.dfa.alphabet()));
        }
        let minimal = self.dfa.minimize();
        if minimal.num_states() != self.dfa.num_states() {
            return Err(format!("dfa has {} states but its minimal form has {}", self.dfa.num_states(), minimal.num_states()));
        }
        if self.dfa.num_states() > MAX_STATES {
            return Err(format!("dfa has {} states, more than {MAX_STATES}", self.dfa.num_states()));
        }
        let fmt = |w: &Word| self.dfa.alphabet().format_word(w);
        if !self.dfa.eval(&self.positive.word) {
            return Err(format!("positive example {:?} is rejected", fmt(&self.positive.word)));
        }
        if self.dfa.eval(&self.negative.word) {
            return Err(format!("negative example {:?} is accepted", fmt(&self.negative.word)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryError {
    /// Entry id, or the metadata line number when the id is unreadable.
    pub entry: String,
    pub message: String,
}

impl fmt::Display for EntryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entry, self.message)
    }
}

/// Every problem found while loading a corpus, one per offending entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusError {
    pub errors: Vec<EntryError>,
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid corpus:")?;
        for e in &self.errors {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for CorpusError {}

/// The corpus directory shipped with this crate.
pub fn default_corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn parse_example(alphabet: &Alphabet, field: &str, sign: char) -> Result<Example, String> {
    let rest = field
        .strip_prefix(sign)
        .ok_or_else(|| format!("example {field:?} must start with {sign:?}"))?;
    let (word, why) = rest.split_once(':').ok_or_else(|| format!("example {field:?} needs `word: explanation`"))?;
    let word = alphabet.parse_word(word.trim()).map_err(|e| e.to_string())?;
    Ok(Example { word, explanation: why.trim().to_string() })
}

fn load_entry(dir: &Path, line: &str) -> Result<CorpusEntry, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    let [_, file, description, pos, neg] = fields[..] else {
        return Err(format!("expected 5 tab-separated fields, found {}", fields.len()));
    };
    let text = std::fs::read_to_string(dir.join(file)).map_err(|e| format!("{file}: {e}"))?;
    let dfa = parse_dfa(&text).map_err(|e| format!("{file}: {e}"))?;
    let positive = parse_example(dfa.alphabet(), pos, '+')?;
    let negative = parse_example(dfa.alphabet(), neg, '-')?;
    let entry = CorpusEntry { id: fields[0].to_string(), dfa, description: description.to_string(), positive, negative };
    entry.validate()?;
    Ok(entry)
}

/// Loads and validates every entry listed in `dir/corpus.tsv`, in file order.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let meta = dir.join(METADATA_FILE);
    let text = std::fs::read_to_string(&meta).map_err(|e| CorpusError {
        errors: vec![EntryError { entry: meta.display().to_string(), message: e.to_string() }],
    })?;
    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let id = line.split('\t').next().filter(|s| !s.is_empty());
        let name = id.map_or_else(|| format!("line {}", i + 1), str::to_string);
        if entries.iter().any(|e: &CorpusEntry| e.id == name) {
            errors.push(EntryError { entry: name, message: "duplicate id".into() });
            continue;
        }
        match load_entry(dir, line) {
            Ok(e) => entries.push(e),
            Err(message) => errors.push(EntryError { entry: name, message }),
        }
    }
    if errors.is_empty() {
        Ok(entries)
    } else {
        Err(CorpusError { errors })
    }
}
