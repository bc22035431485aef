//! A person at a terminal answering membership queries.

use std::io::{BufRead, Write};

use crate::oracle::{LabelSource, QueryCache, QueryLabel};
use crate::word::{Alphabet, Word};

/// Prints each word with the language description and reads `y` or `n`.
/// Anything else is asked again; end of input answers `Unknown`.
pub struct TerminalOracle<R, W> {
    input: R,
    output: W,
    description: String,
    alphabet: Alphabet,
}

impl<R: BufRead, W: Write> TerminalOracle<R, W> {
    pub fn new(input: R, output: W, description: impl Into<String>, alphabet: Alphabet) -> Self {
        TerminalOracle { input, output, description: description.into(), alphabet }
    }

    fn ask(&mut self, word: &Word) -> std::io::Result<QueryLabel> {
        let shown = if word.is_empty() { "ε (empty word)".to_owned() } else { self.alphabet.format_word(word) };
        writeln!(self.output, "language: {}", self.description)?;
        loop {
            write!(self.output, "is \"{shown}\" in the language? [y/n] ")?;
            self.output.flush()?;
            let mut line = String::new();
            if self.input.read_line(&mut line)? == 0 {
                return Ok(QueryLabel::Unknown);
            }
            match line.trim().to_lowercase().as_str() {
                "y" | "yes" => return Ok(QueryLabel::Accept),
                "n" | "no" => return Ok(QueryLabel::Reject),
                _ => writeln!(self.output, "please answer y or n")?,
            }
        }
    }
}

impl<R: BufRead, W: Write> LabelSource for TerminalOracle<R, W> {
    fn label(&mut self, word: &Word, _: &QueryCache) -> QueryLabel {
        self.ask(word).unwrap_or(QueryLabel::Unknown)
    }
}
