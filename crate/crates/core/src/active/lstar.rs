//! L* over an observation table, with Rivest–Schapire counterexample
//! handling: each counterexample contributes one distinguishing suffix.

use std::collections::HashMap;

use crate::active::decompose::{decompose, Decomposition, HypothesisView};
use crate::active::{ActiveLearner, Conflict, Recorder, RefinementFailure, RefinementReport};
use crate::dfa::Dfa;
use crate::error::OracleError;
use crate::oracle::MembershipOracle;
use crate::word::{Alphabet, Symbol, Word};

/// Rows indexed by prefix, columns by suffix.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObservationTable {
    /// Access words of the hypothesis states, in creation order.
    pub prefixes: Vec<Word>,
    /// Column labels; `suffixes[0]` is the empty word.
    pub suffixes: Vec<Word>,
    /// Row contents for every word in `S ∪ S·Σ`.
    pub rows: HashMap<Word, Vec<bool>>,
}

impl ObservationTable {
    pub fn row(&self, word: &Word) -> Option<&[bool]> {
        self.rows.get(word).map(Vec::as_slice)
    }

    /// True when every row of `S·Σ` equals some row of `S`.
    pub fn is_closed(&self, alphabet: &Alphabet) -> bool {
        let s_rows: Vec<&Vec<bool>> = self.prefixes.iter().map(|p| &self.rows[p]).collect();
        self.prefixes.iter().all(|p| {
            alphabet.symbols().all(|a| s_rows.contains(&&self.rows[&p.append(a)]))
        })
    }
}

#[derive(Debug, Clone)]
pub struct LStarLearner {
    alphabet: Alphabet,
    table: ObservationTable,
    /// Row contents of `S` to state index.
    index: HashMap<Vec<bool>, usize>,
    trans: Vec<usize>,
}

impl LStarLearner {
    pub fn new(alphabet: Alphabet) -> Self {
        LStarLearner { alphabet, table: ObservationTable::default(), index: HashMap::new(), trans: Vec::new() }
    }

    pub fn table(&self) -> &ObservationTable {
        &self.table
    }

    fn k(&self) -> usize {
        self.alphabet.len()
    }

    fn fill(&mut self, word: &Word, mq: &mut dyn MembershipOracle) -> Result<(), OracleError> {
        if self.table.rows.contains_key(word) {
            return Ok(());
        }
        let mut row = Vec::with_capacity(self.table.suffixes.len());
        for e in &self.table.suffixes {
            row.push(mq.query(&word.concat(e))?);
        }
        self.table.rows.insert(word.clone(), row);
        Ok(())
    }

    fn add_prefix(&mut self, p: Word, mq: &mut dyn MembershipOracle) -> Result<(), OracleError> {
        self.fill(&p, mq)?;
        let row = self.table.rows[&p].clone();
        self.index.insert(row, self.table.prefixes.len());
        self.table.prefixes.push(p.clone());
        for a in 0..self.k() {
            self.fill(&p.append(Symbol(a as u8)), mq)?;
        }
        Ok(())
    }

    /// Promotes unmatched `S·Σ` rows until the table is closed, then
    /// rebuilds the transition table.
    fn close(&mut self, mq: &mut dyn MembershipOracle) -> Result<(), OracleError> {
        let k = self.k();
        let mut i = 0;
        while i < self.table.prefixes.len() {
            for a in 0..k {
                let w = self.table.prefixes[i].append(Symbol(a as u8));
                if !self.index.contains_key(&self.table.rows[&w]) {
                    self.add_prefix(w, mq)?;
                }
            }
            i += 1;
        }
        self.trans = Vec::with_capacity(self.table.prefixes.len() * k);
        for p in &self.table.prefixes {
            for a in 0..k {
                let row = &self.table.rows[&p.append(Symbol(a as u8))];
                self.trans.push(self.index[row]);
            }
        }
        Ok(())
    }

    fn add_suffix(&mut self, v: Word, mq: &mut dyn MembershipOracle) -> Result<(), OracleError> {
        let mut words: Vec<Word> = self.table.rows.keys().cloned().collect();
        words.sort();
        for u in words {
            let b = mq.query(&u.concat(&v))?;
            self.table.rows.get_mut(&u).expect("row").push(b);
        }
        self.table.suffixes.push(v);
        self.index = self
            .table
            .prefixes
            .iter()
            .enumerate()
            .map(|(i, p)| (self.table.rows[p].clone(), i))
            .collect();
        Ok(())
    }

    fn init_inner(&mut self, mq: &mut dyn MembershipOracle) -> Result<(), OracleError> {
        self.table.suffixes.push(Word::empty());
        self.add_prefix(Word::empty(), mq)?;
        self.close(mq)
    }

    fn refine_inner(&mut self, ce: &Word, label: bool, mq: &mut dyn MembershipOracle) -> Result<Option<Conflict>, OracleError> {
        while self.classify(ce) != label {
            let bp = match decompose(self, ce, label, mq)? {
                Decomposition::Conflict(c) => return Ok(Some(c)),
                Decomposition::Break(bp) => bp,
            };
            let ua_v = self.table.prefixes[bp.source].append(bp.a).concat(&bp.v);
            if self.table.suffixes.contains(&bp.v) {
                let cached = mq.query(&ua_v)?;
                return Ok(Some(Conflict { word: ua_v, cached, required: !cached }));
            }
            let before = self.table.prefixes.len();
            self.add_suffix(bp.v, mq)?;
            self.close(mq)?;
            if self.table.prefixes.len() == before {
                let cached = mq.query(&ua_v)?;
                return Ok(Some(Conflict { word: ua_v, cached, required: !cached }));
            }
        }
        Ok(None)
    }
}

impl HypothesisView for LStarLearner {
    fn initial(&self) -> usize {
        0
    }

    fn successor(&self, q: usize, a: Symbol) -> usize {
        self.trans[q * self.k() + a.index()]
    }

    fn access(&self, q: usize) -> &Word {
        &self.table.prefixes[q]
    }
}

impl ActiveLearner for LStarLearner {
    fn initialize(&mut self, mq: &mut dyn MembershipOracle) -> Result<(), OracleError> {
        let mut fresh = LStarLearner::new(self.alphabet.clone());
        fresh.init_inner(mq)?;
        *self = fresh;
        Ok(())
    }

    fn hypothesis(&self) -> Dfa {
        if self.table.prefixes.is_empty() {
            return Dfa::constant(self.alphabet.clone(), false);
        }
        let accepting = self.table.prefixes.iter().map(|p| self.table.rows[p][0]).collect();
        Dfa::new(self.alphabet.clone(), 0, accepting, self.trans.clone()).expect("closed table is total")
    }

    fn state_count(&self) -> usize {
        self.table.prefixes.len()
    }

    fn classify(&self, word: &Word) -> bool {
        if self.table.prefixes.is_empty() {
            return false;
        }
        let q = word.iter().fold(0, |q, &a| self.successor(q, a));
        self.table.rows[&self.table.prefixes[q]][0]
    }

    fn refine(
        &mut self,
        ce: &Word,
        label: bool,
        mq: &mut dyn MembershipOracle,
        step_budget: usize,
    ) -> Result<RefinementReport, OracleError> {
        if self.classify(ce) == label {
            return Ok(RefinementReport::failed(Vec::new(), RefinementFailure::AlreadyCorrect, None));
        }
        let backup = self.clone();
        let mut rec = Recorder::new(mq, step_budget);
        let outcome = self.refine_inner(ce, label, &mut rec);
        let log = rec.log;
        match outcome {
            Ok(None) => Ok(RefinementReport::success(log)),
            Ok(Some(c)) => {
                *self = backup;
                Ok(RefinementReport::failed(log, RefinementFailure::Conflict, Some(c)))
            }
            Err(OracleError::StepBudget(_)) => {
                *self = backup;
                Ok(RefinementReport::failed(log, RefinementFailure::StepBudget, None))
            }
            Err(e) => {
                *self = backup;
                Err(e)
            }
        }
    }
}
