//! Line-based text format:
//!
//! ```text
//! alphabet: a b
//! states: 3
//! initial: 0
//! accepting: 1
//! trans: 0 a 1
//! ```
//!
//! `#` starts a comment. Exactly `states × |alphabet|` `trans:` lines are
//! required. Serialization lists transitions sorted by (state, symbol).

use std::fmt::Write;

use super::Dfa;
use crate::error::{DfaError, Result};
use crate::word::Alphabet;

pub fn serialize_dfa(dfa: &Dfa) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "alphabet: {}", dfa.alphabet());
    let _ = writeln!(out, "states: {}", dfa.num_states());
    let _ = writeln!(out, "initial: {}", dfa.initial());
    let accepting: Vec<String> = dfa.accepting_states().map(|q| q.to_string()).collect();
    if accepting.is_empty() {
        out.push_str("accepting:\n");
    } else {
        let _ = writeln!(out, "accepting: {}", accepting.join(" "));
    }
    for q in 0..dfa.num_states() {
        for a in dfa.alphabet().symbols() {
            let _ = writeln!(out, "trans: {} {} {}", q, dfa.alphabet().display(a), dfa.next(q, a));
        }
    }
    out
}

pub fn parse_dfa(text: &str) -> Result<Dfa> {
    let mut alphabet: Option<Alphabet> = None;
    let mut states: Option<usize> = None;
    let mut initial: Option<(usize, usize)> = None;
    let mut accepting: Option<(usize, Vec<usize>)> = None;
    let mut table: Vec<Option<usize>> = Vec::new();

    let err = |line: usize, message: String| DfaError::Parse { line, message };

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| err(line_no, format!("expected `key: value`, got {line:?}")))?;
        let rest = rest.trim();
        match key.trim() {
            "alphabet" => {
                let mut chars = Vec::new();
                for tok in rest.split_whitespace() {
                    let mut it = tok.chars();
                    match (it.next(), it.next()) {
                        (Some(c), None) => chars.push(c),
                        _ => return Err(err(line_no, format!("symbol {tok:?} is not one character"))),
                    }
                }
                let a = Alphabet::new(chars).map_err(|e| err(line_no, e.to_string()))?;
                alphabet = Some(a);
            }
            "states" => {
                let n: usize = rest
                    .parse()
                    .map_err(|_| err(line_no, format!("bad state count {rest:?}")))?;
                if n == 0 {
                    return Err(err(line_no, "dfa must have at least one state".into()));
                }
                states = Some(n);
            }
            "initial" => {
                let q: usize = rest
                    .parse()
                    .map_err(|_| err(line_no, format!("bad initial state {rest:?}")))?;
                initial = Some((line_no, q));
            }
            "accepting" => {
                let qs = rest
                    .split_whitespace()
                    .map(|t| t.parse::<usize>().map_err(|_| err(line_no, format!("bad state {t:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                accepting = Some((line_no, qs));
            }
            "trans" => {
                let (Some(alpha), Some(n)) = (alphabet.as_ref(), states) else {
                    return Err(err(line_no, "trans line before alphabet and states".into()));
                };
                if table.is_empty() {
                    table = vec![None; n * alpha.len()];
                }
                let toks: Vec<&str> = rest.split_whitespace().collect();
                let [from, sym, to] = toks[..] else {
                    return Err(err(line_no, "expected `trans: <state> <symbol> <state>`".into()));
                };
                let from = parse_state(from, n).map_err(|m| err(line_no, m))?;
                let to = parse_state(to, n).map_err(|m| err(line_no, m))?;
                let mut cs = sym.chars();
                let sym = match (cs.next(), cs.next()) {
                    (Some(c), None) => alpha
                        .symbol(c)
                        .ok_or_else(|| err(line_no, format!("undeclared symbol {c:?}")))?,
                    _ => return Err(err(line_no, format!("symbol {sym:?} is not one character"))),
                };
                let slot = &mut table[from * alpha.len() + sym.index()];
                if slot.is_some() {
                    return Err(err(
                        line_no,
                        format!("duplicate transition for ({from}, {})", alpha.display(sym)),
                    ));
                }
                *slot = Some(to);
            }
            other => return Err(err(line_no, format!("unknown key {other:?}"))),
        }
    }

    let end = text.lines().count().max(1);
    let alphabet = alphabet.ok_or_else(|| err(end, "missing `alphabet:` line".into()))?;
    let n = states.ok_or_else(|| err(end, "missing `states:` line".into()))?;
    let (init_line, init) = initial.ok_or_else(|| err(end, "missing `initial:` line".into()))?;
    if init >= n {
        return Err(err(init_line, format!("undeclared state {init}")));
    }
    let (acc_line, acc) = accepting.ok_or_else(|| err(end, "missing `accepting:` line".into()))?;
    let mut flags = vec![false; n];
    for q in acc {
        if q >= n {
            return Err(err(acc_line, format!("undeclared state {q}")));
        }
        flags[q] = true;
    }
    if table.is_empty() {
        table = vec![None; n * alphabet.len()];
    }
    let mut delta = Vec::with_capacity(table.len());
    for (i, t) in table.iter().enumerate() {
        match t {
            Some(t) => delta.push(*t),
            None => {
                return Err(DfaError::NotTotal {
                    state: i / alphabet.len(),
                    symbol: alphabet.chars()[i % alphabet.len()],
                })
            }
        }
    }
    Dfa::new(alphabet, init, flags, delta)
}

fn parse_state(tok: &str, n: usize) -> std::result::Result<usize, String> {
    let q: usize = tok.parse().map_err(|_| format!("bad state {tok:?}"))?;
    if q >= n {
        return Err(format!("undeclared state {q}"));
    }
    Ok(q)
}
