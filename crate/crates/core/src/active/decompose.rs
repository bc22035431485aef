//! Rivest–Schapire counterexample decomposition.

use crate::active::Conflict;
use crate::error::OracleError;
use crate::oracle::MembershipOracle;
use crate::word::{Symbol, Word};

/// The parts of a hypothesis the binary search needs.
pub(crate) trait HypothesisView {
    fn initial(&self) -> usize;
    fn successor(&self, q: usize, a: Symbol) -> usize;
    fn access(&self, q: usize) -> &Word;
}

/// A break point: `access(source) · a` and `access(target)` are merged by
/// the hypothesis but separated by `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Breakpoint {
    pub source: usize,
    pub a: Symbol,
    pub v: Word,
    pub target: usize,
}

pub(crate) enum Decomposition {
    Break(Breakpoint),
    Conflict(Conflict),
}

/// Binary search for an index `i` with α(i) = label ≠ α(i+1), where
/// α(i) = mq(access(h[ce[..i]]) · ce[i..]) and α(0) is taken to be `label`.
pub(crate) fn decompose(
    h: &impl HypothesisView,
    ce: &Word,
    label: bool,
    mq: &mut dyn MembershipOracle,
) -> Result<Decomposition, OracleError> {
    let m = ce.len();
    let mut states = Vec::with_capacity(m + 1);
    let mut q = h.initial();
    states.push(q);
    for &a in ce {
        q = h.successor(q, a);
        states.push(q);
    }
    let alpha = |i: usize, mq: &mut dyn MembershipOracle| -> Result<(Word, bool), OracleError> {
        let w = h.access(states[i]).concat(&ce.suffix_from(i));
        let v = mq.query(&w)?;
        Ok((w, v))
    };
    let (w_end, at_end) = alpha(m, mq)?;
    if m == 0 || at_end == label {
        return Ok(Decomposition::Conflict(Conflict { word: w_end, cached: at_end, required: !label }));
    }
    let (mut lo, mut hi) = (0, m);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if alpha(mid, mq)?.1 == label {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Decomposition::Break(Breakpoint {
        source: states[lo],
        a: ce.symbols()[lo],
        v: ce.suffix_from(lo + 1),
        target: states[lo + 1],
    }))
}
