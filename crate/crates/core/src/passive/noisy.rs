use std::collections::{BTreeSet, HashMap};

use crate::dfa::Dfa;
use crate::error::SampleError;
use crate::passive::{build_pta, LabeledSample};
use crate::word::{Alphabet, Word};

/// Label evidence gathered in one state: ordinary votes plus at most one
/// trusted label.
#[derive(Clone, Copy, Default)]
struct Votes {
    pos: u32,
    neg: u32,
    hard: Option<bool>,
}

impl Votes {
    fn soft(self) -> u32 {
        self.pos + self.neg
    }

    fn is_empty(self) -> bool {
        self.soft() == 0 && self.hard.is_none()
    }

    fn label(self) -> bool {
        self.hard.unwrap_or(self.pos > self.neg)
    }

    fn add(self, o: Votes) -> Votes {
        Votes { pos: self.pos + o.pos, neg: self.neg + o.neg, hard: self.hard.or(o.hard) }
    }
}

enum Undo {
    Votes(usize, Votes),
    Child(usize, Option<usize>),
}

struct Merger {
    k: usize,
    /// Disagreement rate expected between two views of one state.
    tolerance: f64,
    votes: Vec<Votes>,
    child: Vec<Option<usize>>,
    log: Vec<Undo>,
    stack: Vec<(usize, usize)>,
}

impl Merger {
    fn undo_to(&mut self, mark: usize) {
        while self.log.len() > mark {
            match self.log.pop().expect("log entry") {
                Undo::Votes(q, v) => self.votes[q] = v,
                Undo::Child(i, c) => self.child[i] = c,
            }
        }
    }

    fn set_child(&mut self, i: usize, c: Option<usize>) {
        self.log.push(Undo::Child(i, self.child[i]));
        self.child[i] = c;
    }

    /// Folds `b` into `r`. Returns the number of label pairs that agree and
    /// disagree, or `None` when two trusted labels clash.
    fn fold(&mut self, r: usize, b: usize) -> Option<(usize, usize)> {
        let (mut agree, mut disagree) = (0, 0);
        self.stack.clear();
        self.stack.push((r, b));
        while let Some((q, n)) = self.stack.pop() {
            let (vq, vn) = (self.votes[q], self.votes[n]);
            if q != n && !vn.is_empty() {
                if !vq.is_empty() {
                    if matches!((vq.hard, vn.hard), (Some(x), Some(y)) if x != y) {
                        return None;
                    }
                    if vq.label() == vn.label() {
                        agree += 1;
                    } else {
                        disagree += 1;
                    }
                }
                self.log.push(Undo::Votes(q, vq));
                self.votes[q] = vq.add(vn);
            }
            if q == n {
                continue;
            }
            for a in 0..self.k {
                if let Some(nc) = self.child[n * self.k + a] {
                    match self.child[q * self.k + a] {
                        Some(qc) => self.stack.push((qc, nc)),
                        None => self.set_child(q * self.k + a, Some(nc)),
                    }
                }
            }
        }
        Some((agree, disagree))
    }

    /// More than `tolerance` of the compared label pairs disagree.
    fn rejects(&self, agree: usize, disagree: usize) -> bool {
        disagree as f64 > self.tolerance * (agree + disagree) as f64
    }

    fn merge(&mut self, red: &[usize], r: usize, b: usize) -> Option<(usize, usize)> {
        for &p in red {
            for a in 0..self.k {
                if self.child[p * self.k + a] == Some(b) {
                    self.set_child(p * self.k + a, Some(r));
                }
            }
        }
        self.fold(r, b)
    }
}

/// Red/blue state merging for samples with label noise. Every state keeps
/// the labels folded into it as votes and is accepting when most votes
/// are positive. A merge is refused when more than `tolerance` of the
/// label pairs it brings together disagree. Words in `trusted` are never
/// outvoted, so the result classifies them all correctly; other sample
/// words may be relabelled.
pub fn rpni_learn_noisy(
    sample: &LabeledSample,
    trusted: &BTreeSet<Word>,
    alphabet: &Alphabet,
    tolerance: f64,
) -> Result<Dfa, SampleError> {
    Ok(rpni_learn_noisy_capped(sample, trusted, alphabet, tolerance, usize::MAX)?.expect("no cap"))
}

/// [`rpni_learn_noisy`] that gives up, returning `None`, as soon as more
/// than `max_red` states have been promoted.
pub fn rpni_learn_noisy_capped(
    sample: &LabeledSample,
    trusted: &BTreeSet<Word>,
    alphabet: &Alphabet,
    tolerance: f64,
    max_red: usize,
) -> Result<Option<Dfa>, SampleError> {
    let pta = build_pta(sample, alphabet.len())?;
    let k = alphabet.len();
    let votes = (0..pta.len())
        .map(|q| match pta.label(q) {
            None => Votes::default(),
            Some(l) if trusted.contains(pta.word(q)) => Votes { hard: Some(l), ..Votes::default() },
            Some(true) => Votes { pos: 1, ..Votes::default() },
            Some(false) => Votes { neg: 1, ..Votes::default() },
        })
        .collect();
    let mut m = Merger {
        k,
        tolerance,
        votes,
        child: pta.children_table().to_vec(),
        log: Vec::new(),
        stack: Vec::new(),
    };
    let mut red = vec![0usize];
    let mut is_red = vec![false; pta.len()];
    is_red[0] = true;
    let mut blue = Vec::new();
    loop {
        blue.clear();
        blue.extend(red.iter().flat_map(|&p| (0..k).map(move |a| p * k + a)).filter_map(|i| m.child[i].filter(|&c| !is_red[c])));
        blue.sort_unstable();
        blue.dedup();
        if blue.is_empty() {
            break;
        }
        let mut best: Option<(i64, usize, usize)> = None;
        let mut promote = None;
        for &b in &blue {
            let mut any = false;
            for &r in &red {
                let mark = m.log.len();
                let s = m.merge(&red, r, b);
                m.undo_to(mark);
                let Some((agree, disagree)) = s.filter(|&(a, d)| !m.rejects(a, d)) else { continue };
                let s = agree as i64 - disagree as i64;
                any = true;
                if best.is_none_or(|(bs, br, bb)| s > bs || (s == bs && (r, b) < (br, bb))) {
                    best = Some((s, r, b));
                }
            }
            if !any {
                promote = Some(b);
                break;
            }
        }
        match (promote, best) {
            (Some(b), _) => {
                if red.len() == max_red {
                    return Ok(None);
                }
                red.push(b);
                is_red[b] = true;
            }
            (None, Some((_, r, b))) => {
                m.merge(&red, r, b).expect("trial merge succeeded");
                m.log.clear();
            }
            (None, None) => unreachable!("blue set is non-empty"),
        }
    }
    let index: HashMap<usize, usize> = red.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let accepting = red.iter().map(|&r| m.votes[r].label()).collect();
    let delta = red
        .iter()
        .flat_map(|&r| (0..k).map(|a| m.child[r * k + a].map_or(0, |c| index[&c])).collect::<Vec<_>>())
        .collect();
    Ok(Some(Dfa::new(alphabet.clone(), 0, accepting, delta).expect("merged automaton is total").minimize()))
}
