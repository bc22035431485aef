use serde::{Deserialize, Serialize};

use crate::dfa::Dfa;
use crate::error::SampleError;
use crate::passive::{build_pta, LabeledSample, PrefixTreeAcceptor};
use crate::word::Alphabet;

/// How the red/blue merger picks its next merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scoring {
    /// First valid merge in canonical order.
    RpniOrder,
    /// Highest evidence score, ties to the lowest (red, blue) pair.
    #[default]
    Edsm,
}

enum Undo {
    Label(usize, Option<bool>),
    Child(usize, Option<usize>),
}

/// The PTA under construction: labels and transitions over PTA node ids,
/// with an undo log for trial merges.
struct Merger {
    k: usize,
    label: Vec<Option<bool>>,
    child: Vec<Option<usize>>,
    log: Vec<Undo>,
}

impl Merger {
    fn new(pta: &PrefixTreeAcceptor) -> Self {
        Merger {
            k: pta.alphabet_len(),
            label: pta.labels().to_vec(),
            child: pta.children_table().to_vec(),
            log: Vec::new(),
        }
    }

    fn set_label(&mut self, q: usize, l: Option<bool>) {
        self.log.push(Undo::Label(q, self.label[q]));
        self.label[q] = l;
    }

    fn set_child(&mut self, i: usize, c: Option<usize>) {
        self.log.push(Undo::Child(i, self.child[i]));
        self.child[i] = c;
    }

    fn undo_to(&mut self, mark: usize) {
        while self.log.len() > mark {
            match self.log.pop().expect("log entry") {
                Undo::Label(q, l) => self.label[q] = l,
                Undo::Child(i, c) => self.child[i] = c,
            }
        }
    }

    /// Folds the subtree at `b` into `r`. Returns the number of agreeing
    /// label pairs, or `None` on a label conflict.
    fn fold(&mut self, r: usize, b: usize) -> Option<usize> {
        let mut score = 0;
        let mut stack = vec![(r, b)];
        while let Some((q, n)) = stack.pop() {
            match (self.label[q], self.label[n]) {
                (Some(x), Some(y)) if x != y => return None,
                (Some(_), Some(_)) => score += 1,
                (None, Some(y)) => self.set_label(q, Some(y)),
                _ => {}
            }
            if q == n {
                continue;
            }
            for a in 0..self.k {
                if let Some(nc) = self.child[n * self.k + a] {
                    match self.child[q * self.k + a] {
                        Some(qc) => stack.push((qc, nc)),
                        None => self.set_child(q * self.k + a, Some(nc)),
                    }
                }
            }
        }
        Some(score)
    }

    /// Redirects every red transition into `b` to `r`, then folds.
    fn merge(&mut self, red: &[usize], r: usize, b: usize) -> Option<usize> {
        for &p in red {
            for a in 0..self.k {
                if self.child[p * self.k + a] == Some(b) {
                    self.set_child(p * self.k + a, Some(r));
                }
            }
        }
        self.fold(r, b)
    }

    /// Successors of red states that are not red, ascending.
    fn blue(&self, red: &[usize], is_red: &[bool]) -> Vec<usize> {
        let mut out: Vec<usize> = red
            .iter()
            .flat_map(|&p| (0..self.k).filter_map(move |a| self.child[p * self.k + a]))
            .filter(|&c| !is_red[c])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Tries `b` into `r` and rolls back; the evidence score or a veto.
    fn trial(&mut self, red: &[usize], r: usize, b: usize) -> Option<usize> {
        let mark = self.log.len();
        let s = self.merge(red, r, b);
        self.undo_to(mark);
        s
    }
}

/// Evidence score for merging PTA node `blue` into `red` on the unmerged
/// tree: label agreements across the folded subtrees, `None` on a conflict.
pub fn edsm_score(pta: &PrefixTreeAcceptor, red: usize, blue: usize) -> Option<usize> {
    let mut m = Merger::new(pta);
    m.trial(&[red], red, blue)
}

/// Red/blue state merging over the PTA of `sample`. The result is total,
/// minimal and canonically numbered; it accepts every positive and rejects
/// every negative word.
pub fn rpni_learn(sample: &LabeledSample, alphabet: &Alphabet, scoring: Scoring) -> Result<Dfa, SampleError> {
    let pta = build_pta(sample, alphabet.len())?;
    let mut m = Merger::new(&pta);
    let mut red = vec![0usize];
    let mut is_red = vec![false; pta.len()];
    is_red[0] = true;
    loop {
        let blue = m.blue(&red, &is_red);
        if blue.is_empty() {
            break;
        }
        let choice = match scoring {
            Scoring::RpniOrder => {
                let b = blue[0];
                match red.iter().copied().find(|&r| m.trial(&red, r, b).is_some()) {
                    Some(r) => Ok((r, b)),
                    None => Err(b),
                }
            }
            Scoring::Edsm => {
                let mut best: Option<(usize, usize, usize)> = None;
                let mut promote = None;
                for &b in &blue {
                    let mut any = false;
                    for &r in &red {
                        if let Some(s) = m.trial(&red, r, b) {
                            any = true;
                            let better = match best {
                                None => true,
                                Some((bs, br, bb)) => s > bs || (s == bs && (r, b) < (br, bb)),
                            };
                            if better {
                                best = Some((s, r, b));
                            }
                        }
                    }
                    if !any {
                        promote = Some(b);
                        break;
                    }
                }
                match (promote, best) {
                    (Some(b), _) => Err(b),
                    (None, Some((_, r, b))) => Ok((r, b)),
                    (None, None) => unreachable!("blue set is non-empty"),
                }
            }
        };
        match choice {
            Ok((r, b)) => {
                m.merge(&red, r, b).expect("trial merge succeeded");
                m.log.clear();
            }
            Err(b) => {
                red.push(b);
                is_red[b] = true;
            }
        }
    }
    Ok(to_dfa(&m, &red, alphabet))
}

/// Red states with their transitions. Unlabeled states reject; a missing
/// transition returns to the initial state.
fn to_dfa(m: &Merger, red: &[usize], alphabet: &Alphabet) -> Dfa {
    let k = m.k;
    let index: std::collections::HashMap<usize, usize> = red.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let accepting: Vec<bool> = red.iter().map(|&r| m.label[r] == Some(true)).collect();
    let mut delta = Vec::with_capacity(red.len() * k);
    for &r in red {
        for a in 0..k {
            delta.push(m.child[r * k + a].map_or(0, |c| index[&c]));
        }
    }
    Dfa::new(alphabet.clone(), 0, accepting, delta).expect("merged automaton is total").minimize()
}
