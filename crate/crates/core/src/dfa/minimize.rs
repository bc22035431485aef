//! Hopcroft partition refinement.

use super::Dfa;

pub(super) fn minimize(dfa: &Dfa) -> Dfa {
    let trimmed = dfa.canonical_numbering();
    let n = trimmed.num_states();
    let k = trimmed.alphabet().len();

    // inverse[a][q] = predecessors of q under a
    let mut inverse = vec![vec![Vec::new(); n]; k];
    for q in 0..n {
        for a in trimmed.alphabet().symbols() {
            inverse[a.index()][trimmed.next(q, a)].push(q);
        }
    }

    let mut block_of = vec![0usize; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let (acc, rej): (Vec<usize>, Vec<usize>) = (0..n).partition(|&q| trimmed.is_accepting(q));
    for part in [acc, rej] {
        if !part.is_empty() {
            let id = blocks.len();
            for &q in &part {
                block_of[q] = id;
            }
            blocks.push(part);
        }
    }

    let mut pending: Vec<(usize, usize)> = Vec::new();
    if blocks.len() == 2 {
        let smaller = if blocks[0].len() <= blocks[1].len() { 0 } else { 1 };
        for a in 0..k {
            pending.push((smaller, a));
        }
    }

    let mut marked = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut hits: Vec<Vec<usize>> = vec![Vec::new(); blocks.len()];

    while let Some((splitter, a)) = pending.pop() {
        // predecessors of the splitter under `a`
        for &q in &blocks[splitter] {
            for &p in &inverse[a][q] {
                if !marked[p] {
                    marked[p] = true;
                    let b = block_of[p];
                    if hits[b].is_empty() {
                        touched.push(b);
                    }
                    hits[b].push(p);
                }
            }
        }
        for b in touched.drain(..) {
            let inside = std::mem::take(&mut hits[b]);
            if inside.len() == blocks[b].len() {
                for &p in &inside {
                    marked[p] = false;
                }
                continue;
            }
            let outside: Vec<usize> = blocks[b].iter().copied().filter(|&q| !marked[q]).collect();
            for &p in &inside {
                marked[p] = false;
            }
            let new_id = blocks.len();
            // keep the larger half under the old id; the smaller half is
            // always a sufficient splitter, whether or not (b, c) was pending
            let (keep, moved) =
                if inside.len() >= outside.len() { (inside, outside) } else { (outside, inside) };
            for &q in &moved {
                block_of[q] = new_id;
            }
            blocks[b] = keep;
            blocks.push(moved);
            hits.push(Vec::new());
            for c in 0..k {
                pending.push((new_id, c));
            }
        }
    }

    let quotient = Dfa::from_fn(
        trimmed.alphabet().clone(),
        blocks.len(),
        block_of[trimmed.initial()],
        |b| trimmed.is_accepting(blocks[b][0]),
        |b, a| block_of[trimmed.next(blocks[b][0], a)],
    )
    .expect("quotient of a valid dfa is valid");
    quotient.canonical_numbering()
}
