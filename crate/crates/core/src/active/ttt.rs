//! Discrimination trees and the TTT-family learner built on them.

use std::collections::{HashSet, VecDeque};

use crate::active::decompose::{decompose, Breakpoint, Decomposition, HypothesisView};
use crate::active::{ActiveLearner, Conflict, Recorder, RefinementFailure, RefinementReport};
use crate::dfa::Dfa;
use crate::error::OracleError;
use crate::oracle::MembershipOracle;
use crate::word::{Alphabet, Symbol, Word};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DtNode {
    Inner {
        discriminator: Word,
        /// Indexed by the membership answer: `[false-child, true-child]`.
        children: [Option<NodeId>; 2],
        parent: Option<NodeId>,
    },
    Leaf {
        state: usize,
        access: Word,
        parent: Option<NodeId>,
    },
}

/// Where sifting stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiftResult {
    Leaf(NodeId),
    /// The branch taken at `parent` has no subtree yet.
    Vacant { parent: NodeId, side: bool },
}

/// Binary tree with discriminators at inner nodes and hypothesis states at
/// the leaves. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscriminationTree {
    nodes: Vec<DtNode>,
}

impl DiscriminationTree {
    /// A tree whose root separates words by `discriminator` and has no
    /// children yet.
    pub fn new(discriminator: Word) -> Self {
        DiscriminationTree {
            nodes: vec![DtNode::Inner { discriminator, children: [None, None], parent: None }],
        }
    }

    /// Wraps nodes laid out with the root at index 0 and consistent parent
    /// links.
    pub(crate) fn from_nodes(nodes: Vec<DtNode>) -> Self {
        debug_assert!(!nodes.is_empty() && matches!(&nodes[0], DtNode::Inner { parent: None, .. } | DtNode::Leaf { parent: None, .. }));
        DiscriminationTree { nodes }
    }

    /// A tree holding one leaf and nothing else.
    pub fn single_leaf(state: usize, access: Word) -> Self {
        DiscriminationTree { nodes: vec![DtNode::Leaf { state, access, parent: None }] }
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &DtNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        match &self.nodes[id] {
            DtNode::Inner { parent, .. } | DtNode::Leaf { parent, .. } => *parent,
        }
    }

    fn set_parent(&mut self, id: NodeId, p: Option<NodeId>) {
        match &mut self.nodes[id] {
            DtNode::Inner { parent, .. } | DtNode::Leaf { parent, .. } => *parent = p,
        }
    }

    pub fn discriminator(&self, id: NodeId) -> Option<&Word> {
        match &self.nodes[id] {
            DtNode::Inner { discriminator, .. } => Some(discriminator),
            DtNode::Leaf { .. } => None,
        }
    }

    pub fn children(&self, id: NodeId) -> [Option<NodeId>; 2] {
        match &self.nodes[id] {
            DtNode::Inner { children, .. } => *children,
            DtNode::Leaf { .. } => [None, None],
        }
    }

    pub fn child(&self, id: NodeId, side: bool) -> Option<NodeId> {
        self.children(id)[side as usize]
    }

    /// Which branch of its parent `id` hangs on.
    pub fn side(&self, id: NodeId) -> Option<bool> {
        let p = self.parent(id)?;
        Some(self.child(p, true) == Some(id))
    }

    /// The state stored at a leaf.
    pub fn state(&self, id: NodeId) -> Option<usize> {
        match &self.nodes[id] {
            DtNode::Leaf { state, .. } => Some(*state),
            DtNode::Inner { .. } => None,
        }
    }

    pub fn access(&self, id: NodeId) -> Option<&Word> {
        match &self.nodes[id] {
            DtNode::Leaf { access, .. } => Some(access),
            DtNode::Inner { .. } => None,
        }
    }

    /// Path from `id` up to the root, `id` first.
    pub fn ancestors(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path
    }

    pub fn lca(&self, a: NodeId, b: NodeId) -> NodeId {
        let up: HashSet<NodeId> = self.ancestors(a).into_iter().collect();
        self.ancestors(b).into_iter().find(|n| up.contains(n)).unwrap_or(self.root())
    }

    /// Leaves below `id`, false branch before true branch.
    pub fn leaves_under(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            match &self.nodes[n] {
                DtNode::Leaf { .. } => out.push(n),
                DtNode::Inner { children, .. } => {
                    stack.extend(children.iter().rev().flatten());
                }
            }
        }
        out
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.leaves_under(self.root())
    }

    /// Descends from `start`, asking `word · d` at each discriminator `d`.
    pub fn sift_from(
        &self,
        start: NodeId,
        word: &Word,
        mq: &mut dyn MembershipOracle,
    ) -> Result<SiftResult, OracleError> {
        let mut cur = start;
        loop {
            match &self.nodes[cur] {
                DtNode::Leaf { .. } => return Ok(SiftResult::Leaf(cur)),
                DtNode::Inner { discriminator, children, .. } => {
                    let side = mq.query(&word.concat(discriminator))?;
                    match children[side as usize] {
                        Some(c) => cur = c,
                        None => return Ok(SiftResult::Vacant { parent: cur, side }),
                    }
                }
            }
        }
    }

    pub fn sift(&self, word: &Word, mq: &mut dyn MembershipOracle) -> Result<SiftResult, OracleError> {
        self.sift_from(self.root(), word, mq)
    }

    /// Hangs a new leaf on a vacant branch.
    pub fn add_leaf(&mut self, parent: NodeId, side: bool, state: usize, access: Word) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(DtNode::Leaf { state, access, parent: Some(parent) });
        match &mut self.nodes[parent] {
            DtNode::Inner { children, .. } => {
                assert!(children[side as usize].is_none(), "branch already occupied");
                children[side as usize] = Some(id);
            }
            DtNode::Leaf { .. } => panic!("cannot hang a leaf under a leaf"),
        }
        id
    }

    /// Replaces `leaf` by an inner node with `discriminator`; `leaf` moves to
    /// branch `leaf_side` and a new leaf takes the other branch. Returns
    /// `(inner, new_leaf)`.
    pub fn split_leaf(
        &mut self,
        leaf: NodeId,
        discriminator: Word,
        leaf_side: bool,
        state: usize,
        access: Word,
    ) -> (NodeId, NodeId) {
        let parent = self.parent(leaf);
        let inner = self.nodes.len();
        let fresh = inner + 1;
        let mut children = [None, None];
        children[leaf_side as usize] = Some(leaf);
        children[!leaf_side as usize] = Some(fresh);
        self.nodes.push(DtNode::Inner { discriminator, children, parent });
        self.nodes.push(DtNode::Leaf { state, access, parent: Some(inner) });
        if let Some(p) = parent {
            if let DtNode::Inner { children, .. } = &mut self.nodes[p] {
                for c in children.iter_mut() {
                    if *c == Some(leaf) {
                        *c = Some(inner);
                    }
                }
            }
        } else {
            // the leaf was the root: swap so the root stays at index 0
            self.nodes.swap(leaf, inner);
            let (leaf, inner) = (inner, leaf);
            if let DtNode::Inner { children, .. } = &mut self.nodes[inner] {
                children[leaf_side as usize] = Some(leaf);
            }
            self.set_parent(leaf, Some(inner));
            self.set_parent(fresh, Some(inner));
            return (inner, fresh);
        }
        self.set_parent(leaf, Some(inner));
        (inner, fresh)
    }

    fn set_discriminator(&mut self, id: NodeId, d: Word) {
        if let DtNode::Inner { discriminator, .. } = &mut self.nodes[id] {
            *discriminator = d;
        }
    }

    /// Branch direction taken at the root on the way to `id`.
    pub fn root_side(&self, id: NodeId) -> Option<bool> {
        let path = self.ancestors(id);
        let below_root = *path.iter().rev().nth(1)?;
        self.side(below_root)
    }
}

/// Discrimination-tree learner with Rivest–Schapire counterexample
/// analysis and an optional discriminator-shortening pass.
#[derive(Debug, Clone)]
pub struct TttLearner {
    alphabet: Alphabet,
    tree: DiscriminationTree,
    leaf: Vec<NodeId>,
    access: Vec<Word>,
    access_set: HashSet<Word>,
    accepting: Vec<bool>,
    trans: Vec<usize>,
    finalize: bool,
}

impl TttLearner {
    pub fn new(alphabet: Alphabet) -> Self {
        TttLearner {
            alphabet,
            tree: DiscriminationTree::new(Word::empty()),
            leaf: Vec::new(),
            access: Vec::new(),
            access_set: HashSet::new(),
            accepting: Vec::new(),
            trans: Vec::new(),
            finalize: false,
        }
    }

    /// Enables the discriminator-shortening pass after each refinement.
    pub fn with_finalization(mut self, on: bool) -> Self {
        self.finalize = on;
        self
    }

    pub fn tree(&self) -> &DiscriminationTree {
        &self.tree
    }

    pub fn access_word(&self, q: usize) -> &Word {
        &self.access[q]
    }

    fn k(&self) -> usize {
        self.alphabet.len()
    }

    fn push_state(&mut self, access: Word, leaf: NodeId) -> usize {
        let q = self.access.len();
        self.access_set.insert(access.clone());
        self.access.push(access);
        self.leaf.push(leaf);
        self.accepting.push(false);
        self.trans.extend(std::iter::repeat_n(usize::MAX, self.k()));
        q
    }

    fn state_at(&self, leaf: NodeId) -> usize {
        self.tree.state(leaf).expect("sift ends at a leaf")
    }

    /// Sifts from the root, creating a state on a vacant branch. The second
    /// value is true when a state was created.
    fn sift_or_create(
        &mut self,
        word: &Word,
        mq: &mut dyn MembershipOracle,
    ) -> Result<(usize, bool), OracleError> {
        match self.tree.sift(word, mq)? {
            SiftResult::Leaf(l) => Ok((self.state_at(l), false)),
            SiftResult::Vacant { parent, side } => {
                let q = self.access.len();
                let leaf = self.tree.add_leaf(parent, side, q, word.clone());
                self.push_state(word.clone(), leaf);
                self.accepting[q] = self.tree.root_side(leaf).unwrap_or(side);
                Ok((q, true))
            }
        }
    }

    /// Fills every undefined transition of the states in `pending`, adding
    /// states as sifting discovers them.
    fn close(&mut self, mut pending: VecDeque<usize>, mq: &mut dyn MembershipOracle) -> Result<(), OracleError> {
        let k = self.k();
        while let Some(q) = pending.pop_front() {
            for a in 0..k {
                let w = self.access[q].append(Symbol(a as u8));
                let (t, created) = self.sift_or_create(&w, mq)?;
                self.trans[q * k + a] = t;
                if created {
                    pending.push_back(t);
                }
            }
        }
        Ok(())
    }

    fn init_inner(&mut self, mq: &mut dyn MembershipOracle) -> Result<(), OracleError> {
        let (q0, _) = self.sift_or_create(&Word::empty(), mq)?;
        self.close(VecDeque::from([q0]), mq)
    }

    /// One Rivest–Schapire split. Returns a conflict when the answers do not
    /// support it.
    fn split(&mut self, bp: Breakpoint, mq: &mut dyn MembershipOracle) -> Result<Option<Conflict>, OracleError> {
        let k = self.k();
        let Breakpoint { source, a, v, target } = bp;
        let new_access = self.access[source].append(a);
        let target_leaf = self.leaf[target];
        if self.access_set.contains(&new_access) {
            let cached = mq.query(&new_access.concat(&v))?;
            return Ok(Some(Conflict { word: new_access.concat(&v), cached, required: !cached }));
        }
        if self.tree.ancestors(target_leaf).iter().any(|&n| self.tree.discriminator(n) == Some(&v)) {
            let cached = mq.query(&new_access.concat(&v))?;
            return Ok(Some(Conflict { word: new_access.concat(&v), cached, required: !cached }));
        }
        let old_side = mq.query(&self.access[target].concat(&v))?;
        let new_side = mq.query(&new_access.concat(&v))?;
        if old_side == new_side {
            return Ok(Some(Conflict { word: new_access.concat(&v), cached: new_side, required: !old_side }));
        }
        let q = self.access.len();
        let (inner, fresh) = self.tree.split_leaf(target_leaf, v.clone(), old_side, q, new_access.clone());
        self.leaf[target] = self.tree.child(inner, old_side).expect("old leaf");
        self.push_state(new_access, fresh);
        self.accepting[q] = self.accepting[target];
        let sources: Vec<usize> = (0..q * k).filter(|&i| self.trans[i] == target).collect();
        for i in sources {
            let w = self.access[i / k].append(Symbol((i % k) as u8)).concat(&v);
            if mq.query(&w)? == new_side {
                self.trans[i] = q;
            }
        }
        self.close(VecDeque::from([q]), mq)?;
        Ok(None)
    }

    /// Replaces each discriminator by a shorter word `b · d` (with `d` a
    /// discriminator already in the tree) when it splits the node's leaves
    /// the same way, then re-sifts every transition.
    fn finalize_discriminators(&mut self, mq: &mut dyn MembershipOracle) -> Result<(), OracleError> {
        let inner: Vec<NodeId> = (0..self.tree.len()).filter(|&n| self.tree.discriminator(n).is_some()).collect();
        let mut pool: Vec<Word> = inner.iter().filter_map(|&n| self.tree.discriminator(n).cloned()).collect();
        pool.sort_by(|x, y| x.shortlex_cmp(y));
        pool.dedup();
        let mut changed = false;
        for &n in &inner {
            let current = self.tree.discriminator(n).cloned().expect("inner node");
            let mut expected = Vec::new();
            for side in [false, true] {
                if let Some(c) = self.tree.child(n, side) {
                    for l in self.tree.leaves_under(c) {
                        expected.push((self.tree.access(l).cloned().expect("leaf"), side));
                    }
                }
            }
            let mut candidates: Vec<Word> = pool
                .iter()
                .flat_map(|d| self.alphabet.symbols().map(move |b| Word::from(vec![b]).concat(d)))
                .filter(|c| c.len() < current.len())
                .collect();
            candidates.sort_by(|x, y| x.shortlex_cmp(y));
            candidates.dedup();
            for cand in candidates {
                let mut ok = true;
                for (u, side) in &expected {
                    if mq.query(&u.concat(&cand))? != *side {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    self.tree.set_discriminator(n, cand);
                    changed = true;
                    break;
                }
            }
        }
        if changed {
            let k = self.k();
            for i in 0..self.trans.len() {
                let w = self.access[i / k].append(Symbol((i % k) as u8));
                let (t, created) = self.sift_or_create(&w, mq)?;
                self.trans[i] = t;
                if created {
                    self.close(VecDeque::from([t]), mq)?;
                }
            }
        }
        Ok(())
    }

    fn refine_inner(&mut self, ce: &Word, label: bool, mq: &mut dyn MembershipOracle) -> Result<Option<Conflict>, OracleError> {
        while self.classify(ce) != label {
            match decompose(self, ce, label, mq)? {
                Decomposition::Conflict(c) => return Ok(Some(c)),
                Decomposition::Break(bp) => {
                    if let Some(c) = self.split(bp, mq)? {
                        return Ok(Some(c));
                    }
                }
            }
        }
        if self.finalize {
            self.finalize_discriminators(mq)?;
            if self.classify(ce) != label {
                return self.refine_inner(ce, label, mq);
            }
        }
        Ok(None)
    }
}

impl HypothesisView for TttLearner {
    fn initial(&self) -> usize {
        0
    }

    fn successor(&self, q: usize, a: Symbol) -> usize {
        self.trans[q * self.k() + a.index()]
    }

    fn access(&self, q: usize) -> &Word {
        &self.access[q]
    }
}

impl ActiveLearner for TttLearner {
    fn initialize(&mut self, mq: &mut dyn MembershipOracle) -> Result<(), OracleError> {
        let mut fresh = TttLearner::new(self.alphabet.clone()).with_finalization(self.finalize);
        fresh.init_inner(mq)?;
        *self = fresh;
        Ok(())
    }

    fn hypothesis(&self) -> Dfa {
        if self.access.is_empty() {
            return Dfa::constant(self.alphabet.clone(), false);
        }
        Dfa::new(self.alphabet.clone(), 0, self.accepting.clone(), self.trans.clone())
            .expect("closed hypothesis is total")
    }

    fn state_count(&self) -> usize {
        self.access.len()
    }

    fn classify(&self, word: &Word) -> bool {
        if self.access.is_empty() {
            return false;
        }
        let q = word.iter().fold(0, |q, &a| self.successor(q, a));
        self.accepting[q]
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
