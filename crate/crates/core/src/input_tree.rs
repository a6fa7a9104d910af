//! Input trees and input contexts.
//!
//! An [`InputTree`] records receive actions accumulated by the candidate
//! supertype, with supertype states at the leaves. An [`InputContext`] is the
//! same shape with numbered holes instead of states.
//!
//! Trees are immutable and share structure: branch nodes are reference
//! counted and carry a cached structural hash, height, minimal height and
//! leaf-state set. Accumulated contexts grow exponentially in width, and the
//! sharing keeps both memory and comparisons proportional to the number of
//! distinct subtrees.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::machine::{Message, StateId};

/// `q` or `<a_i: T_i>`; branch labels are distinct and unordered.
#[derive(Clone)]
pub enum InputTree {
    Leaf(StateId),
    Branch(Arc<BranchNode>),
}

pub struct BranchNode {
    children: BTreeMap<Message, InputTree>,
    hash: u64,
    height: usize,
    min_height: usize,
    leaves: BTreeSet<StateId>,
}

impl InputTree {
    pub fn leaf(q: impl Into<StateId>) -> InputTree {
        InputTree::Leaf(q.into())
    }

    /// Builds `<a_i: T_i>`.
    ///
    /// Panics if `children` is empty.
    pub fn branch(children: impl IntoIterator<Item = (Message, InputTree)>) -> InputTree {
        let children: BTreeMap<Message, InputTree> = children.into_iter().collect();
        assert!(!children.is_empty(), "input tree branch without children");
        let mut hasher = DefaultHasher::new();
        1u8.hash(&mut hasher);
        let mut height = 0;
        let mut min_height = usize::MAX;
        let mut leaves = BTreeSet::new();
        for (msg, child) in &children {
            msg.hash(&mut hasher);
            child.hash(&mut hasher);
            height = height.max(child.height() + 1);
            min_height = min_height.min(child.min_height() + 1);
            match child {
                InputTree::Leaf(q) => {
                    leaves.insert(q.clone());
                }
                InputTree::Branch(node) => leaves.extend(node.leaves.iter().cloned()),
            }
        }
        InputTree::Branch(Arc::new(BranchNode {
            children,
            hash: hasher.finish(),
            height,
            min_height,
            leaves,
        }))
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, InputTree::Leaf(_))
    }

    pub fn as_leaf(&self) -> Option<&StateId> {
        match self {
            InputTree::Leaf(q) => Some(q),
            InputTree::Branch(_) => None,
        }
    }

    pub fn children(&self) -> Option<&BTreeMap<Message, InputTree>> {
        match self {
            InputTree::Leaf(_) => None,
            InputTree::Branch(node) => Some(&node.children),
        }
    }

    /// Length of the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        match self {
            InputTree::Leaf(_) => 0,
            InputTree::Branch(node) => node.height,
        }
    }

    /// Length of the shortest root-to-leaf path.
    pub fn min_height(&self) -> usize {
        match self {
            InputTree::Leaf(_) => 0,
            InputTree::Branch(node) => node.min_height,
        }
    }

    /// The set of states at the leaves.
    pub fn leaf_states(&self) -> BTreeSet<StateId> {
        match self {
            InputTree::Leaf(q) => BTreeSet::from([q.clone()]),
            InputTree::Branch(node) => node.leaves.clone(),
        }
    }

    pub fn leaf_states_subset_of(&self, other: &InputTree) -> bool {
        match (self, other) {
            (InputTree::Leaf(q), _) => other.contains_leaf(q),
            (InputTree::Branch(a), InputTree::Branch(b)) => a.leaves.is_subset(&b.leaves),
            (InputTree::Branch(a), InputTree::Leaf(q)) => a.leaves.len() == 1 && a.leaves.contains(q),
        }
    }

    pub fn contains_leaf(&self, q: &StateId) -> bool {
        match self {
            InputTree::Leaf(p) => p == q,
            InputTree::Branch(node) => node.leaves.contains(q),
        }
    }

    /// Follows `word` from the root. `None` if a label is missing or a leaf
    /// is reached before the word is consumed.
    pub fn extract(&self, word: &[Message]) -> Option<&InputTree> {
        let mut cur = self;
        for msg in word {
            cur = cur.children()?.get(msg)?;
        }
        Some(cur)
    }

    /// Replaces every leaf `q` with `f(q)`; `f` is called once per distinct
    /// state and shared subtrees stay shared.
    pub fn substitute(&self, mut f: impl FnMut(&StateId) -> InputTree) -> InputTree {
        let mut by_state: HashMap<StateId, InputTree> = HashMap::new();
        let mut by_node: HashMap<*const BranchNode, InputTree> = HashMap::new();
        self.substitute_rec(&mut f, &mut by_state, &mut by_node)
    }

    fn substitute_rec(
        &self,
        f: &mut impl FnMut(&StateId) -> InputTree,
        by_state: &mut HashMap<StateId, InputTree>,
        by_node: &mut HashMap<*const BranchNode, InputTree>,
    ) -> InputTree {
        match self {
            InputTree::Leaf(q) => by_state.entry(q.clone()).or_insert_with(|| f(q)).clone(),
            InputTree::Branch(node) => {
                let key = Arc::as_ptr(node);
                if let Some(t) = by_node.get(&key) {
                    return t.clone();
                }
                let children: Vec<(Message, InputTree)> = node
                    .children
                    .iter()
                    .map(|(m, c)| (m.clone(), c.substitute_rec(f, by_state, by_node)))
                    .collect();
                let t = InputTree::branch(children);
                by_node.insert(key, t.clone());
                t
            }
        }
    }

    /// Fallible variant of [`InputTree::substitute`].
    pub fn try_substitute<E>(
        &self,
        mut f: impl FnMut(&StateId) -> Result<InputTree, E>,
    ) -> Result<InputTree, E> {
        let mut resolved: HashMap<StateId, InputTree> = HashMap::new();
        for q in self.leaf_states() {
            let t = f(&q)?;
            resolved.insert(q, t);
        }
        Ok(self.substitute(|q| resolved[q].clone()))
    }

    /// Canonical decomposition into a context and a hole assignment. Holes
    /// are numbered from 1 in depth-first order, branches visited by label.
    pub fn split(&self) -> (InputContext, BTreeMap<HoleId, StateId>) {
        let mut assignment = BTreeMap::new();
        let mut next = 1;
        let ctx = self.split_rec(&mut next, &mut assignment);
        (ctx, assignment)
    }

    fn split_rec(&self, next: &mut u32, assignment: &mut BTreeMap<HoleId, StateId>) -> InputContext {
        match self {
            InputTree::Leaf(q) => {
                let id = HoleId(*next);
                *next += 1;
                assignment.insert(id, q.clone());
                InputContext::Hole(id)
            }
            InputTree::Branch(node) => InputContext::Branch(
                node.children
                    .iter()
                    .map(|(m, c)| (m.clone(), c.split_rec(next, assignment)))
                    .collect(),
            ),
        }
    }

    /// Number of leaves counted with multiplicity.
    pub fn leaf_count(&self) -> u128 {
        fn count(t: &InputTree, memo: &mut HashMap<*const BranchNode, u128>) -> u128 {
            match t {
                InputTree::Leaf(_) => 1,
                InputTree::Branch(node) => {
                    let key = Arc::as_ptr(node);
                    if let Some(n) = memo.get(&key) {
                        return *n;
                    }
                    let n = node
                        .children
                        .values()
                        .map(|c| count(c, memo))
                        .fold(0u128, |a, b| a.saturating_add(b));
                    memo.insert(key, n);
                    n
                }
            }
        }
        count(self, &mut HashMap::new())
    }
}

impl PartialEq for InputTree {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (InputTree::Leaf(a), InputTree::Leaf(b)) => a == b,
            (InputTree::Branch(a), InputTree::Branch(b)) => {
                Arc::ptr_eq(a, b)
                    || (a.hash == b.hash
                        && a.height == b.height
                        && a.min_height == b.min_height
                        && a.children == b.children)
            }
            _ => false,
        }
    }
}

impl Eq for InputTree {}

impl Hash for InputTree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            InputTree::Leaf(q) => {
                0u8.hash(state);
                q.hash(state);
            }
            InputTree::Branch(node) => {
                1u8.hash(state);
                node.hash.hash(state);
            }
        }
    }
}

impl fmt::Display for InputTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputTree::Leaf(q) => write!(f, "{q}"),
            InputTree::Branch(node) => {
                f.write_str("<")?;
                for (i, (m, c)) in node.children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{m}: {c}")?;
                }
                f.write_str(">")
            }
        }
    }
}

impl fmt::Debug for InputTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HoleId(pub u32);

impl fmt::Display for HoleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FillError {
    #[error("no filler for hole {0}")]
    MissingHole(HoleId),
    #[error("hole {0} occurs more than once")]
    DuplicateHole(HoleId),
}

/// `[ ]_j` or `<a_i: A_i>`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum InputContext {
    Hole(HoleId),
    Branch(BTreeMap<Message, InputContext>),
}

impl InputContext {
    pub fn hole(i: u32) -> InputContext {
        InputContext::Hole(HoleId(i))
    }

    /// Panics if `children` is empty.
    pub fn branch(children: impl IntoIterator<Item = (Message, InputContext)>) -> InputContext {
        let children: BTreeMap<_, _> = children.into_iter().collect();
        assert!(!children.is_empty(), "input context branch without children");
        InputContext::Branch(children)
    }

    pub fn is_hole(&self) -> bool {
        matches!(self, InputContext::Hole(_))
    }

    /// Hole indices in depth-first order.
    pub fn holes(&self) -> Vec<HoleId> {
        let mut out = Vec::new();
        self.visit_holes(0, &mut |h, _| out.push(h));
        out
    }

    /// Whether all hole indices are pairwise distinct.
    pub fn has_distinct_holes(&self) -> bool {
        let holes = self.holes();
        let set: BTreeSet<_> = holes.iter().collect();
        set.len() == holes.len()
    }

    fn visit_holes(&self, depth: usize, f: &mut impl FnMut(HoleId, usize)) {
        match self {
            InputContext::Hole(h) => f(*h, depth),
            InputContext::Branch(children) => {
                for c in children.values() {
                    c.visit_holes(depth + 1, f);
                }
            }
        }
    }

    /// Length of the path from the root to hole `i`.
    pub fn height_of(&self, i: HoleId) -> Option<usize> {
        let mut found = None;
        self.visit_holes(0, &mut |h, d| {
            if h == i && found.is_none() {
                found = Some(d);
            }
        });
        found
    }

    /// Smallest root-to-hole path length.
    pub fn min_height(&self) -> usize {
        match self {
            InputContext::Hole(_) => 0,
            InputContext::Branch(children) => {
                1 + children.values().map(|c| c.min_height()).min().unwrap_or(0)
            }
        }
    }

    /// Follows `word` from the root; `None` when a label is missing or a hole
    /// is reached before the word is consumed.
    pub fn extract(&self, word: &[Message]) -> Option<&InputContext> {
        let mut cur = self;
        for msg in word {
            match cur {
                InputContext::Hole(_) => return None,
                InputContext::Branch(children) => cur = children.get(msg)?,
            }
        }
        Some(cur)
    }

    /// `A[T_i]`: replaces each hole with an input tree.
    pub fn fill_trees(&self, assignment: &BTreeMap<HoleId, InputTree>) -> Result<InputTree, FillError> {
        match self {
            InputContext::Hole(h) => assignment.get(h).cloned().ok_or(FillError::MissingHole(*h)),
            InputContext::Branch(children) => {
                let mut out = Vec::with_capacity(children.len());
                for (m, c) in children {
                    out.push((m.clone(), c.fill_trees(assignment)?));
                }
                Ok(InputTree::branch(out))
            }
        }
    }

    /// `A[A_i]`: replaces each hole with an input context. The result must
    /// keep hole indices distinct.
    pub fn fill_contexts(
        &self,
        assignment: &BTreeMap<HoleId, InputContext>,
    ) -> Result<InputContext, FillError> {
        let out = self.fill_contexts_rec(assignment)?;
        let mut seen = BTreeSet::new();
        for h in out.holes() {
            if !seen.insert(h) {
                return Err(FillError::DuplicateHole(h));
            }
        }
        Ok(out)
    }

    fn fill_contexts_rec(
        &self,
        assignment: &BTreeMap<HoleId, InputContext>,
    ) -> Result<InputContext, FillError> {
        match self {
            InputContext::Hole(h) => assignment.get(h).cloned().ok_or(FillError::MissingHole(*h)),
            InputContext::Branch(children) => {
                let mut out = BTreeMap::new();
                for (m, c) in children {
                    out.insert(m.clone(), c.fill_contexts_rec(assignment)?);
                }
                Ok(InputContext::Branch(out))
            }
        }
    }
}

impl fmt::Display for InputContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputContext::Hole(h) => write!(f, "[ ]{h}"),
            InputContext::Branch(children) => {
                f.write_str("<")?;
                for (i, (m, c)) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{m}: {c}")?;
                }
                f.write_str(">")
            }
        }
    }
}

impl fmt::Debug for InputContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> Message {
        Message::new(s)
    }

    fn leaf(s: &str) -> InputTree {
        InputTree::leaf(StateId::new(s))
    }

    #[test]
    fn split_single_leaf() {
        let (ctx, asg) = leaf("q1").split();
        assert_eq!(ctx, InputContext::hole(1));
        assert_eq!(asg, BTreeMap::from([(HoleId(1), StateId::new("q1"))]));
    }

    #[test]
    fn split_numbers_holes_by_label() {
        let t = InputTree::branch([(m("ok"), leaf("q1")), (m("ko"), leaf("q1"))]);
        let (ctx, asg) = t.split();
        assert_eq!(
            ctx,
            InputContext::branch([(m("ko"), InputContext::hole(1)), (m("ok"), InputContext::hole(2))])
        );
        assert_eq!(asg.len(), 2);
        assert!(asg.values().all(|q| q.as_str() == "q1"));
    }

    #[test]
    fn split_then_fill_is_identity() {
        let t = InputTree::branch([(m("ok"), leaf("q2")), (m("ko"), leaf("q2"))]);
        let (ctx, asg) = t.split();
        assert_eq!(asg.len(), 2);
        assert!(asg.values().all(|q| q.as_str() == "q2"));
        let trees = asg.into_iter().map(|(h, q)| (h, InputTree::leaf(q))).collect();
        assert_eq!(ctx.fill_trees(&trees).unwrap(), t);
    }

    #[test]
    fn fill_hole_with_tree() {
        let sub = InputTree::branch([(m("a"), leaf("q"))]);
        let filled = InputContext::hole(1)
            .fill_trees(&BTreeMap::from([(HoleId(1), sub.clone())]))
            .unwrap();
        assert_eq!(filled, sub);
    }

    #[test]
    fn fill_context_into_context() {
        let a = InputContext::branch([(m("a"), InputContext::hole(1))]);
        let inner = InputContext::branch([(m("b"), InputContext::hole(2))]);
        let filled = a.fill_contexts(&BTreeMap::from([(HoleId(1), inner.clone())])).unwrap();
        assert_eq!(filled, InputContext::branch([(m("a"), inner)]));
    }

    #[test]
    fn fill_reports_missing_and_duplicate_holes() {
        let a = InputContext::branch([(m("a"), InputContext::hole(1)), (m("b"), InputContext::hole(2))]);
        assert_eq!(
            a.fill_trees(&BTreeMap::from([(HoleId(1), leaf("q"))])),
            Err(FillError::MissingHole(HoleId(2)))
        );
        let same = InputContext::hole(7);
        assert_eq!(
            a.fill_contexts(&BTreeMap::from([(HoleId(1), same.clone()), (HoleId(2), same)])),
            Err(FillError::DuplicateHole(HoleId(7)))
        );
    }

    #[test]
    fn extract_clauses() {
        let a = InputContext::branch([(m("ok"), InputContext::hole(1)), (m("ko"), InputContext::hole(2))]);
        assert_eq!(a.extract(&[]), Some(&a));
        assert_eq!(a.extract(&[m("ok")]), Some(&InputContext::hole(1)));
        let only_ok = InputContext::branch([(m("ok"), InputContext::hole(1))]);
        assert_eq!(only_ok.extract(&[m("ko")]), None);
        assert_eq!(only_ok.extract(&[m("ok"), m("ok")]), None);
    }

    #[test]
    fn min_height_examples() {
        assert_eq!(InputContext::hole(1).min_height(), 0);
        let a = InputContext::branch([
            (m("ok"), InputContext::hole(1)),
            (
                m("ko"),
                InputContext::branch([(m("ok"), InputContext::hole(2)), (m("ko"), InputContext::hole(3))]),
            ),
        ]);
        assert_eq!(a.min_height(), 1);
        assert_eq!(a.height_of(HoleId(3)), Some(2));
        assert_eq!(a.height_of(HoleId(9)), None);
    }

    #[test]
    fn tree_metadata_is_cached_consistently() {
        let inner = InputTree::branch([(m("ok"), leaf("q2")), (m("ko"), leaf("q3"))]);
        let t = InputTree::branch([(m("ok"), inner.clone()), (m("ko"), leaf("q1"))]);
        assert_eq!(t.height(), 2);
        assert_eq!(t.min_height(), 1);
        assert_eq!(t.leaf_states().len(), 3);
        assert_eq!(t.leaf_count(), 3);
        assert_eq!(t.to_string(), "<ko: q1, ok: <ko: q3, ok: q2>>");
        assert_eq!(t.extract(&[m("ok")]), Some(&inner));
        assert_eq!(t.extract(&[m("ko"), m("ok")]), None);
    }

    #[test]
    fn substitution_preserves_sharing() {
        let shared = InputTree::branch([(m("a"), leaf("q")), (m("b"), leaf("q"))]);
        let t = InputTree::branch([(m("a"), shared.clone()), (m("b"), shared)]);
        let mut calls = 0;
        let out = t.substitute(|_| {
            calls += 1;
            leaf("r")
        });
        assert_eq!(calls, 1);
        assert_eq!(out.leaf_count(), 4);
        match &out {
            InputTree::Branch(node) => {
                let a = &node.children[&m("a")];
                let b = &node.children[&m("b")];
                match (a, b) {
                    (InputTree::Branch(x), InputTree::Branch(y)) => assert!(Arc::ptr_eq(x, y)),
                    _ => panic!("expected branches"),
                }
            }
            _ => panic!("expected branch"),
        }
    }

    #[test]
    fn equality_ignores_construction_order() {
        let a = InputTree::branch([(m("x"), leaf("p")), (m("y"), leaf("q"))]);
        let b = InputTree::branch([(m("y"), leaf("q")), (m("x"), leaf("p"))]);
        assert_eq!(a, b);
        let c = InputTree::branch([(m("y"), leaf("p")), (m("x"), leaf("q"))]);
        assert_ne!(a, c);
    }
}
