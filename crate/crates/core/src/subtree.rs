//! Finite subtrees of a simulation tree, the ancestor map, and extraction of
//! candidate subtrees.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::simulation::{NodeId, NodeStatus, SimTree};

/// A root `r` together with a boundary `B`; members are the nodes between.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSubtree {
    pub root: NodeId,
    pub boundary: BTreeSet<NodeId>,
    members: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubtreeError {
    #[error("boundary node {0} is not below the root")]
    Unreachable(NodeId),
    #[error("boundary node {1} is below boundary node {0}")]
    NestedBoundary(NodeId, NodeId),
    #[error("branch through {0} ends without meeting the boundary")]
    OpenBranch(NodeId),
    #[error("anc({0}) is not a proper ancestor inside the subtree")]
    AncNotAbove(NodeId),
    #[error("anc({0}) has a different subtype state")]
    AncStateMismatch(NodeId),
    #[error("leaf states of {0} escape those of anc({0})")]
    AncLeavesEscape(NodeId),
    #[error("boundary node {0} has no ancestor")]
    AncMissing(NodeId),
}

impl FiniteSubtree {
    /// The subtree rooted at `root` cut at `boundary`, checked against the
    /// finite-subtree conditions.
    pub fn new(tree: &SimTree, root: NodeId, boundary: BTreeSet<NodeId>) -> Result<Self, SubtreeError> {
        for &b in &boundary {
            if !tree.is_ancestor(root, b) {
                return Err(SubtreeError::Unreachable(b));
            }
            for &c in &boundary {
                if b != c && tree.is_ancestor(b, c) {
                    return Err(SubtreeError::NestedBoundary(b, c));
                }
            }
        }
        let mut members = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            members.push(id);
            if boundary.contains(&id) {
                continue;
            }
            let children = &tree.node(id).children;
            if children.is_empty() {
                return Err(SubtreeError::OpenBranch(id));
            }
            stack.extend(children.values().rev().copied());
        }
        Ok(FiniteSubtree { root, boundary, members })
    }

    /// Nodes of the subtree in preorder, boundary included.
    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn interior(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.members.iter().copied().filter(|n| !self.boundary.contains(n))
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.members.contains(&n)
    }
}

/// A finite subtree whose boundary nodes each map to a similar ancestor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSubtree {
    pub subtree: FiniteSubtree,
    pub anc: BTreeMap<NodeId, NodeId>,
}

impl CandidateSubtree {
    pub fn new(
        tree: &SimTree,
        subtree: FiniteSubtree,
        anc: BTreeMap<NodeId, NodeId>,
    ) -> Result<Self, SubtreeError> {
        for &b in &subtree.boundary {
            let Some(&a) = anc.get(&b) else {
                return Err(SubtreeError::AncMissing(b));
            };
            if a == b || !tree.is_ancestor(a, b) || !tree.is_ancestor(subtree.root, a) {
                return Err(SubtreeError::AncNotAbove(b));
            }
            let (lb, la) = (tree.label(b), tree.label(a));
            if lb.sub_state != la.sub_state {
                return Err(SubtreeError::AncStateMismatch(b));
            }
            if !lb.sup_tree.leaf_states_subset_of(&la.sup_tree) {
                return Err(SubtreeError::AncLeavesEscape(b));
            }
        }
        Ok(CandidateSubtree { subtree, anc })
    }

    pub fn root(&self) -> NodeId {
        self.subtree.root
    }

    pub fn boundary(&self) -> &BTreeSet<NodeId> {
        &self.subtree.boundary
    }

    /// `img(anc)`.
    pub fn ancestors(&self) -> BTreeSet<NodeId> {
        self.anc.values().copied().collect()
    }

    /// Boundary nodes are replaced by their ancestor, interior nodes kept.
    pub fn tr(&self, n: NodeId) -> NodeId {
        self.anc.get(&n).copied().unwrap_or(n)
    }
}

/// `anc` for every boundary node of the tree.
pub fn assign_ancestors(tree: &SimTree) -> BTreeMap<NodeId, NodeId> {
    tree.nodes()
        .filter_map(|n| n.status.anc().map(|a| (n.id, a)))
        .collect()
}

/// Why extraction could not produce candidates covering everything.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Leftovers {
    None,
    /// A successful leaf lies inside an extracted subtree.
    SuccessfulLeafBelowAncestor(NodeId),
    /// A boundary node inside a candidate maps to an ancestor above its root.
    AncestorOutsideCandidate { boundary: NodeId, anc: NodeId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    /// Ancestors mapped to by some boundary node with a different label.
    pub p: BTreeSet<NodeId>,
    pub candidates: Vec<CandidateSubtree>,
    pub leftovers: Leftovers,
}

/// Roots are the minimal ancestors reached by a boundary node with a
/// different label; each candidate takes the boundary nodes below its root.
pub fn extract_candidates(tree: &SimTree, anc: &BTreeMap<NodeId, NodeId>) -> Extraction {
    let p: BTreeSet<NodeId> = anc
        .iter()
        .filter(|(b, a)| tree.label(**b) != tree.label(**a))
        .map(|(_, a)| *a)
        .collect();
    let roots: Vec<NodeId> = p
        .iter()
        .copied()
        .filter(|&r| !p.iter().any(|&o| o != r && tree.is_ancestor(o, r)))
        .collect();
    let mut candidates = Vec::new();
    let mut leftovers = Leftovers::None;
    for r in roots {
        let below = tree.descendants(r);
        if let Some(&s) = below
            .iter()
            .find(|&&n| *tree.status(n) == NodeStatus::SuccessfulLeaf)
        {
            if leftovers == Leftovers::None {
                leftovers = Leftovers::SuccessfulLeafBelowAncestor(s);
            }
            continue;
        }
        let boundary: BTreeSet<NodeId> = below
            .iter()
            .copied()
            .filter(|n| tree.status(*n).is_boundary())
            .collect();
        if let Some(&b) = boundary.iter().find(|&&b| !tree.is_ancestor(r, anc[&b])) {
            if leftovers == Leftovers::None {
                leftovers = Leftovers::AncestorOutsideCandidate { boundary: b, anc: anc[&b] };
            }
            continue;
        }
        let local: BTreeMap<NodeId, NodeId> = boundary.iter().map(|b| (*b, anc[b])).collect();
        let subtree = FiniteSubtree::new(tree, r, boundary).expect("boundary cuts every branch");
        let cand = CandidateSubtree::new(tree, subtree, local).expect("anc satisfies candidate conditions");
        candidates.push(cand);
    }
    Extraction { p, candidates, leftovers }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{Action, Machine, RawMachine};
    use crate::simulation::{build, BuildLimits, BuildOutcome};

    fn m_c() -> Machine {
        RawMachine::new("q1")
            .send("q1", "nd", "q2")
            .send("q1", "pr", "q2")
            .receive("q2", "ok", "q1")
            .receive("q2", "ko", "q1")
            .validate()
            .unwrap()
    }

    fn m_r() -> Machine {
        RawMachine::new("q1")
            .send("q1", "nd", "q2")
            .receive("q2", "ok", "q1")
            .receive("q2", "ko", "q3")
            .send("q3", "pr", "q1")
            .validate()
            .unwrap()
    }

    fn node(tree: &SimTree, path: &str) -> NodeId {
        let actions: Vec<Action> = path
            .split_whitespace()
            .map(|t| match t.split_at(1) {
                ("!", m) => Action::send(m),
                (_, m) => Action::receive(m),
            })
            .collect();
        tree.follow(&actions).unwrap()
    }

    #[test]
    fn running_example_candidate() {
        let (tree, outcome) = build(&m_r(), &m_c(), BuildLimits::default());
        assert_eq!(outcome, BuildOutcome::AllStopped);
        let anc = assign_ancestors(&tree);
        assert_eq!(anc.len(), 5);
        let ex = extract_candidates(&tree, &anc);
        let n8 = node(&tree, "!nd ?ko !pr !nd ?ko !pr");
        let n12 = node(&tree, "!nd ?ko !pr !nd ?ko !pr !nd ?ko !pr");
        assert_eq!(ex.p, BTreeSet::from([n8]));
        assert_eq!(anc[&node(&tree, "!nd ?ko !pr !nd ?ko !pr !nd ?ko !pr !nd ?ok")], n12);
        assert_eq!(ex.leftovers, Leftovers::None);
        assert_eq!(ex.candidates.len(), 1);
        let c = &ex.candidates[0];
        assert_eq!(c.root(), n8);
        let expected: BTreeSet<NodeId> = [
            "!nd ?ko !pr !nd ?ko !pr !nd ?ok",
            "!nd ?ko !pr !nd ?ko !pr !nd ?ko !pr !nd ?ok",
            "!nd ?ko !pr !nd ?ko !pr !nd ?ko !pr !nd ?ko !pr",
        ]
        .iter()
        .map(|s| node(&tree, s))
        .collect();
        assert_eq!(*c.boundary(), expected);
        assert_eq!(c.subtree.members().len(), 9);
    }

    #[test]
    fn only_a_success_gives_empty_map() {
        let f = RawMachine::new("e").validate().unwrap();
        let (tree, _) = build(&f, &f, BuildLimits::default());
        assert!(assign_ancestors(&tree).is_empty());
    }

    #[test]
    fn self_loop_maps_to_root_without_candidates() {
        let m = RawMachine::new("q1").send("q1", "a", "q1").validate().unwrap();
        let (tree, _) = build(&m, &m, BuildLimits::default());
        let anc = assign_ancestors(&tree);
        assert_eq!(anc, BTreeMap::from([(NodeId(1), NodeId(0))]));
        let ex = extract_candidates(&tree, &anc);
        assert!(ex.p.is_empty());
        assert!(ex.candidates.is_empty());
    }

    #[test]
    fn finite_subtree_conditions() {
        let (tree, _) = build(&m_r(), &m_c(), BuildLimits::default());
        let root = tree.root();
        let n1 = node(&tree, "!nd");
        let n2 = node(&tree, "!nd ?ok");
        assert_eq!(
            FiniteSubtree::new(&tree, n2, BTreeSet::from([n1])),
            Err(SubtreeError::Unreachable(n1))
        );
        assert_eq!(
            FiniteSubtree::new(&tree, root, BTreeSet::from([n1, n2])),
            Err(SubtreeError::NestedBoundary(n1, n2))
        );
        assert!(FiniteSubtree::new(&tree, root, BTreeSet::from([n1])).is_ok());
    }
}
