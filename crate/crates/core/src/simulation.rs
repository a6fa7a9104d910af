//! The simulation-step relation and bounded construction of the simulation
//! tree.
//!
//! A label `p ≤ T` pairs a state `p` of the candidate subtype with an input
//! tree `T` over states of the candidate supertype. [`step`] computes every
//! successor of a label, and [`build`] expands the tree depth-first until
//! every branch ends in a leaf, repeats an ancestor label, or exhibits the
//! growth pattern that makes it safe to stop.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::input_tree::InputTree;
use crate::machine::{Action, ActionSequence, Direction, Machine, Message, StateId, StateKind};

/// `p ≤ T`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SimLabel {
    pub sub_state: StateId,
    pub sup_tree: InputTree,
}

impl SimLabel {
    pub fn new(sub_state: StateId, sup_tree: InputTree) -> Self {
        SimLabel { sub_state, sup_tree }
    }

    pub fn initial(m1: &Machine, m2: &Machine) -> Self {
        SimLabel::new(m1.initial().clone(), InputTree::Leaf(m2.initial().clone()))
    }
}

impl fmt::Display for SimLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ≤ {}", self.sub_state, self.sup_tree)
    }
}

impl fmt::Debug for SimLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Why a label has no successor.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Failure {
    #[error("subtype state is final but the supertype tree is not a final leaf")]
    FinalMismatch,
    #[error("subtype is final-or-sending where the supertype expects input, or vice versa")]
    DirectionMismatch,
    #[error("supertype input {0} is not accepted by the subtype")]
    InputNotCovered(Message),
    #[error("subtype output {0} is not offered by the supertype")]
    OutputNotAllowed(Message),
    #[error("subtype can loop on sends while inputs are pending")]
    SendLoopWithAccumulation,
    #[error("input tree of supertype state {0} is undefined")]
    InTreeUndefined(StateId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    In,
    Out,
    InCtx,
    OutAcc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Success,
    Failure(Failure),
    Moves {
        rule: Rule,
        successors: BTreeMap<Action, SimLabel>,
    },
}

/// All successors of `label`.
pub fn step(m1: &Machine, m2: &Machine, label: &SimLabel) -> StepOutcome {
    let p = &label.sub_state;
    let tree = &label.sup_tree;
    match m1.kind(p) {
        StateKind::Final => match tree {
            InputTree::Leaf(q) if m2.is_final(q) => StepOutcome::Success,
            _ => StepOutcome::Failure(Failure::FinalMismatch),
        },
        StateKind::Receiving => {
            let accepted = m1.in_set(p);
            match tree {
                InputTree::Leaf(q) => {
                    if m2.kind(q) != StateKind::Receiving {
                        return StepOutcome::Failure(Failure::DirectionMismatch);
                    }
                    let mut successors = BTreeMap::new();
                    for (action, q2) in m2.outgoing(q) {
                        if !accepted.contains(&action.message) {
                            return StepOutcome::Failure(Failure::InputNotCovered(
                                action.message.clone(),
                            ));
                        }
                        let p2 = m1.successor(p, action).expect("checked above");
                        successors.insert(
                            action.clone(),
                            SimLabel::new(p2.clone(), InputTree::Leaf(q2.clone())),
                        );
                    }
                    StepOutcome::Moves { rule: Rule::In, successors }
                }
                InputTree::Branch(_) => {
                    let children = tree.children().expect("branch");
                    let mut successors = BTreeMap::new();
                    for (msg, sub) in children {
                        let action = Action::receive(msg.clone());
                        let Some(p2) = m1.successor(p, &action) else {
                            return StepOutcome::Failure(Failure::InputNotCovered(msg.clone()));
                        };
                        successors.insert(action, SimLabel::new(p2.clone(), sub.clone()));
                    }
                    StepOutcome::Moves { rule: Rule::InCtx, successors }
                }
            }
        }
        StateKind::Sending => {
            if let InputTree::Leaf(q) = tree {
                match m2.kind(q) {
                    StateKind::Sending => return out_rule(m1, m2, p, q),
                    StateKind::Final => {
                        let first = m1.out_set(p).into_iter().next().expect("sending state");
                        return StepOutcome::Failure(Failure::OutputNotAllowed(first));
                    }
                    StateKind::Receiving => {}
                }
            }
            out_acc_rule(m1, m2, p, tree)
        }
    }
}

fn out_rule(m1: &Machine, m2: &Machine, p: &StateId, q: &StateId) -> StepOutcome {
    let mut successors = BTreeMap::new();
    for (action, p2) in m1.outgoing(p) {
        let Some(q2) = m2.successor(q, action) else {
            return StepOutcome::Failure(Failure::OutputNotAllowed(action.message.clone()));
        };
        successors.insert(
            action.clone(),
            SimLabel::new(p2.clone(), InputTree::Leaf(q2.clone())),
        );
    }
    StepOutcome::Moves { rule: Rule::Out, successors }
}

fn out_acc_rule(m1: &Machine, m2: &Machine, p: &StateId, tree: &InputTree) -> StepOutcome {
    if m1.loop_detect(p, Direction::Send) {
        return StepOutcome::Failure(Failure::SendLoopWithAccumulation);
    }
    let outputs = m1.out_set(p);
    for q in tree.leaf_states() {
        let Some(in_tree) = m2.in_tree(&q) else {
            return StepOutcome::Failure(Failure::InTreeUndefined(q));
        };
        for leaf in in_tree.leaf_states() {
            let offered = m2.out_set(&leaf);
            if let Some(missing) = outputs.iter().find(|a| !offered.contains(*a)) {
                return StepOutcome::Failure(Failure::OutputNotAllowed(missing.clone()));
            }
        }
    }
    let mut successors = BTreeMap::new();
    for (action, p2) in m1.outgoing(p) {
        let word = [action.message.clone()];
        let next = tree
            .try_substitute(|q| acc_tree(m2, q, &word).ok_or(()))
            .expect("in trees and outputs checked above");
        successors.insert(action.clone(), SimLabel::new(p2.clone(), next));
    }
    StepOutcome::Moves { rule: Rule::OutAcc, successors }
}

/// The input tree accumulated when `q` anticipates the sends in `word`.
pub fn acc_tree(m2: &Machine, q: &StateId, word: &[Message]) -> Option<InputTree> {
    let Some((first, rest)) = word.split_first() else {
        return Some(InputTree::Leaf(q.clone()));
    };
    let action = Action::send(first.clone());
    m2.in_tree(q)?.try_substitute(|leaf| {
        let next = m2.successor(leaf, &action).ok_or(())?;
        acc_tree(m2, next, rest).ok_or(())
    })
    .ok()
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeStatus {
    Interior,
    SuccessfulLeaf,
    FailureLeaf(Failure),
    /// Same label as the ancestor `anc`.
    LabelRepeat { anc: NodeId },
    /// Stopped by the growth condition on ancestors `anc_i →ψ anc_j`.
    Growth { anc_i: NodeId, anc_j: NodeId },
    /// Not yet expanded when a limit was reached.
    Unexpanded,
}

impl NodeStatus {
    pub fn is_boundary(&self) -> bool {
        matches!(self, NodeStatus::LabelRepeat { .. } | NodeStatus::Growth { .. })
    }

    /// The ancestor a boundary node is mapped to.
    pub fn anc(&self) -> Option<NodeId> {
        match self {
            NodeStatus::LabelRepeat { anc } => Some(*anc),
            NodeStatus::Growth { anc_i, .. } => Some(*anc_i),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimNode {
    pub id: NodeId,
    pub label: SimLabel,
    pub parent: Option<(NodeId, Action)>,
    pub children: BTreeMap<Action, NodeId>,
    pub status: NodeStatus,
    /// Number of edges from the root.
    pub depth: usize,
}

#[derive(Debug, Clone)]
pub struct SimTree {
    nodes: Vec<SimNode>,
}

impl SimTree {
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &SimNode {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &SimNode> {
        self.nodes.iter()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn label(&self, id: NodeId) -> &SimLabel {
        &self.node(id).label
    }

    pub fn status(&self, id: NodeId) -> &NodeStatus {
        &self.node(id).status
    }

    pub fn boundary(&self) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.status.is_boundary())
            .map(|n| n.id)
            .collect()
    }

    /// The node reached from the root by following `actions`.
    pub fn follow(&self, actions: &[Action]) -> Option<NodeId> {
        let mut cur = self.root();
        for a in actions {
            cur = *self.node(cur).children.get(a)?;
        }
        Some(cur)
    }

    /// Nodes from the root down to `id`, inclusive.
    pub fn path(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = vec![id];
        let mut cur = id;
        while let Some((parent, _)) = &self.node(cur).parent {
            out.push(*parent);
            cur = *parent;
        }
        out.reverse();
        out
    }

    /// `r` and every node below it, in preorder.
    pub fn descendants(&self, r: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![r];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.node(id).children.values().rev().copied());
        }
        out
    }

    /// Whether `a` lies on the root path of `b` (a node is its own ancestor).
    pub fn is_ancestor(&self, a: NodeId, b: NodeId) -> bool {
        let da = self.node(a).depth;
        let mut cur = b;
        while self.node(cur).depth > da {
            cur = self.node(cur).parent.as_ref().expect("non-root").0;
        }
        cur == a
    }

    /// The actions labelling the path from `from` down to `to`.
    pub fn actions_between(&self, from: NodeId, to: NodeId) -> Option<ActionSequence> {
        let mut actions = Vec::new();
        let mut cur = to;
        while cur != from {
            let (parent, action) = self.node(cur).parent.as_ref()?;
            actions.push(action.clone());
            cur = *parent;
        }
        actions.reverse();
        Some(ActionSequence(actions))
    }

    /// Deepest node depth counted in levels (the root alone has one level).
    pub fn levels(&self) -> usize {
        self.nodes.iter().map(|n| n.depth + 1).max().unwrap_or(0)
    }

    /// Largest input-context height appearing in any label.
    pub fn max_context_depth(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.label.sup_tree.height())
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildLimits {
    pub max_nodes: usize,
    pub max_depth: usize,
}

impl Default for BuildLimits {
    fn default() -> Self {
        BuildLimits {
            max_nodes: 1_000_000,
            max_depth: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildOutcome {
    FailureFound(NodeId),
    AllStopped,
    LimitHit,
}

struct Builder<'a> {
    m1: &'a Machine,
    nodes: Vec<SimNode>,
    path: Vec<NodeId>,
    on_path: HashMap<SimLabel, NodeId>,
}

impl Builder<'_> {
    fn push_node(&mut self, label: SimLabel, parent: Option<(NodeId, Action)>, depth: usize) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(SimNode {
            id,
            label,
            parent,
            children: BTreeMap::new(),
            status: NodeStatus::Unexpanded,
            depth,
        });
        id
    }

    fn enter(&mut self, id: NodeId) {
        self.path.push(id);
        self.on_path.insert(self.nodes[id.0].label.clone(), id);
    }

    fn leave(&mut self) {
        let id = self.path.pop().expect("non-empty path");
        self.on_path.remove(&self.nodes[id.0].label);
    }

    /// Stop status for a fresh child of the last node on the path.
    fn stop_status(&self, label: &SimLabel) -> Option<NodeStatus> {
        if let Some(anc) = self.on_path.get(label) {
            return Some(NodeStatus::LabelRepeat { anc: *anc });
        }
        if self.m1.kind(&label.sub_state) != StateKind::Sending {
            return None;
        }
        let same: Vec<usize> = self
            .path
            .iter()
            .enumerate()
            .filter(|(_, id)| self.nodes[id.0].label.sub_state == label.sub_state)
            .map(|(i, _)| i)
            .collect();
        for (x, &i) in same.iter().enumerate() {
            let ti = &self.nodes[self.path[i].0].label.sup_tree;
            if !label.sup_tree.leaf_states_subset_of(ti) {
                continue;
            }
            for &j in &same[x + 1..] {
                let tj = &self.nodes[self.path[j].0].label.sup_tree;
                if !tj.leaf_states_subset_of(ti) {
                    continue;
                }
                let received: Vec<Message> = self.path[i + 1..=j]
                    .iter()
                    .filter_map(|id| self.nodes[id.0].parent.as_ref())
                    .filter(|(_, a)| a.is_receive())
                    .map(|(_, a)| a.message.clone())
                    .collect();
                if growth_condition(ti, &label.sup_tree, &received) {
                    return Some(NodeStatus::Growth {
                        anc_i: self.path[i],
                        anc_j: self.path[j],
                    });
                }
            }
        }
        None
    }
}

/// Clauses (i) and (ii) of the growth condition on the contexts of `n_i`
/// and `n_k`, with `received` the receives along `n_i →ψ n_j`.
pub fn growth_condition(ti: &InputTree, tk: &InputTree, received: &[Message]) -> bool {
    for cut in 0..=received.len() {
        let w1 = &received[..cut];
        let both_holes = matches!(
            (ti.extract(w1), tk.extract(w1)),
            (Some(a), Some(b)) if a.is_leaf() && b.is_leaf()
        );
        if both_holes {
            return true;
        }
    }
    match (ti.extract(received), tk.extract(received)) {
        (Some(a), Some(b)) => a.min_height() <= b.min_height(),
        _ => false,
    }
}

/// Depth-first construction of the finite simulation tree.
pub fn build(m1: &Machine, m2: &Machine, limits: BuildLimits) -> (SimTree, BuildOutcome) {
    let mut b = Builder {
        m1,
        nodes: Vec::new(),
        path: Vec::new(),
        on_path: HashMap::new(),
    };
    let root = b.push_node(SimLabel::initial(m1, m2), None, 0);
    // Each frame is a node on the current path and its next child index.
    let mut stack: Vec<(NodeId, usize)> = Vec::new();
    let mut todo = Some(root);
    let outcome = loop {
        if let Some(id) = todo.take() {
            match step(m1, m2, &b.nodes[id.0].label) {
                StepOutcome::Success => b.nodes[id.0].status = NodeStatus::SuccessfulLeaf,
                StepOutcome::Failure(f) => {
                    b.nodes[id.0].status = NodeStatus::FailureLeaf(f);
                    break BuildOutcome::FailureFound(id);
                }
                StepOutcome::Moves { successors, .. } => {
                    let depth = b.nodes[id.0].depth + 1;
                    if depth > limits.max_depth
                        || b.nodes.len() + successors.len() > limits.max_nodes
                    {
                        break BuildOutcome::LimitHit;
                    }
                    b.nodes[id.0].status = NodeStatus::Interior;
                    b.enter(id);
                    for (action, label) in successors {
                        let status = b.stop_status(&label);
                        let child = b.push_node(label, Some((id, action.clone())), depth);
                        if let Some(s) = status {
                            b.nodes[child.0].status = s;
                        }
                        b.nodes[id.0].children.insert(action, child);
                    }
                    stack.push((id, 0));
                }
            }
        }
        let Some((id, next)) = stack.last_mut() else {
            break BuildOutcome::AllStopped;
        };
        let children: Vec<NodeId> = b.nodes[id.0].children.values().copied().collect();
        match children.get(*next) {
            Some(&child) => {
                *next += 1;
                if b.nodes[child.0].status == NodeStatus::Unexpanded {
                    todo = Some(child);
                }
            }
            None => {
                stack.pop();
                b.leave();
            }
        }
    };
    (SimTree { nodes: b.nodes }, outcome)
}
