//! Communicating finite-state machines.
//!
//! A [`Machine`] is a deterministic automaton whose transitions are labelled
//! with send (`!a`) or receive (`?a`) actions. Every state is *directed*: the
//! transitions leaving it are either all sends or all receives. Machines are
//! validated once and immutable afterwards, so the derived tables (input
//! trees, loop flags) are computed at construction time.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::input_tree::InputTree;

/// A state identifier. Ordering is lexicographic on the name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(Arc<str>);

impl StateId {
    pub fn new(name: impl AsRef<str>) -> Self {
        StateId(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for StateId {
    fn from(s: &str) -> Self {
        StateId::new(s)
    }
}

/// A message name from the (implicit) alphabet.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message(Arc<str>);

impl Message {
    pub fn new(name: impl AsRef<str>) -> Self {
        Message(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Message {
    fn from(s: &str) -> Self {
        Message::new(s)
    }
}

/// Direction of an action. `Receive` sorts before `Send`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Direction {
    Receive,
    Send,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Receive => Direction::Send,
            Direction::Send => Direction::Receive,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Direction::Receive => '?',
            Direction::Send => '!',
        }
    }
}

/// A send or receive action on a message.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub direction: Direction,
    pub message: Message,
}

impl Action {
    pub fn send(message: impl Into<Message>) -> Self {
        Action {
            direction: Direction::Send,
            message: message.into(),
        }
    }

    pub fn receive(message: impl Into<Message>) -> Self {
        Action {
            direction: Direction::Receive,
            message: message.into(),
        }
    }

    pub fn is_send(&self) -> bool {
        self.direction == Direction::Send
    }

    pub fn is_receive(&self) -> bool {
        self.direction == Direction::Receive
    }

    pub fn dual(&self) -> Action {
        Action {
            direction: self.direction.flip(),
            message: self.message.clone(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.direction.symbol(), self.message)
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An ordered sequence of actions, e.g. the labels along a path of the
/// simulation tree.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionSequence(pub Vec<Action>);

impl ActionSequence {
    pub fn new() -> Self {
        ActionSequence(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Action> {
        self.0.iter()
    }

    /// Messages of the send actions, in order.
    pub fn sends(&self) -> Vec<Message> {
        self.project(Direction::Send)
    }

    /// Messages of the receive actions, in order.
    pub fn receives(&self) -> Vec<Message> {
        self.project(Direction::Receive)
    }

    fn project(&self, direction: Direction) -> Vec<Message> {
        self.0
            .iter()
            .filter(|a| a.direction == direction)
            .map(|a| a.message.clone())
            .collect()
    }

    pub fn split_at(&self, mid: usize) -> (ActionSequence, ActionSequence) {
        let (l, r) = self.0.split_at(mid);
        (ActionSequence(l.to_vec()), ActionSequence(r.to_vec()))
    }
}

impl FromIterator<Action> for ActionSequence {
    fn from_iter<I: IntoIterator<Item = Action>>(iter: I) -> Self {
        ActionSequence(iter.into_iter().collect())
    }
}

impl fmt::Display for ActionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad action {0:?}; expected !msg or ?msg")]
pub struct ParseActionError(pub String);

impl std::str::FromStr for ActionSequence {
    type Err = ParseActionError;

    /// Accepts `!nd ?ko`, `!nd·?ko` and `ε`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(|c: char| c.is_whitespace() || c == '·')
            .filter(|t| !t.is_empty() && *t != "ε")
            .map(|t| match t.split_at(t.chars().next().map_or(0, char::len_utf8)) {
                ("!", m) if !m.is_empty() => Ok(Action::send(m)),
                ("?", m) if !m.is_empty() => Ok(Action::receive(m)),
                _ => Err(ParseActionError(t.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(ActionSequence)
    }
}

impl fmt::Debug for ActionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Classification of a validated state.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StateKind {
    Final,
    Sending,
    Receiving,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("state {0} has both send and receive transitions")]
    MixedState(StateId),
    #[error("state {0} has more than one {1} transition")]
    NondeterministicChoice(StateId, Action),
    #[error("state {0} is not declared")]
    UnknownState(StateId),
    #[error("machine has no states")]
    EmptyMachine,
}

/// An unvalidated machine description.
///
/// When `states` is `None` the state set is the initial state plus every
/// transition endpoint.
#[derive(Clone, Debug, Default)]
pub struct RawMachine {
    pub initial: Option<StateId>,
    pub states: Option<Vec<StateId>>,
    pub transitions: Vec<(StateId, Action, StateId)>,
}

impl RawMachine {
    pub fn new(initial: impl Into<StateId>) -> Self {
        RawMachine {
            initial: Some(initial.into()),
            states: None,
            transitions: Vec::new(),
        }
    }

    pub fn send(mut self, from: &str, msg: &str, to: &str) -> Self {
        self.transitions
            .push((from.into(), Action::send(msg), to.into()));
        self
    }

    pub fn receive(mut self, from: &str, msg: &str, to: &str) -> Self {
        self.transitions
            .push((from.into(), Action::receive(msg), to.into()));
        self
    }

    pub fn validate(self) -> Result<Machine, ValidationError> {
        Machine::from_raw(self)
    }
}

/// A validated, immutable communicating machine.
#[derive(Clone)]
pub struct Machine {
    initial: StateId,
    states: BTreeSet<StateId>,
    transitions: BTreeMap<StateId, BTreeMap<Action, StateId>>,
    in_trees: BTreeMap<StateId, Option<InputTree>>,
    send_loops: BTreeSet<StateId>,
    receive_loops: BTreeSet<StateId>,
}

impl PartialEq for Machine {
    fn eq(&self, other: &Self) -> bool {
        self.initial == other.initial
            && self.states == other.states
            && self.transitions == other.transitions
    }
}

impl Eq for Machine {}

impl fmt::Debug for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Machine")
            .field("initial", &self.initial)
            .field("transitions", &self.transitions)
            .finish()
    }
}

impl Machine {
    pub fn from_raw(raw: RawMachine) -> Result<Machine, ValidationError> {
        let initial = match raw.initial {
            Some(q) => q,
            None => match raw.transitions.first() {
                Some((q, _, _)) => q.clone(),
                None => return Err(ValidationError::EmptyMachine),
            },
        };

        let mut states: BTreeSet<StateId> = BTreeSet::new();
        let declared = raw.states.map(|s| s.into_iter().collect::<BTreeSet<_>>());
        match &declared {
            Some(decl) => {
                if decl.is_empty() {
                    return Err(ValidationError::EmptyMachine);
                }
                if !decl.contains(&initial) {
                    return Err(ValidationError::UnknownState(initial));
                }
                for (from, _, to) in &raw.transitions {
                    for q in [from, to] {
                        if !decl.contains(q) {
                            return Err(ValidationError::UnknownState(q.clone()));
                        }
                    }
                }
                states.extend(decl.iter().cloned());
            }
            None => {
                states.insert(initial.clone());
                for (from, _, to) in &raw.transitions {
                    states.insert(from.clone());
                    states.insert(to.clone());
                }
            }
        }

        let mut transitions: BTreeMap<StateId, BTreeMap<Action, StateId>> = BTreeMap::new();
        for (from, action, to) in raw.transitions {
            let row = transitions.entry(from.clone()).or_default();
            if let Some(existing) = row.get(&action) {
                if *existing != to {
                    return Err(ValidationError::NondeterministicChoice(from, action));
                }
                continue;
            }
            if let Some((other, _)) = row.iter().next() {
                if other.direction != action.direction {
                    return Err(ValidationError::MixedState(from));
                }
            }
            row.insert(action, to);
        }

        Ok(Machine::assemble(initial, states, transitions))
    }

    fn assemble(
        initial: StateId,
        states: BTreeSet<StateId>,
        transitions: BTreeMap<StateId, BTreeMap<Action, StateId>>,
    ) -> Machine {
        let mut m = Machine {
            initial,
            states,
            transitions,
            in_trees: BTreeMap::new(),
            send_loops: BTreeSet::new(),
            receive_loops: BTreeSet::new(),
        };
        m.send_loops = m.compute_loops(Direction::Send);
        m.receive_loops = m.compute_loops(Direction::Receive);
        let mut memo = BTreeMap::new();
        for q in m.states.iter() {
            m.compute_in_tree(q, &mut memo);
        }
        m.in_trees = memo;
        m
    }

    pub fn initial(&self) -> &StateId {
        &self.initial
    }

    pub fn states(&self) -> impl Iterator<Item = &StateId> {
        self.states.iter()
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn contains(&self, q: &StateId) -> bool {
        self.states.contains(q)
    }

    /// All transitions in (source, action) order.
    pub fn transitions(&self) -> impl Iterator<Item = (&StateId, &Action, &StateId)> {
        self.transitions
            .iter()
            .flat_map(|(from, row)| row.iter().map(move |(a, to)| (from, a, to)))
    }

    /// Outgoing transitions of `q`, ordered by action.
    pub fn outgoing(&self, q: &StateId) -> impl Iterator<Item = (&Action, &StateId)> {
        self.transitions.get(q).into_iter().flat_map(|row| row.iter())
    }

    pub fn successor(&self, q: &StateId, action: &Action) -> Option<&StateId> {
        self.transitions.get(q).and_then(|row| row.get(action))
    }

    pub fn kind(&self, q: &StateId) -> StateKind {
        match self.transitions.get(q).and_then(|row| row.keys().next()) {
            None => StateKind::Final,
            Some(a) if a.is_send() => StateKind::Sending,
            Some(_) => StateKind::Receiving,
        }
    }

    pub fn is_final(&self, q: &StateId) -> bool {
        self.kind(q) == StateKind::Final
    }

    /// Messages `q` can receive.
    pub fn in_set(&self, q: &StateId) -> BTreeSet<Message> {
        self.messages(q, Direction::Receive)
    }

    /// Messages `q` can send.
    pub fn out_set(&self, q: &StateId) -> BTreeSet<Message> {
        self.messages(q, Direction::Send)
    }

    fn messages(&self, q: &StateId, direction: Direction) -> BTreeSet<Message> {
        self.outgoing(q)
            .filter(|(a, _)| a.direction == direction)
            .map(|(a, _)| a.message.clone())
            .collect()
    }

    /// Union of all messages on transitions.
    pub fn alphabet(&self) -> BTreeSet<Message> {
        self.transitions().map(|(_, a, _)| a.message.clone()).collect()
    }

    /// Whether a cycle made only of `direction` actions is reachable from `q`
    /// through `direction` actions.
    pub fn loop_detect(&self, q: &StateId, direction: Direction) -> bool {
        match direction {
            Direction::Send => self.send_loops.contains(q),
            Direction::Receive => self.receive_loops.contains(q),
        }
    }

    /// The tree of receive sequences from `q` up to final or sending states;
    /// `None` when `q` reaches a receive-only cycle.
    pub fn in_tree(&self, q: &StateId) -> Option<&InputTree> {
        self.in_trees.get(q).and_then(|t| t.as_ref())
    }

    /// Swaps every send with the matching receive.
    pub fn dual(&self) -> Machine {
        let transitions = self
            .transitions
            .iter()
            .map(|(from, row)| {
                let row = row.iter().map(|(a, to)| (a.dual(), to.clone())).collect();
                (from.clone(), row)
            })
            .collect();
        Machine::assemble(self.initial.clone(), self.states.clone(), transitions)
    }

    fn step_targets<'a>(
        &'a self,
        q: &StateId,
        direction: Direction,
    ) -> impl Iterator<Item = &'a StateId> + 'a {
        self.transitions
            .get(q)
            .into_iter()
            .flat_map(|row| row.iter())
            .filter(move |(a, _)| a.direction == direction)
            .map(|(_, to)| to)
    }

    fn reachable(&self, from: &StateId, direction: Direction, strict: bool) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<StateId> = if strict {
            self.step_targets(from, direction).cloned().collect()
        } else {
            vec![from.clone()]
        };
        while let Some(q) = stack.pop() {
            if seen.insert(q.clone()) {
                stack.extend(self.step_targets(&q, direction).cloned());
            }
        }
        seen
    }

    fn compute_loops(&self, direction: Direction) -> BTreeSet<StateId> {
        let on_cycle: BTreeSet<StateId> = self
            .states
            .iter()
            .filter(|q| self.reachable(q, direction, true).contains(*q))
            .cloned()
            .collect();
        self.states
            .iter()
            .filter(|q| {
                self.reachable(q, direction, false)
                    .iter()
                    .any(|r| on_cycle.contains(r))
            })
            .cloned()
            .collect()
    }

    fn compute_in_tree(
        &self,
        q: &StateId,
        memo: &mut BTreeMap<StateId, Option<InputTree>>,
    ) -> Option<InputTree> {
        if let Some(t) = memo.get(q) {
            return t.clone();
        }
        // States on or leading to a ?-loop have no finite tree.
        if self.receive_loops.contains(q) {
            memo.insert(q.clone(), None);
            return None;
        }
        let receives: Vec<(Message, StateId)> = self
            .outgoing(q)
            .filter(|(a, _)| a.is_receive())
            .map(|(a, to)| (a.message.clone(), to.clone()))
            .collect();
        let tree = if receives.is_empty() {
            InputTree::leaf(q.clone())
        } else {
            let mut children = BTreeMap::new();
            for (msg, to) in receives {
                let sub = self
                    .compute_in_tree(&to, memo)
                    .expect("receive successors of a loop-free state are loop-free");
                children.insert(msg, sub);
            }
            InputTree::branch(children)
        };
        memo.insert(q.clone(), Some(tree.clone()));
        Some(tree)
    }
}
