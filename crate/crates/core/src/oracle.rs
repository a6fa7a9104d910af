//! Brute-force oracles used to corroborate verdicts on small inputs.
//!
//! [`bounded_fifo_safe`] runs two machines against each other over bounded
//! FIFO queues and looks for deadlocks and orphan messages.
//! [`bounded_sim_fail`] expands the raw simulation-step relation to a fixed
//! depth, without any stopping rule, and looks for a failing label.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::Rng;

use crate::input_tree::InputTree;
use crate::machine::{Action, ActionSequence, Direction, Machine, Message, RawMachine, StateId, StateKind};
use crate::simulation::{step, Failure, SimLabel, StepOutcome};
use crate::witness::{advance_states, min_acc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FifoResult {
    NoViolation,
    Deadlock(Vec<(Side, Action)>),
    Orphan(Vec<(Side, Action)>),
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Config {
    a: StateId,
    b: StateId,
    ab: VecDeque<Message>,
    ba: VecDeque<Message>,
}

fn trace(parents: &HashMap<Config, (Config, Side, Action)>, mut c: Config) -> Vec<(Side, Action)> {
    let mut out = Vec::new();
    while let Some((p, side, action)) = parents.get(&c) {
        out.push((*side, action.clone()));
        c = p.clone();
    }
    out.reverse();
    out
}

/// Breadth-first exploration of `A | B` with queues of length at most `k`
/// and at most `max_steps` steps.
pub fn bounded_fifo_safe(a: &Machine, b: &Machine, k: usize, max_steps: usize) -> FifoResult {
    let start = Config {
        a: a.initial().clone(),
        b: b.initial().clone(),
        ab: VecDeque::new(),
        ba: VecDeque::new(),
    };
    let mut parents: HashMap<Config, (Config, Side, Action)> = HashMap::new();
    let mut seen: HashMap<Config, ()> = HashMap::new();
    seen.insert(start.clone(), ());
    let mut frontier = VecDeque::from([(start, 0usize)]);
    while let Some((c, depth)) = frontier.pop_front() {
        let finals = a.is_final(&c.a) && b.is_final(&c.b);
        if finals {
            if !c.ab.is_empty() || !c.ba.is_empty() {
                return FifoResult::Orphan(trace(&parents, c));
            }
            continue;
        }
        let mut any_move = false;
        let mut next = Vec::new();
        for (side, machine, state) in [(Side::A, a, &c.a), (Side::B, b, &c.b)] {
            let (outq, inq) = match side {
                Side::A => (&c.ab, &c.ba),
                Side::B => (&c.ba, &c.ab),
            };
            for (action, target) in machine.outgoing(state) {
                let enabled = if action.is_send() {
                    any_move = true;
                    outq.len() < k
                } else {
                    let ok = inq.front() == Some(&action.message);
                    any_move |= ok;
                    ok
                };
                if !enabled {
                    continue;
                }
                let mut n = c.clone();
                let (nout, nin) = match side {
                    Side::A => {
                        n.a = target.clone();
                        (&mut n.ab, &mut n.ba)
                    }
                    Side::B => {
                        n.b = target.clone();
                        (&mut n.ba, &mut n.ab)
                    }
                };
                if action.is_send() {
                    nout.push_back(action.message.clone());
                } else {
                    nin.pop_front();
                }
                next.push((n, side, action.clone()));
            }
        }
        if !any_move {
            return FifoResult::Deadlock(trace(&parents, c));
        }
        if depth >= max_steps {
            continue;
        }
        for (n, side, action) in next {
            if seen.insert(n.clone(), ()).is_none() {
                parents.insert(n.clone(), (c.clone(), side, action));
                frontier.push_back((n, depth + 1));
            }
        }
    }
    FifoResult::NoViolation
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimSearch {
    FailureFound { path: ActionSequence, failure: Option<Failure> },
    NoneWithinDepth,
    /// The node budget ran out before the depth was covered.
    BudgetExhausted,
}

impl SimSearch {
    pub fn found(&self) -> bool {
        matches!(self, SimSearch::FailureFound { .. })
    }
}

/// Depth-bounded search for a failing label from the initial label.
pub fn bounded_sim_fail(m1: &Machine, m2: &Machine, depth: usize) -> SimSearch {
    bounded_sim_fail_from(m1, m2, &SimLabel::initial(m1, m2), depth, 2_000_000)
}

/// Depth-bounded search from `label`. `failure` is `None` when a
/// non-successful label has no successor at all.
pub fn bounded_sim_fail_from(
    m1: &Machine,
    m2: &Machine,
    label: &SimLabel,
    depth: usize,
    budget: usize,
) -> SimSearch {
    let mut best: HashMap<SimLabel, usize> = HashMap::new();
    let mut visits = 0usize;
    let mut stack = vec![(label.clone(), depth, Vec::<Action>::new())];
    while let Some((l, remaining, path)) = stack.pop() {
        if best.get(&l).is_some_and(|&r| r >= remaining) {
            continue;
        }
        best.insert(l.clone(), remaining);
        visits += 1;
        if visits > budget {
            return SimSearch::BudgetExhausted;
        }
        match step(m1, m2, &l) {
            StepOutcome::Success => {}
            StepOutcome::Failure(f) => {
                return SimSearch::FailureFound { path: ActionSequence(path), failure: Some(f) }
            }
            StepOutcome::Moves { successors, .. } => {
                if successors.is_empty() {
                    return SimSearch::FailureFound { path: ActionSequence(path), failure: None };
                }
                if remaining == 0 {
                    continue;
                }
                for (a, s) in successors.into_iter().rev() {
                    let mut p = path.clone();
                    p.push(a);
                    stack.push((s, remaining - 1, p));
                }
            }
        }
    }
    SimSearch::NoneWithinDepth
}

/// Deepest search depth tried by [`escalating_sim_fail`].
pub const MAX_ESCALATION_DEPTH: usize = 1 << 14;

/// Doubles the depth from 1 until a failure is found or
/// [`MAX_ESCALATION_DEPTH`] is exceeded.
pub fn escalating_sim_fail(m1: &Machine, m2: &Machine) -> SimSearch {
    let mut d = 1;
    loop {
        let r = bounded_sim_fail(m1, m2, d);
        if r.found() || d >= MAX_ESCALATION_DEPTH {
            return r;
        }
        d *= 2;
    }
}

/// A random valid machine over `messages` with at most `max_states` states.
/// Each state is final, sending or receiving; each non-final state gets a
/// non-empty set of distinct messages, so the result is deterministic and
/// non-mixed by construction.
pub fn random_machine(rng: &mut impl Rng, max_states: usize, messages: &[&str]) -> Machine {
    assert!(max_states >= 1 && !messages.is_empty());
    let n = rng.gen_range(1..=max_states);
    let mut raw = RawMachine::new("s0");
    for i in 0..n {
        let from = format!("s{i}");
        let kind = if i == 0 { rng.gen_range(1..3) } else { rng.gen_range(0..3) };
        if kind == 0 {
            continue;
        }
        let mut chosen: Vec<&str> = messages.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        if chosen.is_empty() {
            chosen.push(messages[rng.gen_range(0..messages.len())]);
        }
        for msg in chosen {
            let to = format!("s{}", rng.gen_range(0..n));
            raw = if kind == 1 { raw.send(&from, msg, &to) } else { raw.receive(&from, msg, &to) };
        }
    }
    raw.validate().expect("generator emits valid machines")
}

/// Adds, at some states of `direction`'s kind, one message that the state
/// does not yet offer.
fn widen(rng: &mut impl Rng, m: &Machine, direction: Direction, messages: &[&str]) -> Machine {
    let states: Vec<StateId> = m.states().cloned().collect();
    let mut raw = RawMachine {
        initial: Some(m.initial().clone()),
        states: None,
        transitions: m.transitions().map(|(f, a, t)| (f.clone(), a.clone(), t.clone())).collect(),
    };
    for q in &states {
        let offered = match direction {
            Direction::Send if m.kind(q) == StateKind::Sending => m.out_set(q),
            Direction::Receive if m.kind(q) == StateKind::Receiving => m.in_set(q),
            _ => continue,
        };
        let missing: Vec<&str> = messages.iter().copied().filter(|x| !offered.contains(&Message::new(x))).collect();
        if missing.is_empty() || !rng.gen_bool(0.5) {
            continue;
        }
        let msg = missing[rng.gen_range(0..missing.len())];
        let to = states[rng.gen_range(0..states.len())].clone();
        raw.transitions.push((q.clone(), Action { direction, message: Message::new(msg) }, to));
    }
    raw.validate().expect("widening keeps machines valid")
}

/// A random pair: independent machines, or a machine paired with a copy
/// offering extra sends (as supertype) or extra receives (as subtype).
pub fn random_pair(rng: &mut impl Rng, max_states: usize, messages: &[&str]) -> (Machine, Machine) {
    match rng.gen_range(0..3) {
        0 => (random_machine(rng, max_states, messages), random_machine(rng, max_states, messages)),
        1 => {
            let m1 = random_machine(rng, max_states, messages);
            let m2 = widen(rng, &m1, Direction::Send, messages);
            (m1, m2)
        }
        _ => {
            let m2 = random_machine(rng, max_states, messages);
            let m1 = widen(rng, &m2, Direction::Receive, messages);
            (m1, m2)
        }
    }
}

/// One randomized instance of the minAcc identities.
#[derive(Debug, Clone)]
pub struct MinAccInstance {
    pub machine: Machine,
    pub k: usize,
    /// A second bound, at least `k`.
    pub k_hi: usize,
    pub states: BTreeSet<StateId>,
    /// A superset of `states`.
    pub wider: BTreeSet<StateId>,
    pub psi: ActionSequence,
    /// Split point of `psi` for the composition identity.
    pub split: usize,
}

pub fn random_min_acc_instance(rng: &mut impl Rng) -> MinAccInstance {
    let messages = ["a", "b", "c"];
    let m = rng.gen_range(1..=3);
    let machine = random_machine(rng, 4, &messages[..m]);
    let all: Vec<StateId> = machine.states().cloned().collect();
    let mut states: BTreeSet<StateId> = all.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    if states.is_empty() {
        states.insert(all[rng.gen_range(0..all.len())].clone());
    }
    let mut wider = states.clone();
    wider.extend(all.iter().filter(|_| rng.gen_bool(0.5)).cloned());
    let len = rng.gen_range(0..=6);
    let psi = ActionSequence(
        (0..len)
            .map(|_| {
                let msg = messages[rng.gen_range(0..m)];
                if rng.gen_bool(0.6) { Action::send(msg) } else { Action::receive(msg) }
            })
            .collect(),
    );
    let k = rng.gen_range(0..=4);
    MinAccInstance {
        k_hi: k + rng.gen_range(0..=4),
        k,
        states,
        wider,
        split: rng.gen_range(0..=len),
        psi,
        machine,
    }
}

/// Outcome of checking the three minAcc identities on one instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MinAccCheck {
    /// Identities whose sides were all defined.
    pub checked: usize,
    pub violations: Vec<String>,
}

/// Shift invariance in `k`, composition over a split of `psi`, and
/// antitonicity in the state set.
pub fn check_min_acc_identities(inst: &MinAccInstance) -> MinAccCheck {
    let m = &inst.machine;
    let psi = &inst.psi.0;
    let mut out = MinAccCheck::default();
    let Some(base) = min_acc(m, inst.k, &inst.states, psi) else {
        return out;
    };
    if let Some(hi) = min_acc(m, inst.k_hi, &inst.states, psi) {
        out.checked += 1;
        if inst.k as i64 - base as i64 != inst.k_hi as i64 - hi as i64 {
            out.violations.push(format!("shift: minAcc({}) = {base}, minAcc({}) = {hi}", inst.k, inst.k_hi));
        }
    }
    let (head, tail) = psi.split_at(inst.split);
    let sends: Vec<_> = head.iter().filter(|a| a.is_send()).map(|a| a.message.clone()).collect();
    if let (Some(mid), Ok(next)) = (min_acc(m, inst.k, &inst.states, head), advance_states(m, &inst.states, &sends)) {
        if let Some(composed) = min_acc(m, mid, &next, tail) {
            out.checked += 1;
            if composed != base {
                out.violations.push(format!("composition at {}: {composed} vs {base}", inst.split));
            }
        }
    }
    if let Some(wide) = min_acc(m, inst.k, &inst.wider, psi) {
        out.checked += 1;
        if wide > base {
            out.violations.push(format!("antitone: wider set gives {wide} > {base}"));
        }
    }
    out
}

/// States of `t` that are reachable as leaves, with multiplicity.
pub fn leaf_histogram(t: &InputTree) -> BTreeMap<StateId, usize> {
    let mut out = BTreeMap::new();
    fn go(t: &InputTree, out: &mut BTreeMap<StateId, usize>) {
        match t {
            InputTree::Leaf(q) => *out.entry(q.clone()).or_default() += 1,
            InputTree::Branch(_) => t.children().expect("branch").values().for_each(|c| go(c, out)),
        }
    }
    go(t, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn m_s() -> Machine {
        RawMachine::new("q1")
            .receive("q1", "nd", "q2")
            .receive("q1", "pr", "q2")
            .send("q2", "ok", "q1")
            .send("q2", "ko", "q1")
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

    #[test]
    fn refined_client_with_server_is_safe() {
        assert_eq!(bounded_fifo_safe(&m_r(), &m_s(), 4, 10_000), FifoResult::NoViolation);
    }

    #[test]
    fn unconsumed_message_is_orphan() {
        let a = RawMachine::new("p0").send("p0", "a", "p1").validate().unwrap();
        let b = RawMachine::new("q0").validate().unwrap();
        assert!(matches!(bounded_fifo_safe(&a, &b, 2, 100), FifoResult::Orphan(_)));
    }

    #[test]
    fn mutual_wait_is_deadlock() {
        let a = RawMachine::new("p0").receive("p0", "a", "p1").validate().unwrap();
        let b = RawMachine::new("q0").receive("q0", "b", "q1").validate().unwrap();
        assert_eq!(bounded_fifo_safe(&a, &b, 2, 100), FifoResult::Deadlock(vec![]));
    }

    #[test]
    fn sim_fail_examples() {
        let f = RawMachine::new("e").validate().unwrap();
        assert_eq!(bounded_sim_fail(&f, &f, 10), SimSearch::NoneWithinDepth);
        let m_c = m_s().dual();
        assert_eq!(bounded_sim_fail(&m_r(), &m_c, 50), SimSearch::NoneWithinDepth);
        let r = bounded_sim_fail(&m_c, &m_r(), 5);
        assert!(matches!(r, SimSearch::FailureFound { ref path, .. } if path.is_empty()));
    }

    #[test]
    fn generator_is_seeded_and_valid() {
        let mut a = StdRng::seed_from_u64(7);
        let mut b = StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let x = random_machine(&mut a, 4, &["a", "b"]);
            let y = random_machine(&mut b, 4, &["a", "b"]);
            assert_eq!(x, y);
            assert!(x.state_count() <= 4);
        }
    }

    #[test]
    fn min_acc_identities_hold_on_sampled_instances() {
        let mut rng = StdRng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..300 {
            let r = check_min_acc_identities(&random_min_acc_instance(&mut rng));
            assert!(r.violations.is_empty(), "{:?}", r.violations);
            checked += r.checked;
        }
        assert!(checked > 100);
    }
}
