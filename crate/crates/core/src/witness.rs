//! Witness subtrees: the `minAcc` bound, the structural conditions on a
//! candidate, the two systems of input tree equations, and the coinductive
//! compatibility check between them.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::input_tree::InputTree;
use crate::machine::{Action, Machine, Message, StateId};
use crate::simulation::{acc_tree, NodeId, SimTree};
use crate::subtree::CandidateSubtree;

/// Variables of both equation systems share one namespace; the two systems
/// never use the same variant, so their variable sets are disjoint.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X0,
    X(StateId, NodeId),
    Y(NodeId),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X0 => f.write_str("X0"),
            Var::X(q, n) => write!(f, "X[{q},{n}]"),
            Var::Y(n) => write!(f, "Y[{n}]"),
        }
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Var(Var),
    InputChoice(BTreeMap<Message, Expr>),
    SilentChoice(BTreeSet<Expr>),
}

impl Expr {
    /// Replaces the leaves of `tree` using `leaf`.
    fn from_tree(tree: &InputTree, leaf: &mut impl FnMut(&StateId) -> Option<Expr>) -> Option<Expr> {
        match tree {
            InputTree::Leaf(q) => leaf(q),
            InputTree::Branch(_) => {
                let mut out = BTreeMap::new();
                for (m, c) in tree.children().expect("branch") {
                    out.insert(m.clone(), Expr::from_tree(c, leaf)?);
                }
                Some(Expr::InputChoice(out))
            }
        }
    }

    /// Variables occurring in the expression.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::InputChoice(m) => m.values().for_each(|e| e.collect_vars(out)),
            Expr::SilentChoice(s) => s.iter().for_each(|e| e.collect_vars(out)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "{v}"),
            Expr::InputChoice(m) => {
                f.write_str("<")?;
                for (i, (a, e)) in m.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}: {e}")?;
                }
                f.write_str(">")
            }
            Expr::SilentChoice(s) => {
                f.write_str("+{")?;
                for (i, e) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A system of input tree equations restricted to variables reachable from
/// `start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSystem {
    pub start: Var,
    pub defs: BTreeMap<Var, Expr>,
}

impl EquationSystem {
    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.defs.keys()
    }

    pub fn def(&self, v: &Var) -> &Expr {
        &self.defs[v]
    }

    /// Every variable used is defined and the start variable exists.
    pub fn is_closed(&self) -> bool {
        self.defs.contains_key(&self.start)
            && self
                .defs
                .values()
                .all(|e| e.vars().iter().all(|v| self.defs.contains_key(v)))
    }

    /// Applies `f` to every variable, keeping the structure.
    pub fn rename(&self, f: impl Fn(&Var) -> Var) -> EquationSystem {
        fn go(e: &Expr, f: &impl Fn(&Var) -> Var) -> Expr {
            match e {
                Expr::Var(v) => Expr::Var(f(v)),
                Expr::InputChoice(m) => {
                    Expr::InputChoice(m.iter().map(|(a, e)| (a.clone(), go(e, f))).collect())
                }
                Expr::SilentChoice(s) => Expr::SilentChoice(s.iter().map(|e| go(e, f)).collect()),
            }
        }
        EquationSystem {
            start: f(&self.start),
            defs: self.defs.iter().map(|(v, e)| (f(v), go(e, &f))).collect(),
        }
    }
}

impl fmt::Display for EquationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (v, e) in &self.defs {
            writeln!(f, "{v} = {e}")?;
        }
        Ok(())
    }
}

/// Why a candidate is not a witness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NotWitness {
    #[error("path from {anc} to boundary node {boundary} has no receive")]
    NoReceiveOnAncPath { boundary: NodeId, anc: NodeId },
    #[error("supertype state {state} cannot anticipate the sends from {from} to {to}")]
    AccTreeUndefined { from: NodeId, to: NodeId, state: StateId },
    #[error("accumulation of {state} from {from} escapes the leaves of {to}")]
    LeafSetEscapes { from: NodeId, to: NodeId, state: StateId },
    #[error("accumulation shrinks from {from} to {to}: minHeight {min_height}, minAcc {min_acc:?}")]
    MinAccDecreases {
        from: NodeId,
        to: NodeId,
        min_height: usize,
        min_acc: Option<usize>,
    },
    #[error("equation systems are incompatible at ({left}, {right})")]
    Incompatible { left: Expr, right: Expr },
}

/// Lower bound on the accumulated receive depth after `psi`, starting from
/// depth `k` over supertype states `states`.
pub fn min_acc(m2: &Machine, k: usize, states: &BTreeSet<StateId>, psi: &[Action]) -> Option<usize> {
    let mut k = k;
    let mut states = states.clone();
    for action in psi {
        if action.is_receive() {
            k = k.checked_sub(1)?;
            continue;
        }
        let word = [action.message.clone()];
        let mut w = usize::MAX;
        let mut next = BTreeSet::new();
        for q in &states {
            let t = acc_tree(m2, q, &word)?;
            w = w.min(t.min_height());
            next.extend(t.leaf_states());
        }
        if states.is_empty() {
            w = 0;
        }
        k += w;
        states = next;
    }
    Some(k)
}

/// Leaf states of `acc_tree(q, word)` for every `q`, or the first state for
/// which it is undefined.
pub fn advance_states(
    m2: &Machine,
    states: &BTreeSet<StateId>,
    word: &[Message],
) -> Result<BTreeSet<StateId>, StateId> {
    let mut out = BTreeSet::new();
    for q in states {
        let t = acc_tree(m2, q, word).ok_or_else(|| q.clone())?;
        out.extend(t.leaf_states());
    }
    Ok(out)
}

/// Conditions (1), (2a) and (2b) of a witness subtree.
pub fn check_conditions(
    m2: &Machine,
    tree: &SimTree,
    cand: &CandidateSubtree,
) -> Result<(), NotWitness> {
    for (&b, &a) in &cand.anc {
        let psi = tree.actions_between(a, b).expect("anc is an ancestor");
        if psi.receives().is_empty() {
            return Err(NotWitness::NoReceiveOnAncPath { boundary: b, anc: a });
        }
    }
    let ancestors = cand.ancestors();
    let targets: BTreeSet<NodeId> = ancestors.union(cand.boundary()).copied().collect();
    for &n in &ancestors {
        let label = tree.label(n);
        let leaves = label.sup_tree.leaf_states();
        let k = label.sup_tree.min_height();
        for &t in &targets {
            if t == n || !tree.is_ancestor(n, t) {
                continue;
            }
            let psi = tree.actions_between(n, t).expect("ancestor");
            let sends = psi.sends();
            let target = &tree.label(t).sup_tree;
            for q in &leaves {
                let acc = acc_tree(m2, q, &sends).ok_or_else(|| NotWitness::AccTreeUndefined {
                    from: n,
                    to: t,
                    state: q.clone(),
                })?;
                if !acc.leaf_states_subset_of(target) {
                    return Err(NotWitness::LeafSetEscapes { from: n, to: t, state: q.clone() });
                }
            }
            if cand.boundary().contains(&t) {
                let value = min_acc(m2, k, &leaves, &psi.0);
                if value.is_none_or(|v| v < k) {
                    return Err(NotWitness::MinAccDecreases {
                        from: n,
                        to: t,
                        min_height: k,
                        min_acc: value,
                    });
                }
            }
        }
    }
    Ok(())
}

/// The system describing what the supertype may accumulate.
pub fn build_g(m2: &Machine, tree: &SimTree, cand: &CandidateSubtree) -> Result<EquationSystem, NotWitness> {
    let r = cand.root();
    let mut defs = BTreeMap::new();
    let root_expr = Expr::from_tree(&tree.label(r).sup_tree, &mut |q| {
        Some(Expr::Var(Var::X(q.clone(), r)))
    })
    .expect("total");
    let mut pending: Vec<Var> = root_expr.vars().into_iter().collect();
    defs.insert(Var::X0, root_expr);
    while let Some(v) = pending.pop() {
        if defs.contains_key(&v) {
            continue;
        }
        let Var::X(q, n) = &v else { unreachable!("only X variables are pending") };
        let children = &tree.node(*n).children;
        let receiving = children.keys().next().is_some_and(|a| a.is_receive());
        let expr = if receiving {
            Expr::SilentChoice(
                children
                    .values()
                    .map(|c| Expr::Var(Var::X(q.clone(), cand.tr(*c))))
                    .collect(),
            )
        } else {
            let mut options = BTreeSet::new();
            for (action, c) in children {
                let undefined = || NotWitness::AccTreeUndefined { from: *n, to: *c, state: q.clone() };
                let in_tree = m2.in_tree(q).ok_or_else(undefined)?;
                let target = cand.tr(*c);
                let e = Expr::from_tree(in_tree, &mut |qi| {
                    m2.successor(qi, action)
                        .map(|q2| Expr::Var(Var::X(q2.clone(), target)))
                })
                .ok_or_else(undefined)?;
                options.insert(e);
            }
            if options.len() == 1 {
                options.into_iter().next().expect("one option")
            } else {
                Expr::SilentChoice(options)
            }
        };
        pending.extend(expr.vars().into_iter().filter(|v| !defs.contains_key(v)));
        defs.insert(v, expr);
    }
    Ok(EquationSystem { start: Var::X0, defs })
}

/// The system describing the inputs the subtype actually performs.
pub fn build_gp(tree: &SimTree, cand: &CandidateSubtree) -> EquationSystem {
    let start = Var::Y(cand.root());
    let mut defs = BTreeMap::new();
    let mut pending = vec![cand.root()];
    while let Some(n) = pending.pop() {
        let v = Var::Y(n);
        if defs.contains_key(&v) {
            continue;
        }
        let children = &tree.node(n).children;
        let receiving = children.keys().next().is_some_and(|a| a.is_receive());
        let expr = if receiving {
            Expr::InputChoice(
                children
                    .iter()
                    .map(|(a, c)| (a.message.clone(), Expr::Var(Var::Y(cand.tr(*c)))))
                    .collect(),
            )
        } else {
            Expr::SilentChoice(children.values().map(|c| Expr::Var(Var::Y(cand.tr(*c)))).collect())
        };
        for c in children.values() {
            let t = cand.tr(*c);
            if !defs.contains_key(&Var::Y(t)) {
                pending.push(t);
            }
        }
        defs.insert(v, expr);
    }
    EquationSystem { start, defs }
}

/// Whether `g ⊑ gp`: explores the pairs forced by the compatibility clauses
/// from the two start variables, accepting revisited pairs.
pub fn compatible(g: &EquationSystem, gp: &EquationSystem) -> Result<(), (Expr, Expr)> {
    let first = (Expr::Var(g.start.clone()), Expr::Var(gp.start.clone()));
    let mut seen: HashSet<(Expr, Expr)> = HashSet::new();
    let mut stack = vec![first];
    while let Some(pair) = stack.pop() {
        if !seen.insert(pair.clone()) {
            continue;
        }
        let (l, r) = pair;
        let mut next = Vec::new();
        if let Expr::Var(x) = &l {
            next.push((g.def(x).clone(), r.clone()));
        }
        if let Expr::Var(y) = &r {
            next.push((l.clone(), gp.def(y).clone()));
        }
        if let Expr::SilentChoice(es) = &l {
            next.extend(es.iter().map(|e| (e.clone(), r.clone())));
        }
        if let Expr::SilentChoice(es) = &r {
            next.extend(es.iter().map(|e| (l.clone(), e.clone())));
        }
        if let (Expr::InputChoice(i), Expr::InputChoice(j)) = (&l, &r) {
            for (a, e) in i {
                let Some(e2) = j.get(a) else {
                    return Err((l.clone(), r.clone()));
                };
                next.push((e.clone(), e2.clone()));
            }
        }
        stack.extend(next.into_iter().rev());
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub root: NodeId,
    pub verdict: Result<(), NotWitness>,
    pub g: Option<EquationSystem>,
    pub gp: Option<EquationSystem>,
}

impl WitnessReport {
    pub fn is_witness(&self) -> bool {
        self.verdict.is_ok()
    }
}

pub fn is_witness(m2: &Machine, tree: &SimTree, cand: &CandidateSubtree) -> WitnessReport {
    let mut report = WitnessReport {
        root: cand.root(),
        verdict: Ok(()),
        g: None,
        gp: None,
    };
    if let Err(e) = check_conditions(m2, tree, cand) {
        report.verdict = Err(e);
        return report;
    }
    let g = match build_g(m2, tree, cand) {
        Ok(g) => g,
        Err(e) => {
            report.verdict = Err(e);
            return report;
        }
    };
    let gp = build_gp(tree, cand);
    if let Err((left, right)) = compatible(&g, &gp) {
        report.verdict = Err(NotWitness::Incompatible { left, right });
    }
    report.g = Some(g);
    report.gp = Some(gp);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::RawMachine;
    use crate::simulation::{build, BuildLimits};
    use crate::subtree::{assign_ancestors, extract_candidates};

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

    fn q(s: &str) -> StateId {
        StateId::new(s)
    }

    fn msg(s: &str) -> Message {
        Message::new(s)
    }

    fn running() -> (SimTree, CandidateSubtree) {
        let (tree, _) = build(&m_r(), &m_c(), BuildLimits::default());
        let anc = assign_ancestors(&tree);
        let cand = extract_candidates(&tree, &anc).candidates.remove(0);
        (tree, cand)
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

    fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    fn ok_ko(e: Expr) -> Expr {
        Expr::InputChoice([(msg("ok"), e.clone()), (msg("ko"), e)].into_iter().collect())
    }

    #[test]
    fn min_acc_examples() {
        let mc = m_c();
        let q2 = BTreeSet::from([q("q2")]);
        let psi = [Action::send("pr"), Action::send("nd")];
        assert_eq!(min_acc(&mc, 0, &q2, &psi), Some(2));
        assert_eq!(min_acc(&mc, 5, &q2, &[]), Some(5));
        assert_eq!(min_acc(&mc, 0, &q2, &[Action::receive("ok")]), None);
        let psi = [Action::send("pr"), Action::receive("ok")];
        let a = min_acc(&mc, 3, &q2, &psi).unwrap();
        let b = min_acc(&mc, 1, &q2, &psi).unwrap();
        assert_eq!(a - b, 2);
    }

    #[test]
    fn running_example_conditions_hold() {
        let (tree, cand) = running();
        assert_eq!(check_conditions(&m_c(), &tree, &cand), Ok(()));
    }

    #[test]
    fn running_example_g_matches_table() {
        let (tree, cand) = running();
        let g = build_g(&m_c(), &tree, &cand).unwrap();
        let base = "!nd ?ko !pr !nd ?ko !pr";
        let n = |s: &str| node(&tree, &format!("{base} {s}"));
        let x = |k: NodeId| var(Var::X(q("q2"), k));
        let (n8, n9, n10) = (n(""), n("!nd"), n("!nd ?ko"));
        let (n12, n13, n15) = (n("!nd ?ko !pr"), n("!nd ?ko !pr !nd"), n("!nd ?ko !pr !nd ?ko"));
        let expected: BTreeMap<Var, Expr> = [
            (Var::X0, ok_ko(x(n8))),
            (Var::X(q("q2"), n8), ok_ko(x(n9))),
            (Var::X(q("q2"), n9), Expr::SilentChoice([x(n8), x(n10)].into())),
            (Var::X(q("q2"), n10), ok_ko(x(n12))),
            (Var::X(q("q2"), n12), ok_ko(x(n13))),
            (Var::X(q("q2"), n13), Expr::SilentChoice([x(n12), x(n15)].into())),
            (Var::X(q("q2"), n15), ok_ko(x(n8))),
        ]
        .into_iter()
        .collect();
        assert_eq!(g.defs, expected);
        assert!(g.is_closed());
    }

    #[test]
    fn running_example_gp_matches_table() {
        let (tree, cand) = running();
        let gp = build_gp(&tree, &cand);
        let base = "!nd ?ko !pr !nd ?ko !pr";
        let n = |s: &str| node(&tree, &format!("{base} {s}"));
        let y = |k: NodeId| var(Var::Y(k));
        let (n8, n9, n10) = (n(""), n("!nd"), n("!nd ?ko"));
        let (n12, n13, n15) = (n("!nd ?ko !pr"), n("!nd ?ko !pr !nd"), n("!nd ?ko !pr !nd ?ko"));
        let choice = |a: Expr, b: Expr| {
            Expr::InputChoice([(msg("ok"), a), (msg("ko"), b)].into_iter().collect())
        };
        let single = |e: Expr| Expr::SilentChoice([e].into());
        assert_eq!(gp.start, Var::Y(n8));
        assert_eq!(gp.defs[&Var::Y(n8)], single(y(n9)));
        assert_eq!(gp.defs[&Var::Y(n9)], choice(y(n8), y(n10)));
        assert_eq!(gp.defs[&Var::Y(n10)], single(y(n12)));
        assert_eq!(gp.defs[&Var::Y(n12)], single(y(n13)));
        assert_eq!(gp.defs[&Var::Y(n13)], choice(y(n12), y(n15)));
        assert_eq!(gp.defs[&Var::Y(n15)], single(y(n8)));
        assert_eq!(gp.defs.len(), 6);
    }

    #[test]
    fn running_example_is_witness() {
        let (tree, cand) = running();
        let report = is_witness(&m_c(), &tree, &cand);
        assert!(report.is_witness(), "{:?}", report.verdict);
    }

    fn system(start: Var, defs: Vec<(Var, Expr)>) -> EquationSystem {
        EquationSystem { start, defs: defs.into_iter().collect() }
    }

    #[test]
    fn compatibility_branch_inclusion() {
        let x0 = Var::X0;
        let y0 = Var::Y(NodeId(0));
        let only_a = system(
            x0.clone(),
            vec![(x0.clone(), Expr::InputChoice([(msg("a"), var(x0.clone()))].into()))],
        );
        let a_b = system(
            y0.clone(),
            vec![(
                y0.clone(),
                Expr::InputChoice([(msg("a"), var(y0.clone())), (msg("b"), var(y0.clone()))].into()),
            )],
        );
        assert_eq!(compatible(&only_a, &a_b), Ok(()));
        let a_b_left = a_b.rename(|_| Var::X0);
        let only_a_right = only_a.rename(|_| Var::Y(NodeId(0)));
        let err = compatible(&a_b_left, &only_a_right).unwrap_err();
        assert!(matches!(err, (Expr::InputChoice(ref i), Expr::InputChoice(_)) if i.len() == 2));
    }

    #[test]
    fn compatibility_is_reflexive_on_renamed_copy() {
        let (tree, cand) = running();
        let gp = build_gp(&tree, &cand);
        let left = gp.rename(|v| match v {
            Var::Y(n) => Var::X(q("copy"), *n),
            other => other.clone(),
        });
        assert_eq!(compatible(&left, &gp), Ok(()));
    }
}
