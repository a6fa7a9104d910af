//! The full decision procedure with the dual-direction fallback.

use std::collections::BTreeMap;
use std::fmt;

use crate::machine::{ActionSequence, Machine};
use crate::simulation::{build, BuildLimits, BuildOutcome, Failure, NodeId, NodeStatus, SimLabel, SimTree};
use crate::subtree::{assign_ancestors, extract_candidates, Extraction, Leftovers};
use crate::witness::{is_witness, NotWitness, WitnessReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerdictValue {
    True,
    False,
    Unknown,
}

impl fmt::Display for VerdictValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictValue::True => "true",
            VerdictValue::False => "false",
            VerdictValue::Unknown => "unknown",
        })
    }
}

/// `Direct` checks `M1 ≤ M2`, `Dualized` checks `dual(M2) ≤ dual(M1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckDirection {
    Direct,
    Dualized,
}

impl fmt::Display for CheckDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckDirection::Direct => "direct",
            CheckDirection::Dualized => "dualized",
        })
    }
}

/// Which directions [`check`] may run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirectionMode {
    Direct,
    Dual,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CheckOptions {
    pub limits: BuildLimits,
    pub mode: DirectionMode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnknownCause {
    LimitHit,
    Leftover(Leftovers),
    NotWitness { root: NodeId, reason: NotWitness },
}

impl fmt::Display for UnknownCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnknownCause::LimitHit => f.write_str("build limit reached"),
            UnknownCause::Leftover(Leftovers::SuccessfulLeafBelowAncestor(n)) => {
                write!(f, "successful leaf {n} inside an extracted subtree")
            }
            UnknownCause::Leftover(Leftovers::AncestorOutsideCandidate { boundary, anc }) => {
                write!(f, "boundary node {boundary} maps to {anc} above its candidate root")
            }
            UnknownCause::Leftover(Leftovers::None) => f.write_str("no leftovers"),
            UnknownCause::NotWitness { root, reason } => {
                write!(f, "candidate at {root} is not a witness: {reason}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evidence {
    /// A failure leaf and the path leading to it.
    Failure {
        node: NodeId,
        path: ActionSequence,
        label: SimLabel,
        failure: Failure,
    },
    /// Roots of the witness subtrees; empty when every boundary repeats a label.
    Witnesses { roots: Vec<NodeId> },
    /// One cause per direction that was tried.
    Unknown { causes: Vec<(CheckDirection, UnknownCause)> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub value: VerdictValue,
    pub direction: CheckDirection,
    pub evidence: Evidence,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.evidence {
            Evidence::Failure { node, path, label, failure } => write!(
                f,
                "{} ({}): failure at {node} [{label}] after {path}: {failure}",
                self.value, self.direction
            ),
            Evidence::Witnesses { roots } if roots.is_empty() => write!(
                f,
                "{} ({}): every branch ends or repeats a label",
                self.value, self.direction
            ),
            Evidence::Witnesses { roots } => {
                let list: Vec<String> = roots.iter().map(|r| r.to_string()).collect();
                write!(
                    f,
                    "{} ({}): witness subtrees at {}",
                    self.value,
                    self.direction,
                    list.join(", ")
                )
            }
            Evidence::Unknown { causes } => {
                write!(f, "{}", self.value)?;
                for (d, c) in causes {
                    write!(f, "; {d}: {c}")?;
                }
                Ok(())
            }
        }
    }
}

/// Everything computed for one direction.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub direction: CheckDirection,
    /// The candidate subtype and supertype actually simulated.
    pub sub: Machine,
    pub sup: Machine,
    pub tree: SimTree,
    pub outcome: BuildOutcome,
    pub anc: BTreeMap<NodeId, NodeId>,
    pub extraction: Option<Extraction>,
    pub reports: Vec<WitnessReport>,
    pub verdict: Verdict,
}

/// Runs one direction: build, extract candidates, check witnesses.
pub fn analyze(sub: &Machine, sup: &Machine, limits: BuildLimits, direction: CheckDirection) -> Analysis {
    let (tree, outcome) = build(sub, sup, limits);
    let anc = assign_ancestors(&tree);
    let mut extraction = None;
    let mut reports = Vec::new();
    let verdict = match outcome {
        BuildOutcome::FailureFound(node) => {
            let NodeStatus::FailureLeaf(failure) = tree.status(node).clone() else {
                unreachable!("failure outcome points at a failure leaf")
            };
            Verdict {
                value: VerdictValue::False,
                direction,
                evidence: Evidence::Failure {
                    node,
                    path: tree.actions_between(tree.root(), node).expect("root path"),
                    label: tree.label(node).clone(),
                    failure,
                },
            }
        }
        BuildOutcome::LimitHit => unknown(direction, UnknownCause::LimitHit),
        BuildOutcome::AllStopped => {
            let ex = extract_candidates(&tree, &anc);
            reports = ex.candidates.iter().map(|c| is_witness(sup, &tree, c)).collect();
            let v = if ex.leftovers != Leftovers::None {
                unknown(direction, UnknownCause::Leftover(ex.leftovers.clone()))
            } else if let Some(r) = reports.iter().find(|r| !r.is_witness()) {
                let reason = r.verdict.clone().expect_err("not a witness");
                unknown(direction, UnknownCause::NotWitness { root: r.root, reason })
            } else {
                Verdict {
                    value: VerdictValue::True,
                    direction,
                    evidence: Evidence::Witnesses {
                        roots: reports.iter().map(|r| r.root).collect(),
                    },
                }
            };
            extraction = Some(ex);
            v
        }
    };
    Analysis {
        direction,
        sub: sub.clone(),
        sup: sup.clone(),
        tree,
        outcome,
        anc,
        extraction,
        reports,
        verdict,
    }
}

fn unknown(direction: CheckDirection, cause: UnknownCause) -> Verdict {
    Verdict {
        value: VerdictValue::Unknown,
        direction,
        evidence: Evidence::Unknown { causes: vec![(direction, cause)] },
    }
}

/// Runs the directions selected by `opts` and keeps every analysis.
pub fn check_detailed(m1: &Machine, m2: &Machine, opts: CheckOptions) -> (Verdict, Vec<Analysis>) {
    let mut runs = Vec::new();
    if opts.mode != DirectionMode::Dual {
        runs.push(analyze(m1, m2, opts.limits, CheckDirection::Direct));
    }
    let decided = runs.iter().any(|a| a.verdict.value != VerdictValue::Unknown);
    if opts.mode != DirectionMode::Direct && !decided {
        runs.push(analyze(&m2.dual(), &m1.dual(), opts.limits, CheckDirection::Dualized));
    }
    if let Some(a) = runs.iter().find(|a| a.verdict.value != VerdictValue::Unknown) {
        return (a.verdict.clone(), runs);
    }
    let causes = runs
        .iter()
        .flat_map(|a| match &a.verdict.evidence {
            Evidence::Unknown { causes } => causes.clone(),
            _ => Vec::new(),
        })
        .collect();
    let direction = runs.last().map_or(CheckDirection::Direct, |a| a.direction);
    let verdict = Verdict {
        value: VerdictValue::Unknown,
        direction,
        evidence: Evidence::Unknown { causes },
    };
    (verdict, runs)
}

/// Decides `M1 ≤ M2` as true, false or unknown.
pub fn check(m1: &Machine, m2: &Machine, opts: CheckOptions) -> Verdict {
    check_detailed(m1, m2, opts).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::RawMachine;

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

    fn m() -> Machine {
        RawMachine::new("q1")
            .send("q1", "nd", "q2")
            .receive("q2", "ok", "q1")
            .receive("q2", "ko", "q3")
            .send("q3", "pr", "q2")
            .validate()
            .unwrap()
    }

    #[test]
    fn running_example_is_true_with_one_witness() {
        let v = check(&m_r(), &m_c(), CheckOptions::default());
        assert_eq!(v.value, VerdictValue::True);
        assert_eq!(v.direction, CheckDirection::Direct);
        assert!(matches!(v.evidence, Evidence::Witnesses { ref roots } if roots.len() == 1));
    }

    #[test]
    fn synchronous_subtype_needs_no_candidate() {
        let v = check(&m(), &m_c(), CheckOptions::default());
        assert_eq!(v.value, VerdictValue::True);
        assert_eq!(v.evidence, Evidence::Witnesses { roots: vec![] });
    }

    #[test]
    fn reflexive_on_examples() {
        for x in [m(), m_r(), m_c(), m_c().dual()] {
            assert_eq!(check(&x, &x, CheckOptions::default()).value, VerdictValue::True);
        }
    }

    #[test]
    fn direct_only_mode_skips_dual() {
        let opts = CheckOptions { mode: DirectionMode::Direct, ..Default::default() };
        let (_, runs) = check_detailed(&m_c(), &m_r(), opts);
        assert_eq!(runs.len(), 1);
    }

    #[test]
    fn supertype_is_not_a_subtype() {
        let v = check(&m_c(), &m_r(), CheckOptions::default());
        assert_eq!(v.value, VerdictValue::False);
    }
}
