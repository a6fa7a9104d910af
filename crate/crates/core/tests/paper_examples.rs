mod common;

use asyncsub::checker::{analyze, check, CheckDirection, CheckOptions, DirectionMode, Evidence, VerdictValue};
use asyncsub::machine::{Machine, StateId};
use asyncsub::oracle::{bounded_fifo_safe, bounded_sim_fail, FifoResult, SimSearch};
use asyncsub::simulation::{BuildLimits, Failure, NodeStatus};
use asyncsub::subtree::Leftovers;
use asyncsub::witness::min_acc;

use common::{load, node};

fn direct(m1: &Machine, m2: &Machine) -> asyncsub::checker::Analysis {
    analyze(m1, m2, BuildLimits::default(), CheckDirection::Direct)
}

#[test]
fn refined_client_is_a_subtype_of_the_client() {
    let a = direct(&load("m_r"), &load("m_c"));
    assert_eq!(a.verdict.value, VerdictValue::True);
    assert_eq!(a.tree.len(), 17);
    let ex = a.extraction.as_ref().unwrap();
    assert_eq!(ex.leftovers, Leftovers::None);
    let n8 = node(&a.tree, "!nd ?ko !pr !nd ?ko !pr");
    assert_eq!(ex.p.iter().copied().collect::<Vec<_>>(), vec![n8]);
    let c = &ex.candidates[0];
    let boundary: Vec<_> = c.boundary().iter().copied().collect();
    let mut want = vec![
        node(&a.tree, "!nd ?ko !pr !nd ?ko !pr !nd ?ok"),
        node(&a.tree, "!nd ?ko !pr !nd ?ko !pr !nd ?ko !pr !nd ?ok"),
        node(&a.tree, "!nd ?ko !pr !nd ?ko !pr !nd ?ko !pr !nd ?ko !pr"),
    ];
    want.sort();
    assert_eq!(boundary, want);
    assert_eq!(c.subtree.members().len(), 9);
    let report = &a.reports[0];
    assert!(report.is_witness());
    assert_eq!(report.g.as_ref().unwrap().vars().count(), 7);
    assert_eq!(report.gp.as_ref().unwrap().vars().count(), 6);
}

#[test]
fn min_acc_of_the_running_example() {
    let m_c = load("m_c");
    let psi: asyncsub::machine::ActionSequence = "!pr !nd".parse().unwrap();
    let q2 = [StateId::new("q2")].into_iter().collect();
    assert_eq!(min_acc(&m_c, 0, &q2, &psi.0), Some(2));
    let psi: asyncsub::machine::ActionSequence = "!pr ?ok".parse().unwrap();
    let (lo, hi) = (min_acc(&m_c, 1, &q2, &psi.0).unwrap(), min_acc(&m_c, 3, &q2, &psi.0).unwrap());
    assert_eq!(hi - lo, 2);
}

#[test]
fn retrying_client_needs_no_candidate() {
    let a = direct(&load("m"), &load("m_c"));
    assert_eq!(a.verdict.evidence, Evidence::Witnesses { roots: vec![] });
    assert!(a.tree.boundary().iter().all(|b| matches!(a.tree.status(*b), NodeStatus::LabelRepeat { .. })));
}

#[test]
fn negative_example_fails_at_the_root() {
    let (m1, m2) = (load("ex24_m1"), load("ex24_m2"));
    let d = direct(&m1, &m2);
    assert!(matches!(d.tree.status(d.tree.root()), NodeStatus::FailureLeaf(Failure::SendLoopWithAccumulation)));
    let opts = CheckOptions { mode: DirectionMode::Dual, ..Default::default() };
    assert_eq!(check(&m1, &m2, opts).value, VerdictValue::False);
    assert!(bounded_sim_fail(&m1, &m2, 0).found());
}

#[test]
fn client_server_system_is_safe() {
    assert_eq!(bounded_fifo_safe(&load("m_r"), &load("m_s"), 4, 10_000), FifoResult::NoViolation);
    assert_eq!(bounded_fifo_safe(&load("m"), &load("m_s"), 4, 10_000), FifoResult::NoViolation);
    assert_eq!(bounded_sim_fail(&load("m_r"), &load("m_c"), 50), SimSearch::NoneWithinDepth);
}

#[test]
fn server_dual_is_the_client() {
    assert_eq!(load("m_s").dual(), load("m_c"));
}

#[test]
fn send_loop_machine_is_its_own_subtype() {
    let ex23 = load("ex23");
    assert!(ex23.loop_detect(&StateId::new("p1"), asyncsub::machine::Direction::Send));
    assert_eq!(check(&ex23, &ex23, CheckOptions::default()).value, VerdictValue::True);
}
