//! Graphviz output for simulation trees, candidate subtrees and equation
//! systems. Output depends only on the input value, so repeated renders are
//! byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::checker::Analysis;
use crate::simulation::{NodeId, NodeStatus, SimTree};
use crate::subtree::CandidateSubtree;
use crate::witness::{EquationSystem, Expr, Var};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn node_attrs(tree: &SimTree, id: NodeId, root: bool) -> String {
    let node = tree.node(id);
    let mut attrs = format!(
        "label=\"{}\", xlabel=\"{}\"",
        escape(&node.label.to_string()),
        id
    );
    match &node.status {
        NodeStatus::LabelRepeat { .. } | NodeStatus::Growth { .. } => attrs.push_str(", peripheries=2"),
        NodeStatus::SuccessfulLeaf => attrs.push_str(", style=rounded"),
        NodeStatus::FailureLeaf(f) => {
            write!(attrs, ", color=red, tooltip=\"{}\"", escape(&f.to_string())).unwrap()
        }
        NodeStatus::Unexpanded => attrs.push_str(", style=dotted"),
        NodeStatus::Interior => {}
    }
    if root {
        attrs.push_str(", penwidth=3");
    }
    attrs
}

fn edges(out: &mut String, tree: &SimTree, nodes: &[NodeId], indent: &str) {
    for &id in nodes {
        for (action, child) in &tree.node(id).children {
            if nodes.contains(child) {
                writeln!(out, "{indent}{id} -> {child} [label=\"{action}\"];").unwrap();
            }
        }
    }
}

/// The finite simulation tree; boundary nodes are double-bordered and
/// dashed edges point to their ancestors.
pub fn tree_to_dot(tree: &SimTree) -> String {
    let mut out = String::from("digraph simulation {\n  node [shape=box];\n");
    let all: Vec<NodeId> = tree.nodes().map(|n| n.id).collect();
    for &id in &all {
        writeln!(out, "  {id} [{}];", node_attrs(tree, id, id == tree.root())).unwrap();
    }
    edges(&mut out, tree, &all, "  ");
    for n in tree.nodes() {
        if let Some(anc) = n.status.anc() {
            writeln!(out, "  {} -> {anc} [style=dashed, constraint=false];", n.id).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// One cluster per candidate subtree.
pub fn candidates_to_dot(tree: &SimTree, candidates: &[CandidateSubtree]) -> String {
    let mut out = String::from("digraph candidates {\n");
    if !candidates.is_empty() {
        out.push_str("  node [shape=box];\n");
    }
    for (i, c) in candidates.iter().enumerate() {
        writeln!(out, "  subgraph cluster_{i} {{").unwrap();
        writeln!(out, "    label=\"candidate at {}\";", c.root()).unwrap();
        let members = c.subtree.members();
        for &id in members {
            writeln!(out, "    {id} [{}];", node_attrs(tree, id, id == c.root())).unwrap();
        }
        edges(&mut out, tree, members, "    ");
        for (b, a) in &c.anc {
            writeln!(out, "    {b} -> {a} [style=dashed, constraint=false];").unwrap();
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

struct ExprWriter<'a> {
    out: &'a mut String,
    ids: BTreeMap<Var, String>,
    fresh: usize,
}

impl ExprWriter<'_> {
    fn var_id(&self, v: &Var) -> String {
        self.ids[v].clone()
    }

    /// Emits the node for `e` (unless it is a variable) and returns its id.
    fn emit(&mut self, e: &Expr) -> String {
        match e {
            Expr::Var(v) => self.var_id(v),
            _ => {
                self.fresh += 1;
                let id = format!("e{}", self.fresh);
                let shape = if matches!(e, Expr::SilentChoice(_)) { "diamond" } else { "box" };
                writeln!(self.out, "  {id} [label=\"\", shape={shape}, width=0.3, height=0.3];").unwrap();
                self.edges_from(&id, e);
                id
            }
        }
    }

    fn edges_from(&mut self, from: &str, e: &Expr) {
        match e {
            Expr::Var(v) => {
                let to = self.var_id(v);
                writeln!(self.out, "  {from} -> {to} [style=dashed];").unwrap();
            }
            Expr::InputChoice(branches) => {
                for (a, sub) in branches {
                    let to = self.emit(sub);
                    writeln!(self.out, "  {from} -> {to} [label=\"?{a}\"];").unwrap();
                }
            }
            Expr::SilentChoice(options) => {
                for sub in options {
                    let to = self.emit(sub);
                    writeln!(self.out, "  {from} -> {to} [style=dashed];").unwrap();
                }
            }
        }
    }
}

/// Silent choices are diamonds, other definitions boxes; the start variable
/// is drawn thick.
pub fn equations_to_dot(name: &str, system: &EquationSystem) -> String {
    let mut out = format!("digraph {name} {{\n");
    let ids: BTreeMap<Var, String> = system
        .vars()
        .enumerate()
        .map(|(i, v)| (v.clone(), format!("v{i}")))
        .collect();
    for (v, e) in &system.defs {
        let shape = if matches!(e, Expr::SilentChoice(_)) { "diamond" } else { "box" };
        let thick = if *v == system.start { ", penwidth=3" } else { "" };
        writeln!(
            out,
            "  {} [label=\"{}\", shape={shape}{thick}];",
            ids[v],
            escape(&v.to_string())
        )
        .unwrap();
    }
    let mut w = ExprWriter { out: &mut out, ids, fresh: 0 };
    for (v, e) in &system.defs {
        let from = w.var_id(v);
        w.edges_from(&from, e);
    }
    out.push_str("}\n");
    out
}

/// All renderings of one direction, as `(file name, contents)` pairs.
pub fn render_analysis(a: &Analysis) -> Vec<(String, String)> {
    let prefix = a.direction.to_string();
    let mut files = vec![(format!("{prefix}_tree.dot"), tree_to_dot(&a.tree))];
    let candidates = a.extraction.as_ref().map(|e| e.candidates.as_slice()).unwrap_or(&[]);
    files.push((format!("{prefix}_candidates.dot"), candidates_to_dot(&a.tree, candidates)));
    for r in &a.reports {
        if let Some(g) = &r.g {
            files.push((format!("{prefix}_{}_g.dot", r.root), equations_to_dot("G", g)));
        }
        if let Some(gp) = &r.gp {
            files.push((format!("{prefix}_{}_gp.dot", r.root), equations_to_dot("Gp", gp)));
        }
    }
    files
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{analyze, CheckDirection};
    use crate::machine::{Machine, RawMachine};
    use crate::simulation::BuildLimits;

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

    fn running() -> Analysis {
        analyze(&m_r(), &m_c(), BuildLimits::default(), CheckDirection::Direct)
    }

    #[test]
    fn tree_has_all_nodes_and_dashed_edges() {
        let dot = tree_to_dot(&running().tree);
        assert_eq!(dot.matches("xlabel=").count(), 17);
        assert_eq!(dot.matches("style=dashed").count(), 5);
        assert_eq!(dot.matches("peripheries=2").count(), 5);
        assert!(dot.contains("n0 [label=\"q1 ≤ q1\", xlabel=\"n0\", penwidth=3];"));
    }

    #[test]
    fn empty_candidate_list() {
        assert_eq!(candidates_to_dot(&running().tree, &[]), "digraph candidates {\n}\n");
    }

    #[test]
    fn equation_shapes() {
        let a = running();
        let gp = a.reports[0].gp.as_ref().unwrap();
        let dot = equations_to_dot("Gp", gp);
        assert_eq!(dot.matches("shape=diamond").count(), 4);
        assert_eq!(dot.matches("shape=box").count(), 2);
        assert_eq!(dot.matches("penwidth=3").count(), 1);
    }

    #[test]
    fn rendering_is_stable() {
        let a = render_analysis(&running());
        let b = render_analysis(&running());
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
    }
}
