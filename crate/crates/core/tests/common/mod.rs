#![allow(dead_code)]

use std::path::PathBuf;

use asyncsub::machine::{ActionSequence, Machine};
use asyncsub::parser_io::parse_one;
use asyncsub::simulation::{NodeId, SimTree};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn corpus_path(name: &str) -> PathBuf {
    corpus_dir().join(format!("{name}.fsm"))
}

pub fn load(name: &str) -> Machine {
    let text = std::fs::read_to_string(corpus_path(name)).expect("corpus file");
    parse_one(&text).expect("corpus machine parses").machine
}

/// Corpus machine names in sorted order.
pub fn corpus_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "fsm").then(|| p.file_stem()?.to_str().map(String::from))?
        })
        .collect();
    names.sort();
    names
}

/// Every ordered pair of corpus machines.
pub fn corpus_pairs() -> Vec<(String, String)> {
    let names = corpus_names();
    names
        .iter()
        .flat_map(|a| names.iter().map(move |b| (a.clone(), b.clone())))
        .collect()
}

/// The node reached from the root by `path`, e.g. `"!nd ?ko"`.
pub fn node(tree: &SimTree, path: &str) -> NodeId {
    let psi: ActionSequence = path.parse().expect("action path");
    tree.follow(&psi.0).unwrap_or_else(|| panic!("no node at {path}"))
}
