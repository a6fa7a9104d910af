// The hospital client example: a refined client that resends `pr` after a
// `ko` is a subtype of the client that may send either message at any time.
//
// ```bash
// cargo run --example running_example
// ```

use std::error::Error;

use asyncsub::checker::{check_detailed, CheckOptions};
use asyncsub::parser_io::parse_one;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let m_r = parse_one(include_str!("../corpus/m_r.fsm"))?.machine;
    let m_c = parse_one(include_str!("../corpus/m_c.fsm"))?.machine;

    let (verdict, runs) = check_detailed(&m_r, &m_c, CheckOptions::default());
    println!("M_R ≤ M_C: {verdict}");

    let a = &runs[0];
    println!("simulation tree: {} nodes", a.tree.len());
    for b in a.tree.boundary() {
        let anc = a.tree.status(b).anc().expect("boundary nodes have an ancestor");
        let path = a.tree.actions_between(a.tree.root(), b).expect("path from root");
        println!("  boundary {b} [{}] -> {anc} via {path}", a.tree.label(b));
    }
    for c in &a.extraction.as_ref().expect("all branches stopped").candidates {
        println!("candidate at {} with boundary {:?}", c.root(), c.boundary());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
