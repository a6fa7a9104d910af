// A pair the algorithm cannot decide: the candidate subtree contains a
// path made of sends only, so it is not a witness and the answer is
// `unknown` in both directions.
//
// ```bash
// cargo run --example not_captured
// ```

use std::error::Error;

use asyncsub::checker::{check_detailed, CheckOptions, VerdictValue};
use asyncsub::parser_io::parse_one;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let m1 = parse_one(include_str!("../corpus/ex315_m1.fsm"))?.machine;
    let m2 = parse_one(include_str!("../corpus/ex315_m2.fsm"))?.machine;

    let (verdict, runs) = check_detailed(&m1, &m2, CheckOptions::default());
    assert_eq!(verdict.value, VerdictValue::Unknown);
    for a in &runs {
        let candidates = a.extraction.as_ref().map_or(0, |e| e.candidates.len());
        println!("{}: {} nodes, {candidates} candidate(s)", a.direction, a.tree.len());
        for r in &a.reports {
            if let Err(reason) = &r.verdict {
                println!("  candidate at {}: {reason}", r.root);
            }
        }
    }
    println!("{verdict}");
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
