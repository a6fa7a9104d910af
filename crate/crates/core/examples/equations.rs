// The two input-tree equation systems built for the running example's
// candidate subtree and the compatibility check between them.
//
// ```bash
// cargo run --example equations
// ```

use std::error::Error;

use asyncsub::checker::{analyze, CheckDirection};
use asyncsub::parser_io::parse_one;
use asyncsub::simulation::BuildLimits;
use asyncsub::witness::{build_g, build_gp, compatible, min_acc};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let m_r = parse_one(include_str!("../corpus/m_r.fsm"))?.machine;
    let m_c = parse_one(include_str!("../corpus/m_c.fsm"))?.machine;
    let a = analyze(&m_r, &m_c, BuildLimits::default(), CheckDirection::Direct);
    let cand = &a.extraction.as_ref().expect("all branches stopped").candidates[0];

    let g = build_g(&m_c, &a.tree, cand)?;
    let gp = build_gp(&a.tree, cand);
    println!("G:\n{g}");
    println!("G':\n{gp}");
    match compatible(&g, &gp) {
        Ok(()) => println!("G' is compatible with G"),
        Err((l, r)) => println!("incompatible at {l} vs {r}"),
    }

    let q2 = [asyncsub::machine::StateId::new("q2")].into_iter().collect();
    let psi: asyncsub::machine::ActionSequence = "!pr !nd".parse()?;
    println!("minAcc(0, {{q2}}, {psi}) = {:?}", min_acc(&m_c, 0, &q2, &psi.0));
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
