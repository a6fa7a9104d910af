// Input trees, their split into a context and leaves, and the trees a
// supertype accumulates while anticipating sends.
//
// ```bash
// cargo run --example input_trees
// ```

use std::collections::BTreeMap;
use std::error::Error;

use asyncsub::input_tree::InputTree;
use asyncsub::machine::{Message, StateId};
use asyncsub::parser_io::parse_one;
use asyncsub::simulation::acc_tree;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let m_c = parse_one(include_str!("../corpus/m_c.fsm"))?.machine;
    let q2 = StateId::new("q2");

    println!("inTree(q2) = {}", m_c.in_tree(&q2).expect("q2 receives"));
    let word = [Message::new("pr"), Message::new("nd")];
    let acc = acc_tree(&m_c, &q2, &word).expect("q2 can anticipate both sends");
    println!("accTree(q2, pr·nd) = {acc}");
    println!("height {}, minHeight {}, {} leaves", acc.height(), acc.min_height(), acc.leaf_count());

    let (ctx, holes) = acc.split();
    println!("context {ctx} with {} holes", holes.len());
    let refill: BTreeMap<_, _> = holes.into_iter().map(|(h, q)| (h, InputTree::leaf(q))).collect();
    assert_eq!(ctx.fill_trees(&refill)?, acc);

    let ok = acc.extract(&[Message::new("ok")]).expect("ok branch");
    println!("after ?ok: {ok}");
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
