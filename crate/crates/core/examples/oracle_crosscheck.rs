// Random machine pairs checked against the bounded oracles: a `true`
// verdict must give a safe system with the dual of the supertype, and a
// `false` verdict must be reproduced by the raw simulation.
//
// ```bash
// cargo run --release --example oracle_crosscheck
// ```

use std::error::Error;

use rand::rngs::StdRng;
use rand::SeedableRng;

use asyncsub::checker::{check, CheckOptions, VerdictValue};
use asyncsub::oracle::{bounded_fifo_safe, bounded_sim_fail, escalating_sim_fail, random_pair, FifoResult, SimSearch};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut counts = [0usize; 3];
    for i in 0..100 {
        let (m1, m2) = random_pair(&mut rng, 4, &["a", "b"]);
        match check(&m1, &m2, CheckOptions::default()).value {
            VerdictValue::True => {
                counts[0] += 1;
                let fifo = bounded_fifo_safe(&m1, &m2.dual(), 6, 100_000);
                let sim = bounded_sim_fail(&m1, &m2, 40);
                if fifo != FifoResult::NoViolation || sim != SimSearch::NoneWithinDepth {
                    return Err(format!("pair {i}: true contradicted ({fifo:?}, {sim:?})").into());
                }
            }
            VerdictValue::False => {
                counts[1] += 1;
                if !escalating_sim_fail(&m1, &m2).found() {
                    return Err(format!("pair {i}: false not reproduced").into());
                }
            }
            VerdictValue::Unknown => counts[2] += 1,
        }
    }
    println!("{} true, {} false, {} unknown, no contradictions", counts[0], counts[1], counts[2]);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
