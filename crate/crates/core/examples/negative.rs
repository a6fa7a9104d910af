// A subtype that can keep sending `a` forever while an input `c` is still
// owed never consumes it: the check fails at the root in both directions.
//
// ```bash
// cargo run --example negative
// ```

use std::error::Error;

use asyncsub::checker::{check, CheckOptions, DirectionMode, VerdictValue};
use asyncsub::machine::RawMachine;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let m1 = RawMachine::new("p1")
        .send("p1", "b", "p2")
        .send("p1", "a", "p1")
        .receive("p2", "c", "p3")
        .validate()?;
    let m2 = RawMachine::new("q1")
        .receive("q1", "c", "q2")
        .send("q2", "b", "q3")
        .send("q2", "a", "q2")
        .validate()?;

    for mode in [DirectionMode::Direct, DirectionMode::Dual] {
        let v = check(&m1, &m2, CheckOptions { mode, ..Default::default() });
        assert_eq!(v.value, VerdictValue::False);
        println!("{mode:?}: {v}");
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
