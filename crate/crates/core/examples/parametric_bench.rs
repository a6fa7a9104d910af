// The parametric benchmark family: shapes of the analysis and timings for
// a small grid, written as CSV to stdout.
//
// ```bash
// cargo run --release --example parametric_bench
// ```

use std::error::Error;

use asyncsub::bench::{parse_grid, run_suite, shape, write_csv};
use asyncsub::simulation::BuildLimits;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for n in 1..=3 {
        let s = shape(n, 1, BuildLimits::default());
        println!("n={n} m=1: {} nodes, candidate depth {} (2n+5 = {})", s.nodes, s.candidate_depth, 2 * n + 5);
    }
    for m in 1..=3 {
        let s = shape(1, m, BuildLimits::default());
        println!(
            "n=1 m={m}: {} candidates, tree depth {}, context depth {}",
            s.candidates, s.sim_depth, s.max_context_depth
        );
    }
    let cells = run_suite(&parse_grid("n=1..3,m=1..2")?, 2, BuildLimits::default());
    let mut csv = Vec::new();
    write_csv(&cells, &mut csv)?;
    print!("{}", String::from_utf8(csv)?);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
