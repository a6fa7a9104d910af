// DOT renderings of the running example: the simulation tree, the
// candidate subtrees and both equation systems.
//
// ```bash
// cargo run --example graphviz -- out_dir
// for f in out_dir/*.dot; do dot -Tsvg "$f" -o "${f%.dot}.svg"; done
// ```

use std::error::Error;
use std::path::PathBuf;

use asyncsub::checker::{analyze, CheckDirection};
use asyncsub::parser_io::{parse_one, render_analysis};
use asyncsub::simulation::BuildLimits;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let m_r = parse_one(include_str!("../corpus/m_r.fsm"))?.machine;
    let m_c = parse_one(include_str!("../corpus/m_c.fsm"))?.machine;
    let a = analyze(&m_r, &m_c, BuildLimits::default(), CheckDirection::Direct);
    let files = render_analysis(&a);
    match std::env::args_os().nth(1).map(PathBuf::from) {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            for (name, content) in &files {
                std::fs::write(dir.join(name), content)?;
                println!("wrote {}", dir.join(name).display());
            }
        }
        None => {
            for (name, content) in &files {
                println!("// {name}\n{content}");
            }
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
