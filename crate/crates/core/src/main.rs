use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use asyncsub::bench::{gen, parse_grid, run_suite, write_csv};
use asyncsub::checker::{check_detailed, CheckOptions, DirectionMode, VerdictValue};
use asyncsub::machine::Machine;
use asyncsub::oracle::{bounded_fifo_safe, bounded_sim_fail, FifoResult, SimSearch};
use asyncsub::parser_io::{parse, render_analysis, serialize};
use asyncsub::simulation::BuildLimits;

const INPUT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "asyncsub", version, about = "Asynchronous session subtyping checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Direct,
    Dual,
    Both,
}

#[derive(clap::Args)]
struct Pair {
    /// Candidate subtype; may hold both machines when SUPER is omitted.
    sub: PathBuf,
    /// Candidate supertype.
    sup: Option<PathBuf>,
}

#[derive(clap::Args)]
struct Limits {
    #[arg(long, default_value_t = BuildLimits::default().max_nodes)]
    max_nodes: usize,
    #[arg(long, default_value_t = BuildLimits::default().max_depth)]
    max_depth: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Decide SUB ≤ SUPER; prints true, false or unknown.
    Check {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        limits: Limits,
        #[arg(long, value_enum, default_value = "both")]
        direction: Direction,
        /// Also write DOT files into this directory.
        #[arg(long)]
        viz: Option<PathBuf>,
    },
    /// Write the parametric benchmark pair.
    GenBench {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time the benchmark grid and write a CSV.
    Bench {
        #[arg(long, default_value = "n=1..8,m=1..8")]
        grid: String,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Write DOT files for every direction that was run.
    Viz {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        limits: Limits,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the bounded oracles on a pair.
    #[command(hide = true)]
    Oracle {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long, default_value_t = 40)]
        depth: usize,
    },
}

fn load_pair(pair: &Pair) -> Result<(Machine, Machine), String> {
    let read = |p: &Path| {
        let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
        parse(&text).map_err(|e| format!("{}: {e}", p.display()))
    };
    let mut first = read(&pair.sub)?;
    match &pair.sup {
        Some(sup) => {
            let mut second = read(sup)?;
            if first.len() != 1 || second.len() != 1 {
                return Err("each file must hold exactly one machine".into());
            }
            Ok((first.remove(0).machine, second.remove(0).machine))
        }
        None if first.len() == 2 => {
            let sup = first.pop().expect("two machines").machine;
            Ok((first.pop().expect("two machines").machine, sup))
        }
        None => Err(format!(
            "{}: expected two machines when SUPER is omitted, found {}",
            pair.sub.display(),
            first.len()
        )),
    }
}

fn write_files(dir: &Path, files: &[(String, String)]) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    for (name, content) in files {
        let path = dir.join(name);
        fs::write(&path, content).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(())
}

fn options(limits: &Limits, direction: Direction) -> CheckOptions {
    CheckOptions {
        limits: BuildLimits { max_nodes: limits.max_nodes, max_depth: limits.max_depth },
        mode: match direction {
            Direction::Direct => DirectionMode::Direct,
            Direction::Dual => DirectionMode::Dual,
            Direction::Both => DirectionMode::Both,
        },
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Check { pair, limits, direction, viz } => {
            let (m1, m2) = load_pair(&pair)?;
            let (verdict, runs) = check_detailed(&m1, &m2, options(&limits, direction));
            println!("{}", verdict.value);
            eprintln!("{verdict}");
            if let Some(dir) = viz {
                let files: Vec<_> = runs.iter().flat_map(render_analysis).collect();
                write_files(&dir, &files)?;
            }
            Ok(match verdict.value {
                VerdictValue::True => 0,
                VerdictValue::False => 1,
                VerdictValue::Unknown => 2,
            })
        }
        Command::GenBench { n, m, out } => {
            if n == 0 || m == 0 {
                return Err("--n and --m must be at least 1".into());
            }
            let (m1, m2) = gen(n, m);
            write_files(
                &out,
                &[
                    (format!("bench_{n}_{m}_m1.fsm"), serialize("m1", &m1)),
                    (format!("bench_{n}_{m}_m2.fsm"), serialize("m2", &m2)),
                ],
            )?;
            Ok(0)
        }
        Command::Bench { grid, reps, csv } => {
            let grid = parse_grid(&grid).map_err(|e| e.to_string())?;
            let cells = run_suite(&grid, reps, BuildLimits::default());
            let file = fs::File::create(&csv).map_err(|e| format!("{}: {e}", csv.display()))?;
            write_csv(&cells, file).map_err(|e| e.to_string())?;
            Ok(0)
        }
        Command::Viz { pair, limits, out } => {
            let (m1, m2) = load_pair(&pair)?;
            let (_, runs) = check_detailed(&m1, &m2, options(&limits, Direction::Both));
            let files: Vec<_> = runs.iter().flat_map(render_analysis).collect();
            write_files(&out, &files)?;
            for (name, _) in &files {
                println!("{name}");
            }
            Ok(0)
        }
        Command::Oracle { pair, k, depth } => {
            let (m1, m2) = load_pair(&pair)?;
            match bounded_fifo_safe(&m1, &m2.dual(), k, 100_000) {
                FifoResult::NoViolation => println!("fifo: no violation"),
                FifoResult::Deadlock(t) => println!("fifo: deadlock after {} steps", t.len()),
                FifoResult::Orphan(t) => println!("fifo: orphan after {} steps", t.len()),
            }
            match bounded_sim_fail(&m1, &m2, depth) {
                SimSearch::FailureFound { path, failure } => match failure {
                    Some(f) => println!("sim: failure after {path}: {f}"),
                    None => println!("sim: stuck after {path}"),
                },
                SimSearch::NoneWithinDepth => println!("sim: none within depth {depth}"),
                SimSearch::BudgetExhausted => println!("sim: budget exhausted"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
