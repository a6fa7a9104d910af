//! Parametric benchmark machines and a timing harness.
//!
//! `M1` sends `a_0 … a_n` in sequence and then receives one of
//! `b_0 … b_m`; `M2` sends any single `a_i` and then receives any `b_j`.
//! `M1 ≤ M2` holds for every `n` and `m`.

use std::io::Write;
use std::time::Instant;

use thiserror::Error;

use crate::checker::{analyze, CheckDirection, VerdictValue};
use crate::machine::{Machine, RawMachine};
use crate::simulation::BuildLimits;

pub fn gen(n: usize, m: usize) -> (Machine, Machine) {
    assert!(n >= 1 && m >= 1, "benchmark parameters start at 1");
    let mut m1 = RawMachine::new("s0");
    for i in 0..=n {
        m1 = m1.send(&format!("s{i}"), &format!("a{i}"), &format!("s{}", i + 1));
    }
    let last = format!("s{}", n + 1);
    for j in 0..=m {
        m1 = m1.receive(&last, &format!("b{j}"), "s0");
    }
    let mut m2 = RawMachine::new("t0");
    for i in 0..=n {
        m2 = m2.send("t0", &format!("a{i}"), "t1");
    }
    for j in 0..=m {
        m2 = m2.receive("t1", &format!("b{j}"), "t0");
    }
    (
        m1.validate().expect("generated machine is valid"),
        m2.validate().expect("generated machine is valid"),
    )
}

/// Shape of the direct-direction analysis of `gen(n, m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    pub verdict: VerdictValue,
    pub nodes: usize,
    /// Simulation-tree depth in levels.
    pub sim_depth: usize,
    pub max_context_depth: usize,
    pub candidates: usize,
    /// Depth in levels of the deepest candidate subtree.
    pub candidate_depth: usize,
}

pub fn shape(n: usize, m: usize, limits: BuildLimits) -> Shape {
    let (m1, m2) = gen(n, m);
    let a = analyze(&m1, &m2, limits, CheckDirection::Direct);
    let cands = a.extraction.as_ref().map(|e| e.candidates.as_slice()).unwrap_or(&[]);
    let candidate_depth = cands
        .iter()
        .map(|c| {
            let base = a.tree.node(c.root()).depth;
            c.subtree
                .members()
                .iter()
                .map(|x| a.tree.node(*x).depth - base + 1)
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    Shape {
        verdict: a.verdict.value,
        nodes: a.tree.len(),
        sim_depth: a.tree.levels(),
        max_context_depth: a.tree.max_context_depth(),
        candidates: cands.len(),
        candidate_depth,
    }
}

/// One row of the benchmark CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub m: usize,
    pub verdict: VerdictValue,
    pub ms_mean: f64,
    pub ms_stddev: f64,
    pub nodes_peak: usize,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("bad grid specification {0:?}; expected n=A..B,m=C..D")]
    Grid(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parses `n=1..8,m=1..8` (bounds inclusive; a single value is allowed).
pub fn parse_grid(spec: &str) -> Result<Vec<(usize, usize)>, BenchError> {
    let bad = || BenchError::Grid(spec.to_string());
    let mut n_range = None;
    let mut m_range = None;
    for part in spec.split(',') {
        let (key, range) = part.trim().split_once('=').ok_or_else(bad)?;
        let (lo, hi) = match range.split_once("..") {
            Some((lo, hi)) => (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?),
            None => {
                let v: usize = range.parse().map_err(|_| bad())?;
                (v, v)
            }
        };
        if lo == 0 || lo > hi {
            return Err(bad());
        }
        match key.trim() {
            "n" => n_range = Some((lo, hi)),
            "m" => m_range = Some((lo, hi)),
            _ => return Err(bad()),
        }
    }
    let (n_range, m_range) = (n_range.ok_or_else(bad)?, m_range.ok_or_else(bad)?);
    let mut out = Vec::new();
    for n in n_range.0..=n_range.1 {
        for m in m_range.0..=m_range.1 {
            out.push((n, m));
        }
    }
    Ok(out)
}

/// Times `reps` direct checks of every grid cell.
pub fn run_suite(grid: &[(usize, usize)], reps: usize, limits: BuildLimits) -> Vec<Cell> {
    let reps = reps.max(1);
    grid.iter()
        .map(|&(n, m)| {
            let mut times = Vec::with_capacity(reps);
            let mut last = None;
            for _ in 0..reps {
                let start = Instant::now();
                let s = shape(n, m, limits);
                times.push(start.elapsed().as_secs_f64() * 1000.0);
                last = Some(s);
            }
            let s = last.expect("at least one repetition");
            let mean = times.iter().sum::<f64>() / reps as f64;
            let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / reps as f64;
            Cell {
                n,
                m,
                verdict: s.verdict,
                ms_mean: mean,
                ms_stddev: var.sqrt(),
                nodes_peak: s.nodes,
            }
        })
        .collect()
}

/// Writes `n,m,verdict,ms_mean,ms_stddev,nodes_peak`.
pub fn write_csv(cells: &[Cell], out: impl Write) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "m", "verdict", "ms_mean", "ms_stddev", "nodes_peak"])?;
    for c in cells {
        w.write_record([
            c.n.to_string(),
            c.m.to_string(),
            c.verdict.to_string(),
            format!("{:.3}", c.ms_mean),
            format!("{:.3}", c.ms_stddev),
            c.nodes_peak.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
