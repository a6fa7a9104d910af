//! Text format for machines and Graphviz rendering.

pub mod dot;
pub mod format;

pub use dot::{candidates_to_dot, equations_to_dot, render_analysis, tree_to_dot};
pub use format::{parse, parse_one, serialize, NamedMachine, ParseError};
