pub mod bench;
pub mod checker;
pub mod input_tree;
pub mod machine;
pub mod oracle;
pub mod parser_io;
pub mod simulation;
pub mod subtree;
pub mod witness;
