//! Hard-instance families, their document encodings and brute-force oracles.

mod chase;
mod disj;
mod relations;
mod sets_tree;

use thiserror::Error;

pub use chase::{
    chase_oracle, make_chase_string, parse_chase_string, FunctionTable, MAX_CHASE_WIDTH,
};
pub use disj::{disj_oracle, make_disj_string, BitSet};
pub use relations::{
    decode_relpair, encode_relpair, encode_tuple, join1_oracle, reduce_disj_to_join, Relation,
};
pub use sets_tree::{make_sets_tree, sets_tree_oracle, SetsTreeInstance, SETS_TREE_QUERY};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("x has {x} bits but y has {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("character {found:?} at offset {offset} is not a binary digit")]
    NotBinary { offset: usize, found: char },
    #[error("element {element} outside the universe 1..={n}")]
    Range { element: usize, n: usize },
    #[error("universe size must be at least 1")]
    EmptyUniverse,
    #[error("function table: {0}")]
    Table(String),
    #[error("token {position}: expected {expected}, found {found}")]
    Parse {
        position: usize,
        expected: &'static str,
        found: String,
    },
}

/// Splits an ASCII instance into one token per character.
pub fn char_tokens(s: &str) -> Vec<String> {
    s.chars().map(String::from).collect()
}
