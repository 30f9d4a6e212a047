//! Tag streams, unranked and binary trees, bottom-up/top-down tree automata
//! and the streaming passes that run them against a metered tape.

mod automaton;
mod events;
mod stream;
mod tree;

use thiserror::Error;

pub use automaton::{
    run_bottom_up_reference, select_reference, BottomUpBDTA, SelectionPair, Side, WILDCARD,
};
pub use events::{expand_bachelors, lex, tokenize, Event, EventKind, TagAlphabet};
pub use stream::{
    select_ascending, select_descending, stream_filter_backward, stream_filter_forward,
    FilterBackward, FilterForward, SelectAscending, SelectDescending,
};
pub use tree::{bin_encode, BinTree, Encoding, UnrankedTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("offset {offset}: {message}")]
    Lex { offset: usize, message: String },
    #[error("token {position}: {message}")]
    Malformed { position: usize, message: String },
    #[error("empty document")]
    Empty,
    #[error("automaton line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("automaton: {0}")]
    Automaton(String),
    #[error("tag {0:?} is not covered by the automaton")]
    UnknownLabel(String),
}
