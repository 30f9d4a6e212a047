//! Core XPath over the child, parent, descendant and ancestor axes: parsing,
//! a set-valued reference evaluator, and compilation of the downward
//! fragment into tree automata.

mod ast;
mod compile;
mod eval;

use thiserror::Error;

use crate::treelang::TreeError;

pub use ast::{parse_corexpath, random_query, Axis, CoreXPath, LocationPath, NodeTest, Pred, Step};
pub use compile::{compile_filter, compile_selector};
pub use eval::{eval_reference, NodeSet};

/// Axis names that exist in XPath but have no semantics here.
pub const UNSUPPORTED_AXES: [&str; 9] = [
    "self",
    "descendant-or-self",
    "ancestor-or-self",
    "following",
    "following-sibling",
    "preceding",
    "preceding-sibling",
    "attribute",
    "namespace",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum XPathError {
    #[error("offset {position}: expected {expected}")]
    Syntax { position: usize, expected: &'static str },
    #[error("offset {position}: axis {name:?} is not supported")]
    UnsupportedAxis { position: usize, name: String },
    #[error("not compilable: {0}")]
    NotCompilable(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
}
