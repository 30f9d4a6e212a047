//! Flat tuple records on the tape: binary fields separated by `,`, each
//! record closed by `;`, and `|` between the two relations of a join input.

use std::sync::Arc;

use thiserror::Error;

use crate::meter::{Alphabet, Arena, Cell, Reg, Symbol, FIELD_SEP};

pub const ZERO: Symbol = 0;
pub const ONE: Symbol = 1;
pub const COMMA: Symbol = 2;
pub const SEMI: Symbol = 3;
pub const BAR: Symbol = 4;

pub type Record = Vec<u64>;

pub fn record_alphabet() -> Arc<Alphabet> {
    Arc::new(Alphabet::from_chars("01,;|").expect("distinct symbols"))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecordError {
    #[error("offset {offset}: {message}")]
    Malformed { offset: usize, message: &'static str },
}

fn push_record(out: &mut String, rec: &[u64]) {
    for (i, f) in rec.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!("{f:b}"));
    }
    out.push(';');
}

pub fn encode_flat(records: &[Record]) -> String {
    let mut out = String::new();
    for r in records {
        push_record(&mut out, r);
    }
    out
}

/// `A records | B records`.
pub fn encode_join_input(a: &[Record], b: &[Record]) -> String {
    format!("{}|{}", encode_flat(a), encode_flat(b))
}

pub fn parse_flat(s: &str) -> Result<Vec<Record>, RecordError> {
    let mut out = Vec::new();
    let mut rec = Vec::new();
    let mut field: Option<u64> = None;
    for (offset, c) in s.char_indices() {
        let malformed = |message| RecordError::Malformed { offset, message };
        match c {
            '0' | '1' => {
                let v = field.unwrap_or(0);
                if v >> 63 != 0 {
                    return Err(malformed("field wider than 64 bits"));
                }
                field = Some(v << 1 | u64::from(c == '1'));
            }
            ',' | ';' => {
                rec.push(field.take().ok_or(malformed("empty field"))?);
                if c == ';' {
                    out.push(std::mem::take(&mut rec));
                }
            }
            _ => return Err(malformed("unexpected character")),
        }
    }
    if field.is_some() || !rec.is_empty() {
        return Err(RecordError::Malformed {
            offset: s.len(),
            message: "unterminated record",
        });
    }
    Ok(out)
}

pub fn parse_join_input(s: &str) -> Result<(Vec<Record>, Vec<Record>), RecordError> {
    let (a, b) = s.split_once('|').ok_or(RecordError::Malformed {
        offset: s.len(),
        message: "missing '|' between the relations",
    })?;
    let a = parse_flat(a)?;
    let b = parse_flat(b).map_err(|RecordError::Malformed { offset, message }| {
        RecordError::Malformed {
            offset: offset + a_len(s),
            message,
        }
    })?;
    Ok((a, b))
}

fn a_len(s: &str) -> usize {
    s.find('|').map_or(0, |i| i + 1)
}

/// Grammar position while validating a record stream in a forward scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Syntax {
    /// Between records.
    Start,
    /// Inside a field.
    Field,
    /// Just after a comma.
    Comma,
}

/// Outcome of feeding one symbol to the validator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validated {
    Continue(Syntax),
    RecordEnd,
    Invalid,
}

pub fn validate(state: Syntax, sym: Symbol) -> Validated {
    match (state, sym) {
        (_, ZERO | ONE) => Validated::Continue(Syntax::Field),
        (Syntax::Field, COMMA) => Validated::Continue(Syntax::Comma),
        (Syntax::Field, SEMI) => Validated::RecordEnd,
        _ => Validated::Invalid,
    }
}

/// Accumulates the raw cells of the record under the head in register `reg`.
///
/// Digits and commas are appended as read, so a backward scan collects the
/// record reversed; [`take_record`] undoes that.
pub fn feed(mem: &mut Arena, reg: Reg, sym: Symbol) {
    match sym {
        ZERO | ONE => mem.push(reg, sym as Cell),
        COMMA => mem.push(reg, FIELD_SEP),
        _ => {}
    }
}

/// Decodes and clears the record collected in `reg`.
pub fn take_record(mem: &mut Arena, reg: Reg, backward: bool) -> Record {
    let mut cells = mem.cells(reg).to_vec();
    if backward {
        cells.reverse();
    }
    mem.clear(reg);
    cells
        .split(|&c| c == FIELD_SEP)
        .map(crate::meter::decode_uint)
        .collect()
}
