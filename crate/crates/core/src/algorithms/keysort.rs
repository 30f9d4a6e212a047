//! Multi-pass selection sort that never writes the external tape: every
//! pass picks the next `b` smallest items and emits them at the turn.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::meter::{Action, Alphabet, Arena, ControlProgram, Output, Read, Reg, StateId};

use super::records::{self, record_alphabet, Syntax, Validated, BAR, SEMI};

/// Buffer of selected items (records register).
const BUF: Reg = Reg(10);
/// Sort key of the last emitted item; nothing smaller or equal is offered again.
const LAST: Reg = Reg(11);
const EMITTED: Reg = Reg(12);

/// Items are `sort key ++ payload`; only the first `key_len` fields are compared.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Selection {
    pub buffer: usize,
    pub key_len: usize,
}

impl Selection {
    fn cmp_keys(&self, a: &[u64], b: &[u64]) -> Ordering {
        a[..self.key_len].cmp(&b[..self.key_len])
    }

    /// Keeps `item` if it is among the `b` smallest not yet emitted.
    pub fn offer(&self, mem: &mut Arena, item: Vec<u64>) {
        if let Some(last) = mem.records(LAST).first() {
            if self.cmp_keys(&item, last) != Ordering::Greater {
                return;
            }
        }
        let mut buf = mem.records(BUF);
        if buf.len() == self.buffer
            && self.cmp_keys(&item, buf.last().expect("full buffer")) == Ordering::Greater
        {
            return;
        }
        let at = buf.partition_point(|x| self.cmp_keys(x, &item) == Ordering::Less);
        buf.insert(at, item);
        buf.truncate(self.buffer);
        mem.set_records(BUF, &buf);
    }

    /// Ends a pass: returns the buffered items in order and advances the bound.
    pub fn flush(&self, mem: &mut Arena) -> Vec<Vec<u64>> {
        let buf = mem.records(BUF);
        mem.clear(BUF);
        if let Some(last) = buf.last() {
            mem.set_records(LAST, &[last[..self.key_len].to_vec()]);
            let emitted = mem.get_uint(EMITTED) + buf.len() as u64;
            mem.set_uint(EMITTED, emitted);
        }
        buf
    }

    pub fn emitted(&self, mem: &Arena) -> u64 {
        mem.get_uint(EMITTED)
    }
}

const CUR: Reg = Reg(0);
const COUNT: Reg = Reg(1);
const ORD: Reg = Reg(2);

const FIRST_START: StateId = 0;
const FIRST_FIELD: StateId = 1;
const FIRST_COMMA: StateId = 2;
const FORWARD: StateId = 3;
const BACKWARD: StateId = 4;

/// Sorts flat records by their first field, ties kept in input order.
#[derive(Debug, Clone)]
pub struct KeySort {
    sigma: Arc<Alphabet>,
    select: Selection,
}

pub fn keysort_scan(b: usize) -> KeySort {
    assert!(b >= 1, "buffer must hold at least one tuple");
    KeySort {
        sigma: record_alphabet(),
        select: Selection {
            buffer: b,
            key_len: 2,
        },
    }
}

impl KeySort {
    pub fn buffer(&self) -> usize {
        self.select.buffer
    }

    fn offer_record(&self, mem: &mut Arena, backward: bool) {
        let ord = mem.get_uint(ORD);
        let ord = if backward { ord - 1 } else { ord + 1 };
        mem.set_uint(ORD, ord);
        let rec = records::take_record(mem, CUR, backward);
        let mut item = vec![rec[0], ord];
        item.extend(rec);
        self.select.offer(mem, item);
    }

    /// Emits the pass's selection; `None` when everything has been output.
    fn end_pass(&self, mem: &mut Arena, out: &mut Output) -> Option<()> {
        for item in self.select.flush(mem) {
            out.emit(&item[2..]);
        }
        if self.select.emitted(mem) == mem.get_uint(COUNT) {
            None
        } else {
            Some(())
        }
    }
}

impl ControlProgram for KeySort {
    fn alphabet(&self) -> Arc<Alphabet> {
        self.sigma.clone()
    }

    fn states(&self) -> u32 {
        5
    }

    fn internal_alphabet(&self) -> u32 {
        4
    }

    fn prepare(&self, mem: &mut Arena) {
        mem.set_uint(COUNT, 0);
        mem.set_uint(ORD, 0);
    }

    fn step(&self, control: StateId, read: Read, mem: &mut Arena, out: &mut Output) -> Action {
        match control {
            FIRST_START | FIRST_FIELD | FIRST_COMMA => {
                let Some(sym) = read.symbol else {
                    if control != FIRST_START {
                        return Action::reject();
                    }
                    return match self.end_pass(mem, out) {
                        None => Action::done(),
                        Some(()) => {
                            mem.set_uint(ORD, mem.get_uint(COUNT) + 1);
                            Action::left(BACKWARD)
                        }
                    };
                };
                let syntax = [Syntax::Start, Syntax::Field, Syntax::Comma][control as usize];
                match records::validate(syntax, sym) {
                    Validated::Invalid => Action::reject(),
                    Validated::Continue(next) => {
                        records::feed(mem, CUR, sym);
                        Action::right(next as StateId)
                    }
                    Validated::RecordEnd => {
                        mem.set_uint(COUNT, mem.get_uint(COUNT) + 1);
                        self.offer_record(mem, false);
                        Action::right(FIRST_START)
                    }
                }
            }
            FORWARD => match read.symbol {
                None => match self.end_pass(mem, out) {
                    None => Action::done(),
                    Some(()) => {
                        mem.set_uint(ORD, mem.get_uint(COUNT) + 1);
                        Action::left(BACKWARD)
                    }
                },
                Some(SEMI) => {
                    self.offer_record(mem, false);
                    Action::right(FORWARD)
                }
                Some(sym) => {
                    records::feed(mem, CUR, sym);
                    Action::right(FORWARD)
                }
            },
            _ => {
                let sym = read.symbol.unwrap_or(BAR);
                if sym == SEMI {
                    if !mem.is_empty(CUR) {
                        self.offer_record(mem, true);
                    }
                } else {
                    records::feed(mem, CUR, sym);
                }
                if !read.at_start {
                    return Action::left(BACKWARD);
                }
                if !mem.is_empty(CUR) {
                    self.offer_record(mem, true);
                }
                match self.end_pass(mem, out) {
                    None => Action::done(),
                    Some(()) => {
                        mem.set_uint(ORD, 0);
                        Action::stay(FORWARD)
                    }
                }
            }
        }
    }
}
