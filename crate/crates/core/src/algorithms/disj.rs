//! Deciding set disjointness on `x#y`.

use std::sync::Arc;

use crate::meter::{Action, Alphabet, Arena, ControlProgram, Output, Read, Reg, StateId, Symbol};

const ZERO: Symbol = 0;
const ONE: Symbol = 1;
const HASH: Symbol = 2;

/// Tape alphabet `{0, 1, #}` shared by the disjointness deciders.
pub fn disj_alphabet() -> Arc<Alphabet> {
    Arc::new(Alphabet::from_chars("01#").expect("distinct symbols"))
}

fn bit(sym: Option<Symbol>) -> Option<u32> {
    match sym {
        Some(ZERO) => Some(0),
        Some(ONE) => Some(1),
        _ => None,
    }
}

/// Copies `x` into the arena during a single scan and checks `y` against it.
#[derive(Debug, Clone)]
pub struct DisjTrivial {
    sigma: Arc<Alphabet>,
}

impl Default for DisjTrivial {
    fn default() -> Self {
        DisjTrivial {
            sigma: disj_alphabet(),
        }
    }
}

pub fn disj_trivial() -> DisjTrivial {
    DisjTrivial::default()
}

const QUEUE: Reg = Reg(0);

impl ControlProgram for DisjTrivial {
    fn alphabet(&self) -> Arc<Alphabet> {
        self.sigma.clone()
    }

    fn states(&self) -> u32 {
        2
    }

    fn internal_alphabet(&self) -> u32 {
        2
    }

    // 0: reading x, 1: reading y.
    fn step(&self, control: StateId, read: Read, mem: &mut Arena, _out: &mut Output) -> Action {
        match (control, read.symbol) {
            (0, Some(HASH)) if !mem.is_empty(QUEUE) => Action::right(1),
            (0, s) => match bit(s) {
                Some(b) => {
                    mem.push(QUEUE, b);
                    Action::right(0)
                }
                None => Action::reject(),
            },
            (_, None) if mem.is_empty(QUEUE) => Action::accept(),
            (_, s) => match (bit(s), mem.pop_front(QUEUE)) {
                (Some(1), Some(1)) => Action::reject(),
                (Some(_), Some(_)) => Action::right(1),
                _ => Action::reject(),
            },
        }
    }
}

/// Checks `x` against `y` a window of `c` positions at a time, walking back
/// and forth between the two halves.
#[derive(Debug, Clone)]
pub struct DisjChunked {
    sigma: Arc<Alphabet>,
    chunk: u64,
}

pub fn disj_chunked(c: usize) -> DisjChunked {
    assert!(c >= 1, "chunk size must be positive");
    DisjChunked {
        sigma: disj_alphabet(),
        chunk: c as u64,
    }
}

impl DisjChunked {
    pub fn chunk(&self) -> usize {
        self.chunk as usize
    }
}

const POS: Reg = Reg(0);
const LEN: Reg = Reg(1);
const BASE: Reg = Reg(2);
const CHUNK: Reg = Reg(3);

const FIRST_X: StateId = 0;
const FIRST_Y: StateId = 1;
const BACK: StateId = 2;
const ROUND: StateId = 3;

impl DisjChunked {
    fn advance(mem: &mut Arena, pos: u64, next: StateId) -> Action {
        mem.set_uint(POS, pos + 1);
        Action::right(next)
    }

    fn conflict(mem: &Arena, j: u64, b: u32) -> bool {
        b == 1 && mem.cells(CHUNK).get(j as usize - 1) == Some(&1)
    }

    /// Called on the last cell of a y-window: finish or head back for the next window.
    fn window_done(&self, mem: &mut Arena, i: u64, len: u64, pos: u64) -> Action {
        if i >= len {
            return Action::accept();
        }
        let base = mem.get_uint(BASE) + self.chunk;
        mem.set_uint(BASE, base);
        mem.clear(CHUNK);
        mem.set_uint(POS, pos - 1);
        Action::left(BACK)
    }
}

impl ControlProgram for DisjChunked {
    fn alphabet(&self) -> Arc<Alphabet> {
        self.sigma.clone()
    }

    fn states(&self) -> u32 {
        4
    }

    fn internal_alphabet(&self) -> u32 {
        2
    }

    fn prepare(&self, mem: &mut Arena) {
        mem.set_uint(POS, 1);
    }

    fn step(&self, control: StateId, read: Read, mem: &mut Arena, _out: &mut Output) -> Action {
        let pos = mem.get_uint(POS);
        match control {
            FIRST_X => match (read.symbol, bit(read.symbol)) {
                (Some(HASH), _) if pos > 1 => {
                    mem.set_uint(LEN, pos - 1);
                    Self::advance(mem, pos, FIRST_Y)
                }
                (_, Some(b)) => {
                    if pos <= self.chunk {
                        mem.push(CHUNK, b);
                    }
                    Self::advance(mem, pos, FIRST_X)
                }
                _ => Action::reject(),
            },
            FIRST_Y => {
                let len = mem.get_uint(LEN);
                let i = pos - len - 1;
                match bit(read.symbol) {
                    Some(b) => {
                        if i <= self.chunk && Self::conflict(mem, i, b) {
                            return Action::reject();
                        }
                        Self::advance(mem, pos, FIRST_Y)
                    }
                    None if read.symbol.is_none() && i - 1 == len => {
                        if len <= self.chunk {
                            return Action::accept();
                        }
                        mem.set_uint(BASE, self.chunk);
                        mem.clear(CHUNK);
                        mem.set_uint(POS, pos - 1);
                        Action::left(BACK)
                    }
                    None => Action::reject(),
                }
            }
            BACK => {
                if pos == mem.get_uint(BASE) + 1 {
                    Action::stay(ROUND)
                } else {
                    mem.set_uint(POS, pos - 1);
                    Action::left(BACK)
                }
            }
            _ => {
                let len = mem.get_uint(LEN);
                let base = mem.get_uint(BASE);
                if pos <= len + 1 {
                    if pos <= base + self.chunk && pos <= len {
                        mem.push(CHUNK, bit(read.symbol).unwrap_or(0));
                    }
                    return Self::advance(mem, pos, ROUND);
                }
                let i = pos - len - 1;
                if i <= base {
                    return Self::advance(mem, pos, ROUND);
                }
                let j = i - base;
                if Self::conflict(mem, j, bit(read.symbol).unwrap_or(0)) {
                    return Action::reject();
                }
                if j == self.chunk || i == len {
                    self.window_done(mem, i, len, pos)
                } else {
                    Self::advance(mem, pos, ROUND)
                }
            }
        }
    }
}
