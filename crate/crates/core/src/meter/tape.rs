use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::alphabet::{Alphabet, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TapeError {
    #[error("token {token:?} at position {position} is not in the alphabet")]
    UnknownToken { position: usize, token: String },
    #[error("symbol {symbol} at position {position} is outside an alphabet of {size} tokens")]
    UnknownSymbol {
        position: usize,
        symbol: Symbol,
        size: usize,
    },
}

/// Direction of the most recent head movement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    None,
    Left,
    Right,
}

/// Head movement requested by one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Right,
    Stay,
}

/// What the machine sees under the external head.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Read {
    /// `None` on the blank cell just past the input.
    pub symbol: Option<Symbol>,
    /// The head is on cell 1; moving left from here is an error.
    pub at_start: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeadError {
    #[error("head cannot move left of cell 1")]
    Underflow,
    #[error("head cannot move right of cell {limit}")]
    Overflow { limit: usize },
    #[error("write attempted on a read-only tape at cell {position}")]
    ReadOnly { position: usize },
    #[error("write attempted past the end of the input at cell {position}")]
    WriteOnBlank { position: usize },
    #[error("seek target {address} outside 1..={len}")]
    SeekOutOfRange { address: u64, len: usize },
    #[error("cell {position} is not visible to this party")]
    Hidden { position: usize },
}

/// The external memory tape: cells are 1-based; cell `len()+1` is a blank.
#[derive(Debug, Clone)]
pub struct ExternalTape {
    alphabet: Arc<Alphabet>,
    cells: Vec<Symbol>,
    head: usize,
    last_direction: Direction,
    reversals: u64,
    random_accesses: u64,
    external_writes: u64,
    writable: bool,
    visible: Option<(usize, usize)>,
}

/// Builds a tape from textual tokens; the head starts on cell 1 with all counters at zero.
pub fn load_tape<S: AsRef<str>>(
    alphabet: Arc<Alphabet>,
    tokens: &[S],
    writable: bool,
) -> Result<ExternalTape, TapeError> {
    let cells = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| {
            alphabet
                .symbol(t.as_ref())
                .ok_or_else(|| TapeError::UnknownToken {
                    position: i + 1,
                    token: t.as_ref().to_string(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExternalTape::from_parts(alphabet, cells, writable))
}

impl ExternalTape {
    pub fn from_symbols(
        alphabet: Arc<Alphabet>,
        cells: Vec<Symbol>,
        writable: bool,
    ) -> Result<Self, TapeError> {
        if let Some((i, &s)) = cells
            .iter()
            .enumerate()
            .find(|(_, &s)| s as usize >= alphabet.len())
        {
            return Err(TapeError::UnknownSymbol {
                position: i + 1,
                symbol: s,
                size: alphabet.len(),
            });
        }
        Ok(Self::from_parts(alphabet, cells, writable))
    }

    fn from_parts(alphabet: Arc<Alphabet>, cells: Vec<Symbol>, writable: bool) -> Self {
        ExternalTape {
            alphabet,
            cells,
            head: 1,
            last_direction: Direction::None,
            reversals: 0,
            random_accesses: 0,
            external_writes: 0,
            writable,
            visible: None,
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn head(&self) -> usize {
        self.head
    }

    pub fn last_direction(&self) -> Direction {
        self.last_direction
    }

    pub fn reversals(&self) -> u64 {
        self.reversals
    }

    pub fn random_accesses(&self) -> u64 {
        self.random_accesses
    }

    pub fn external_writes(&self) -> u64 {
        self.external_writes
    }

    pub fn writable(&self) -> bool {
        self.writable
    }

    pub fn cells(&self) -> &[Symbol] {
        &self.cells
    }

    pub fn tokens(&self) -> Vec<&str> {
        self.cells.iter().map(|&s| self.alphabet.token(s)).collect()
    }

    /// Restricts reads and writes to cells `lo..=hi` (the blank past the end stays visible).
    pub(crate) fn restrict(&mut self, lo: usize, hi: usize) {
        self.visible = Some((lo, hi));
    }

    pub(crate) fn place(&mut self, head: usize, direction: Direction) {
        self.head = head;
        self.last_direction = direction;
    }

    fn check_visible(&self, position: usize) -> Result<(), HeadError> {
        match self.visible {
            Some((lo, hi)) if position <= self.cells.len() && (position < lo || position > hi) => {
                Err(HeadError::Hidden { position })
            }
            _ => Ok(()),
        }
    }

    pub fn read(&self) -> Result<Read, HeadError> {
        self.check_visible(self.head)?;
        Ok(Read {
            symbol: self.cells.get(self.head - 1).copied(),
            at_start: self.head == 1,
        })
    }

    pub fn write(&mut self, sym: Symbol) -> Result<(), HeadError> {
        if !self.writable {
            return Err(HeadError::ReadOnly {
                position: self.head,
            });
        }
        if self.head > self.cells.len() {
            return Err(HeadError::WriteOnBlank {
                position: self.head,
            });
        }
        self.check_visible(self.head)?;
        self.cells[self.head - 1] = sym;
        self.external_writes += 1;
        Ok(())
    }

    /// Moves the head, charging a reversal whenever the direction differs
    /// from the last non-stay direction.
    pub fn shift(&mut self, mv: Move) -> Result<(), HeadError> {
        let dir = match mv {
            Move::Stay => return Ok(()),
            Move::Left => {
                if self.head == 1 {
                    return Err(HeadError::Underflow);
                }
                self.head -= 1;
                Direction::Left
            }
            Move::Right => {
                if self.head > self.cells.len() {
                    return Err(HeadError::Overflow {
                        limit: self.cells.len() + 1,
                    });
                }
                self.head += 1;
                Direction::Right
            }
        };
        if self.last_direction != Direction::None && self.last_direction != dir {
            self.reversals += 1;
        }
        self.last_direction = dir;
        Ok(())
    }

    /// Random access: jumps to `address` and forgets the previous direction.
    pub fn seek(&mut self, address: u64) -> Result<(), HeadError> {
        if address == 0 || address as usize > self.cells.len() {
            return Err(HeadError::SeekOutOfRange {
                address,
                len: self.cells.len(),
            });
        }
        self.head = address as usize;
        self.random_accesses += 1;
        self.last_direction = Direction::None;
        Ok(())
    }
}
