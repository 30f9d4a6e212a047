use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::alphabet::{Alphabet, Symbol};
use super::arena::Arena;
use super::tape::{Move, Read};

/// Control state identifier; programs use `0..states()`.
pub type StateId = u32;

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Halt {
    Accept,
    Reject,
    OutputComplete,
}

/// Result of one step of a control program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Go {
        write: Option<Symbol>,
        dir: Move,
        next: StateId,
    },
    /// Enter the random-access state: jump to the address held in the arena.
    Seek { next: StateId },
    Halt(Halt),
}

impl Action {
    pub fn right(next: StateId) -> Self {
        Action::Go {
            write: None,
            dir: Move::Right,
            next,
        }
    }

    pub fn left(next: StateId) -> Self {
        Action::Go {
            write: None,
            dir: Move::Left,
            next,
        }
    }

    pub fn stay(next: StateId) -> Self {
        Action::Go {
            write: None,
            dir: Move::Stay,
            next,
        }
    }

    pub fn go(dir: Move, next: StateId) -> Self {
        Action::Go {
            write: None,
            dir,
            next,
        }
    }

    pub fn write(sym: Symbol, dir: Move, next: StateId) -> Self {
        Action::Go {
            write: Some(sym),
            dir,
            next,
        }
    }

    pub fn accept() -> Self {
        Action::Halt(Halt::Accept)
    }

    pub fn reject() -> Self {
        Action::Halt(Halt::Reject)
    }

    pub fn done() -> Self {
        Action::Halt(Halt::OutputComplete)
    }
}

/// The write-only output tape. Each item is one record of naturals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Output {
    records: Vec<Vec<u64>>,
}

impl Output {
    pub fn emit(&mut self, rec: &[u64]) {
        self.records.push(rec.to_vec());
    }

    pub fn records(&self) -> &[Vec<u64>] {
        &self.records
    }

    pub fn into_records(self) -> Vec<Vec<u64>> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub(crate) fn extend(&mut self, other: Output) {
        self.records.extend(other.records);
    }
}

/// A deterministic machine with finite control whose only mutable state is
/// its control state and its [`Arena`].
///
/// `step` must be a pure function of `(control, read, arena)`; protocol
/// extraction and replay rely on this.
pub trait ControlProgram {
    /// External tape alphabet.
    fn alphabet(&self) -> Arc<Alphabet>;

    /// Number of control states `|Q|`.
    fn states(&self) -> u32;

    fn start(&self) -> StateId {
        0
    }

    /// Size of the internal cell alphabet.
    fn internal_alphabet(&self) -> u32;

    /// Preloads the arena before the first step (certificates, constants).
    fn prepare(&self, _mem: &mut Arena) {}

    fn step(&self, control: StateId, read: Read, mem: &mut Arena, out: &mut Output) -> Action;
}

impl<P: ControlProgram + ?Sized> ControlProgram for &P {
    fn alphabet(&self) -> Arc<Alphabet> {
        (**self).alphabet()
    }
    fn states(&self) -> u32 {
        (**self).states()
    }
    fn start(&self) -> StateId {
        (**self).start()
    }
    fn internal_alphabet(&self) -> u32 {
        (**self).internal_alphabet()
    }
    fn prepare(&self, mem: &mut Arena) {
        (**self).prepare(mem)
    }
    fn step(&self, control: StateId, read: Read, mem: &mut Arena, out: &mut Output) -> Action {
        (**self).step(control, read, mem, out)
    }
}

impl<P: ControlProgram + ?Sized> ControlProgram for Box<P> {
    fn alphabet(&self) -> Arc<Alphabet> {
        (**self).alphabet()
    }
    fn states(&self) -> u32 {
        (**self).states()
    }
    fn start(&self) -> StateId {
        (**self).start()
    }
    fn internal_alphabet(&self) -> u32 {
        (**self).internal_alphabet()
    }
    fn prepare(&self, mem: &mut Arena) {
        (**self).prepare(mem)
    }
    fn step(&self, control: StateId, read: Read, mem: &mut Arena, out: &mut Output) -> Action {
        (**self).step(control, read, mem, out)
    }
}
