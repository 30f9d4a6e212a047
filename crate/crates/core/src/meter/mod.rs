//! Metered external-memory machines.
//!
//! A [`ControlProgram`] runs against an [`ExternalTape`] (sequential access,
//! every change of head direction counted) and an [`Arena`] of internal
//! cells (peak usage counted). The resulting [`RunReport`] is what budgets
//! are checked against.

mod alphabet;
mod arena;
mod budget;
mod machine;
mod program;
mod protocol;
mod random_access;
mod tape;

pub use alphabet::{ceil_log2, Alphabet, AlphabetError, Symbol};
pub use arena::{
    decode_records, decode_uint, encode_records, encode_uint, Arena, Cell, Reg, Snapshot,
    FIELD_SEP, RECORD_SEP,
};
pub use budget::{check_budget, Budget, BudgetError, BudgetVerdict, Dimension, Expr};
pub use machine::{default_step_limit, run, Machine, Run, RunError, RunReport, StepEvent};
pub use program::{Action, ControlProgram, Halt, Output, StateId};
pub use protocol::{extract_protocol, replay_protocol, Message, ProtocolError, ProtocolTranscript};
pub use random_access::{ra_equivalent_reversals, SeekAsWalk, SeekFixture, WALK_REGISTER_BASE};
pub use tape::{load_tape, Direction, ExternalTape, HeadError, Move, Read, TapeError};
