//! Two-party protocols read off a metered run.
//!
//! Cut the input at a boundary `p`: the left party holds cells `1..=p`, the
//! right party the rest. Whenever the head crosses the cut, the party losing
//! the head ships the control state and a packed arena snapshot to the other
//! one, which then continues the run on its own half.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::alphabet::{ceil_log2, Symbol};
use super::arena::{Arena, Snapshot};
use super::machine::{crossing, default_step_limit, Machine, RunError, StepEvent};
use super::program::{ControlProgram, Halt, StateId};
use super::tape::{Direction, ExternalTape};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("random access at step {step} cannot be split between two parties")]
    UnsupportedSeek { step: u64 },
    #[error("boundary {boundary} outside 1..={len}")]
    Boundary { boundary: usize, len: usize },
    #[error("replay diverged from the transcript: {0}")]
    Integrity(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub direction: Direction,
    pub control: StateId,
    pub snapshot: Snapshot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub boundary: usize,
    pub messages: Vec<Message>,
    /// `ceil(log2 |Q|)`, charged once per message.
    pub state_bits: u32,
    pub total_bits: u64,
    pub outcome: Halt,
    pub output: Vec<Vec<u64>>,
    /// Scans of the run that produced the transcript.
    pub r_used: u64,
    pub s_peak: u64,
}

impl ProtocolTranscript {
    /// Bits of the largest arena snapshot that could be shipped: `8·ceil(s_peak·bits/8)`.
    pub fn peak_snapshot_bits(&self, cell_bits: u32) -> u64 {
        8 * (self.s_peak * cell_bits as u64).div_ceil(8)
    }
}

fn check_boundary(boundary: usize, len: usize) -> Result<(), ProtocolError> {
    if boundary == 0 || boundary > len {
        Err(ProtocolError::Boundary { boundary, len })
    } else {
        Ok(())
    }
}

/// Runs `program` on `tape` and records one message per crossing of the
/// boundary between cells `boundary` and `boundary + 1`.
pub fn extract_protocol<P: ControlProgram>(
    program: P,
    tape: ExternalTape,
    boundary: usize,
) -> Result<ProtocolTranscript, ProtocolError> {
    check_boundary(boundary, tape.len())?;
    let state_bits = ceil_log2(program.states() as u64);
    let limit = default_step_limit(tape.len());
    let mut m = Machine::new(program, tape)?;
    let mut messages = Vec::new();
    let outcome = loop {
        if m.steps() >= limit {
            return Err(RunError::StepLimit { limit }.into());
        }
        let ev = m.step()?;
        match ev {
            StepEvent::Halted(h) => break h,
            StepEvent::Seeked { .. } => {
                return Err(ProtocolError::UnsupportedSeek { step: m.steps() })
            }
            StepEvent::Moved { .. } => {
                if let Some(direction) = crossing(ev, boundary) {
                    messages.push(Message {
                        direction,
                        control: m.control(),
                        snapshot: m.arena().snapshot(),
                    });
                }
            }
        }
    };
    let report = m.report();
    let total_bits = messages
        .iter()
        .map(|msg| state_bits as u64 + msg.snapshot.bits())
        .sum();
    Ok(ProtocolTranscript {
        boundary,
        messages,
        state_bits,
        total_bits,
        outcome,
        output: m.output().records().to_vec(),
        r_used: report.r_used,
        s_peak: report.s_peak,
    })
}

/// Replays a transcript with two parties that each see only their half of
/// the input. Returns whether the split run reproduces the monolithic
/// outcome and output; any divergence of the exchanged messages is an
/// integrity error.
pub fn replay_protocol<P: ControlProgram>(
    program: &P,
    left: &[Symbol],
    right: &[Symbol],
    writable: bool,
    transcript: &ProtocolTranscript,
) -> Result<bool, ProtocolError> {
    let p = left.len();
    let n = p + right.len();
    check_boundary(p, n)?;
    if transcript.boundary != p {
        return Err(ProtocolError::Integrity(format!(
            "transcript boundary {} but left part has {p} cells",
            transcript.boundary
        )));
    }
    let alphabet = program.alphabet();
    // Each party pads the other half with a placeholder it is never allowed to read.
    let mut alice_cells = left.to_vec();
    alice_cells.resize(n, 0);
    let mut bob_cells = vec![0; p];
    bob_cells.extend_from_slice(right);
    let mut alice_tape = ExternalTape::from_symbols(alphabet.clone(), alice_cells, writable)
        .map_err(|e| ProtocolError::Integrity(e.to_string()))?;
    alice_tape.restrict(1, p);
    let mut bob_tape = ExternalTape::from_symbols(alphabet, bob_cells, writable)
        .map_err(|e| ProtocolError::Integrity(e.to_string()))?;
    bob_tape.restrict(p + 1, n);

    let internal = program.internal_alphabet();
    let mut parties = [
        Machine::new(program, alice_tape)?,
        Machine::resume(program, bob_tape, Arena::new(internal), program.start()),
    ];
    let mut active = 0usize;
    let mut next_msg = 0usize;
    let mut output = super::program::Output::default();
    let limit = default_step_limit(n);
    let mut steps = 0u64;
    let outcome = loop {
        if steps >= limit {
            return Err(RunError::StepLimit { limit }.into());
        }
        steps += 1;
        let ev = parties[active].step().map_err(|e| match e {
            RunError::Head { .. } => ProtocolError::Integrity(e.to_string()),
            other => ProtocolError::Run(other),
        })?;
        match ev {
            StepEvent::Halted(h) => break h,
            StepEvent::Seeked { .. } => return Err(ProtocolError::UnsupportedSeek { step: steps }),
            StepEvent::Moved { to, .. } => {
                let Some(direction) = crossing(ev, p) else {
                    continue;
                };
                let sender = &mut parties[active];
                let msg = Message {
                    direction,
                    control: sender.control(),
                    snapshot: sender.arena().snapshot(),
                };
                output.extend(sender.take_output());
                match transcript.messages.get(next_msg) {
                    Some(expected) if *expected == msg => {}
                    Some(_) => {
                        return Err(ProtocolError::Integrity(format!(
                            "message {next_msg} differs from the transcript"
                        )))
                    }
                    None => {
                        return Err(ProtocolError::Integrity(format!(
                            "replay sent more than the {} transcript messages",
                            transcript.messages.len()
                        )))
                    }
                }
                next_msg += 1;
                active = 1 - active;
                let receiver = &mut parties[active];
                receiver.set_configuration(msg.control, Arena::restore(internal, &msg.snapshot));
                receiver.tape_mut().place(to, direction);
            }
        }
    };
    output.extend(parties[active].take_output());
    if next_msg != transcript.messages.len() {
        return Err(ProtocolError::Integrity(format!(
            "replay sent {next_msg} of {} transcript messages",
            transcript.messages.len()
        )));
    }
    Ok(outcome == transcript.outcome && output.records() == transcript.output.as_slice())
}
