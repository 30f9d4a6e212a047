use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::arena::Arena;
use super::program::{Action, ControlProgram, Halt, Output, StateId};
use super::tape::{Direction, ExternalTape, HeadError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RunError {
    #[error("run exceeded the step limit of {limit}")]
    StepLimit { limit: u64 },
    #[error("step {step}: {source}")]
    Head {
        step: u64,
        #[source]
        source: HeadError,
    },
    #[error("step {step}: random access with an empty address register")]
    EmptyAddress { step: u64 },
    #[error("tape alphabet differs from the program's alphabet")]
    AlphabetMismatch,
}

impl RunError {
    /// True when the program tried to write a read-only tape.
    pub fn is_read_only_violation(&self) -> bool {
        matches!(
            self,
            RunError::Head {
                source: HeadError::ReadOnly { .. },
                ..
            }
        )
    }
}

/// Resource record of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: u64,
    pub reversals: u64,
    pub r_used: u64,
    pub s_peak: u64,
    pub q_used: u64,
    pub external_writes: u64,
    pub halted: Halt,
    pub steps: u64,
}

impl RunReport {
    pub fn accepted(&self) -> bool {
        self.halted == Halt::Accept
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Head motion caused by one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    Moved { from: usize, to: usize },
    Seeked { from: usize, to: usize },
    Halted(Halt),
}

/// A program bound to a tape and an arena, executed one step at a time.
#[derive(Debug, Clone)]
pub struct Machine<P> {
    program: P,
    tape: ExternalTape,
    arena: Arena,
    control: StateId,
    output: Output,
    steps: u64,
    halted: Option<Halt>,
}

/// Finished run.
#[derive(Debug, Clone)]
pub struct Run {
    pub output: Output,
    pub report: RunReport,
    pub tape: ExternalTape,
}

pub fn default_step_limit(n: usize) -> u64 {
    let n = n as u64;
    (64 * n * (n + 2)).max(64)
}

impl<P: ControlProgram> Machine<P> {
    pub fn new(program: P, tape: ExternalTape) -> Result<Self, RunError> {
        if **tape.alphabet() != *program.alphabet() {
            return Err(RunError::AlphabetMismatch);
        }
        let mut arena = Arena::new(program.internal_alphabet());
        program.prepare(&mut arena);
        let control = program.start();
        Ok(Machine {
            program,
            tape,
            arena,
            control,
            output: Output::default(),
            steps: 0,
            halted: None,
        })
    }

    /// Resumes a machine from a transferred configuration.
    pub(crate) fn resume(
        program: P,
        tape: ExternalTape,
        arena: Arena,
        control: StateId,
    ) -> Self {
        Machine {
            program,
            tape,
            arena,
            control,
            output: Output::default(),
            steps: 0,
            halted: None,
        }
    }

    pub fn program(&self) -> &P {
        &self.program
    }

    pub fn tape(&self) -> &ExternalTape {
        &self.tape
    }

    pub(crate) fn tape_mut(&mut self) -> &mut ExternalTape {
        &mut self.tape
    }

    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    pub(crate) fn set_configuration(&mut self, control: StateId, arena: Arena) {
        self.control = control;
        self.arena = arena;
    }

    pub fn control(&self) -> StateId {
        self.control
    }

    pub fn output(&self) -> &Output {
        &self.output
    }

    pub(crate) fn take_output(&mut self) -> Output {
        std::mem::take(&mut self.output)
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn halted(&self) -> Option<Halt> {
        self.halted
    }

    pub fn step(&mut self) -> Result<StepEvent, RunError> {
        if let Some(h) = self.halted {
            return Ok(StepEvent::Halted(h));
        }
        let step = self.steps;
        let head_err = |source| RunError::Head { step, source };
        let read = self.tape.read().map_err(head_err)?;
        let action = self
            .program
            .step(self.control, read, &mut self.arena, &mut self.output);
        self.steps += 1;
        let from = self.tape.head();
        match action {
            Action::Go { write, dir, next } => {
                if let Some(sym) = write {
                    self.tape.write(sym).map_err(head_err)?;
                }
                self.tape.shift(dir).map_err(head_err)?;
                self.control = next;
                Ok(StepEvent::Moved {
                    from,
                    to: self.tape.head(),
                })
            }
            Action::Seek { next } => {
                let addr = self
                    .arena
                    .take_address()
                    .ok_or(RunError::EmptyAddress { step })?;
                self.tape.seek(addr).map_err(head_err)?;
                self.control = next;
                Ok(StepEvent::Seeked {
                    from,
                    to: self.tape.head(),
                })
            }
            Action::Halt(h) => {
                self.halted = Some(h);
                Ok(StepEvent::Halted(h))
            }
        }
    }

    pub fn report(&self) -> RunReport {
        let reversals = self.tape.reversals();
        RunReport {
            n: self.tape.len() as u64,
            reversals,
            r_used: reversals + 1,
            s_peak: self.arena.peak() as u64,
            q_used: self.tape.random_accesses(),
            external_writes: self.tape.external_writes(),
            halted: self.halted.unwrap_or(Halt::Reject),
            steps: self.steps,
        }
    }

    /// Runs to completion.
    pub fn finish(mut self, step_limit: Option<u64>) -> Result<Run, RunError> {
        let limit = step_limit.unwrap_or_else(|| default_step_limit(self.tape.len()));
        while self.halted.is_none() {
            if self.steps >= limit {
                return Err(RunError::StepLimit { limit });
            }
            self.step()?;
        }
        let report = self.report();
        Ok(Run {
            output: self.output,
            report,
            tape: self.tape,
        })
    }
}

/// Executes `program` on `tape` until it halts.
///
/// `step_limit` defaults to `64·n·(n+2)` (at least 64).
pub fn run<P: ControlProgram>(
    program: P,
    tape: ExternalTape,
    step_limit: Option<u64>,
) -> Result<Run, RunError> {
    Machine::new(program, tape)?.finish(step_limit)
}

/// Crossing of the cell boundary between `p` and `p + 1`, if the move made one.
pub(crate) fn crossing(event: StepEvent, p: usize) -> Option<Direction> {
    match event {
        StepEvent::Moved { from, to } if from == p && to == p + 1 => Some(Direction::Right),
        StepEvent::Moved { from, to } if from == p + 1 && to == p => Some(Direction::Left),
        _ => None,
    }
}
