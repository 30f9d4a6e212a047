//! Random access and its cost in ordinary scans.

use std::sync::Arc;

use super::alphabet::Alphabet;
use super::arena::{Arena, Reg};
use super::machine::RunReport;
use super::program::{Action, ControlProgram, Output, StateId};
use super::tape::{Move, Read};

/// Scans needed by a machine without random access that simulates the run:
/// every seek becomes a walk costing at most two extra direction changes.
pub fn ra_equivalent_reversals(report: &RunReport) -> u64 {
    report.r_used + 2 * report.q_used
}

/// Seeks to each address in turn, reading one cell after every jump, then accepts.
#[derive(Debug, Clone)]
pub struct SeekFixture {
    alphabet: Arc<Alphabet>,
    addresses: Vec<u64>,
}

impl SeekFixture {
    pub fn new(alphabet: Arc<Alphabet>, addresses: Vec<u64>) -> Self {
        SeekFixture {
            alphabet,
            addresses,
        }
    }
}

// Control: 2·i = about to seek to address i, 2·i+1 = just landed.
impl ControlProgram for SeekFixture {
    fn alphabet(&self) -> Arc<Alphabet> {
        self.alphabet.clone()
    }

    fn states(&self) -> u32 {
        2 * self.addresses.len() as u32 + 1
    }

    fn internal_alphabet(&self) -> u32 {
        2
    }

    fn step(&self, control: StateId, _read: Read, mem: &mut Arena, _out: &mut Output) -> Action {
        let i = (control / 2) as usize;
        if control % 2 == 1 {
            return Action::right(control + 1);
        }
        match self.addresses.get(i) {
            Some(&addr) => {
                mem.set_address(addr);
                Action::Seek { next: control + 1 }
            }
            None => Action::accept(),
        }
    }
}

/// First register reserved by [`SeekAsWalk`]; wrapped programs must stay below it.
pub const WALK_REGISTER_BASE: u16 = 200;
const POS: Reg = Reg(WALK_REGISTER_BASE);
const TARGET: Reg = Reg(WALK_REGISTER_BASE + 1);

/// Rewrites every seek of the wrapped program into a cell-by-cell walk.
///
/// The head position is kept in the arena so that the walk knows where it
/// is; this costs `O(log n)` extra cells.
#[derive(Debug, Clone)]
pub struct SeekAsWalk<P> {
    inner: P,
}

impl<P> SeekAsWalk<P> {
    pub fn new(inner: P) -> Self {
        SeekAsWalk { inner }
    }
}

impl<P: ControlProgram> ControlProgram for SeekAsWalk<P> {
    fn alphabet(&self) -> Arc<Alphabet> {
        self.inner.alphabet()
    }

    // Inner state `q` maps to `2q` (running) and `2q+1` (walking before resuming in `q`).
    fn states(&self) -> u32 {
        2 * self.inner.states()
    }

    fn start(&self) -> StateId {
        2 * self.inner.start()
    }

    fn internal_alphabet(&self) -> u32 {
        self.inner.internal_alphabet()
    }

    fn prepare(&self, mem: &mut Arena) {
        self.inner.prepare(mem);
        mem.set_uint(POS, 1);
    }

    fn step(&self, control: StateId, read: Read, mem: &mut Arena, out: &mut Output) -> Action {
        let pos = mem.get_uint(POS);
        if control % 2 == 1 {
            let target = mem.get_uint(TARGET);
            let dir = match pos.cmp(&target) {
                std::cmp::Ordering::Less => Move::Right,
                std::cmp::Ordering::Greater => Move::Left,
                std::cmp::Ordering::Equal => {
                    mem.clear(TARGET);
                    return self.step(control - 1, read, mem, out);
                }
            };
            mem.set_uint(POS, step_pos(pos, dir));
            return Action::go(dir, control);
        }
        match self.inner.step(control / 2, read, mem, out) {
            Action::Go { write, dir, next } => {
                mem.set_uint(POS, step_pos(pos, dir));
                Action::Go {
                    write,
                    dir,
                    next: 2 * next,
                }
            }
            Action::Seek { next } => {
                let target = mem.take_address().unwrap_or(0);
                mem.set_uint(TARGET, target);
                Action::stay(2 * next + 1)
            }
            halt @ Action::Halt(_) => halt,
        }
    }
}

fn step_pos(pos: u64, dir: Move) -> u64 {
    match dir {
        Move::Right => pos + 1,
        Move::Left => pos.saturating_sub(1),
        Move::Stay => pos,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meter::{load_tape, run, Halt};

    fn report(r_used: u64, q_used: u64) -> RunReport {
        RunReport {
            n: 10,
            reversals: r_used - 1,
            r_used,
            s_peak: 0,
            q_used,
            external_writes: 0,
            halted: Halt::Accept,
            steps: 0,
        }
    }

    #[test]
    fn equivalent_reversal_examples() {
        assert_eq!(ra_equivalent_reversals(&report(1, 0)), 1);
        assert_eq!(ra_equivalent_reversals(&report(2, 3)), 8);
        assert_eq!(ra_equivalent_reversals(&report(1, 1)), 3);
    }

    #[test]
    fn walking_never_exceeds_the_charge() {
        let sigma = Arc::new(Alphabet::from_chars("01").unwrap());
        let tokens = vec!["0"; 12];
        for addrs in [vec![5, 1, 8, 3], vec![12, 1], vec![2, 2, 2], vec![]] {
            let fixture = SeekFixture::new(sigma.clone(), addrs.clone());
            let tape = load_tape(sigma.clone(), &tokens, false).unwrap();
            let direct = run(&fixture, tape.clone(), None).unwrap().report;
            assert_eq!(direct.q_used, addrs.len() as u64);
            let walked = run(SeekAsWalk::new(&fixture), tape, None).unwrap().report;
            assert_eq!(walked.q_used, 0);
            assert_eq!(walked.halted, Halt::Accept);
            assert!(walked.r_used <= ra_equivalent_reversals(&direct));
        }
    }
}
