//! Pointer chasing through a table `1^m # w_0 … w_{2^m-1}`.

use std::sync::Arc;

use rand::Rng;

use crate::instances::{FunctionTable, InstanceError, MAX_CHASE_WIDTH};
use crate::meter::{Action, Alphabet, Arena, ControlProgram, Output, Read, Reg, StateId, Symbol};

use super::disj::disj_alphabet;

const ZERO: Symbol = 0;
const ONE: Symbol = 1;
const HASH: Symbol = 2;

/// Chase tapes use the same `{0, 1, #}` alphabet as the disjointness instances.
pub fn chase_alphabet() -> Arc<Alphabet> {
    disj_alphabet()
}

const POS: Reg = Reg(0);
const M: Reg = Reg(1);
/// Block whose word is needed next.
const TARGET: Reg = Reg(2);
/// Bits of the word being read, one cell per bit.
const WORD: Reg = Reg(3);
/// Number of words already looked up after `w_0`.
const HOPS: Reg = Reg(4);
const VERDICT: Reg = Reg(5);
const CERT: Reg = Reg(6);
const FAILED: Reg = Reg(7);

const ONES: StateId = 0;
const BODY: StateId = 1;
const FORWARD: StateId = 2;
const BACKWARD: StateId = 3;

fn bit(sym: Option<Symbol>) -> Option<u32> {
    match sym {
        Some(ZERO) => Some(0),
        Some(ONE) => Some(1),
        _ => None,
    }
}

/// Where a body cell sits: `(block, offset)` for the word layout after `1^m#`.
fn locate(pos: u64, m: u64) -> (u64, u64) {
    let t = pos - m - 2;
    (t / m, t % m)
}

fn step_right(mem: &mut Arena, pos: u64, next: StateId) -> Action {
    mem.set_uint(POS, pos + 1);
    Action::right(next)
}

fn step_left(mem: &mut Arena, pos: u64, next: StateId) -> Action {
    mem.set_uint(POS, pos - 1);
    Action::left(next)
}

/// Handles the `1^m#` prefix. Returns the action once the prefix is decided.
fn prefix(read: Read, mem: &mut Arena, pos: u64) -> Option<Action> {
    match read.symbol {
        Some(ONE) => {
            let m = mem.get_uint(M) + 1;
            if m > MAX_CHASE_WIDTH as u64 {
                return Some(Action::reject());
            }
            mem.set_uint(M, m);
            Some(step_right(mem, pos, ONES))
        }
        Some(HASH) if pos > 1 => {
            let m = mem.get_uint(M) as usize;
            mem.set_cells(WORD, std::iter::repeat_n(0, m));
            Some(step_right(mem, pos, BODY))
        }
        _ => Some(Action::reject()),
    }
}

/// Deterministic chaser: follows `j_1 = w_0, j_{i+1} = w_{j_i}` while
/// sweeping, turning only when the next block lies behind the head.
#[derive(Debug, Clone)]
pub struct ChaseIndices {
    sigma: Arc<Alphabet>,
    k: u64,
}

pub fn chase_indices(k: usize) -> ChaseIndices {
    assert!(k >= 1, "chain length k must be positive");
    ChaseIndices {
        sigma: chase_alphabet(),
        k: k as u64,
    }
}

impl ChaseIndices {
    /// Consumes the completed word of block `block`, following the chain as
    /// far as it stays inside this block. Returns `true` once the final word
    /// has been checked.
    fn resolve(&self, mem: &mut Arena, block: u64) -> bool {
        let m = mem.get_uint(M);
        loop {
            let w = mem.get_uint(WORD);
            let hops = mem.get_uint(HOPS);
            if hops == self.k + 1 {
                mem.set_uint(VERDICT, u64::from(w == (1 << m) - 1));
                mem.clear(TARGET);
                return true;
            }
            mem.set_uint(HOPS, hops + 1);
            mem.set_uint(TARGET, w);
            if w != block {
                return false;
            }
        }
    }

    fn finish(mem: &Arena) -> Action {
        if mem.get_uint(VERDICT) == 1 {
            Action::accept()
        } else {
            Action::reject()
        }
    }

    fn chasing(mem: &Arena) -> bool {
        !mem.is_empty(TARGET)
    }
}

impl ControlProgram for ChaseIndices {
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
        mem.set_uint(TARGET, 0);
        mem.set_uint(HOPS, 0);
    }

    fn step(&self, control: StateId, read: Read, mem: &mut Arena, _out: &mut Output) -> Action {
        let pos = mem.get_uint(POS);
        if control == ONES {
            return prefix(read, mem, pos).expect("prefix always decides");
        }
        let m = mem.get_uint(M);
        if control == BODY && read.symbol.is_none() {
            // End of the validating sweep.
            if pos - m - 2 != m << m {
                return Action::reject();
            }
            if !Self::chasing(mem) {
                return Self::finish(mem);
            }
            return step_left(mem, pos, BACKWARD);
        }
        let b = match (control, bit(read.symbol)) {
            (_, Some(b)) => b,
            (BODY, None) => return Action::reject(),
            _ => 0,
        };
        let (block, offset) = locate(pos, m);
        let forward = control != BACKWARD;
        if Self::chasing(mem) && mem.get_uint(TARGET) == block {
            mem.set_at(WORD, offset as usize, b);
            let block_done = if forward { offset == m - 1 } else { offset == 0 };
            if block_done {
                let done = self.resolve(mem, block);
                if done && control != BODY {
                    return Self::finish(mem);
                }
                if !done && control != BODY {
                    let target = mem.get_uint(TARGET);
                    let behind = if forward { target < block } else { target > block };
                    if behind {
                        return if forward {
                            step_left(mem, pos, BACKWARD)
                        } else {
                            step_right(mem, pos, FORWARD)
                        };
                    }
                }
            }
        }
        if forward {
            step_right(mem, pos, control)
        } else {
            step_left(mem, pos, BACKWARD)
        }
    }
}

/// Nondeterministic chaser made deterministic by a guessed chain
/// `(j_1, …, j_{k+1})`, preloaded into the arena and checked in one scan.
#[derive(Debug, Clone)]
pub struct ChaseCertificate {
    sigma: Arc<Alphabet>,
    chain: Vec<u64>,
}

pub fn verify_chase_certificate(k: usize, chain: &[u64]) -> Result<ChaseCertificate, InstanceError> {
    if chain.len() != k + 1 {
        return Err(InstanceError::Table(format!(
            "certificate has {} indices, {} expected",
            chain.len(),
            k + 1
        )));
    }
    Ok(ChaseCertificate {
        sigma: chase_alphabet(),
        chain: chain.to_vec(),
    })
}

impl ChaseCertificate {
    /// Checks the word of `block` against every claim the certificate makes about it.
    fn check_block(mem: &mut Arena, block: u64) {
        let m = mem.get_uint(M);
        let w = mem.get_uint(WORD);
        let chain: Vec<u64> = mem.records(CERT).into_iter().map(|r| r[0]).collect();
        let mut ok = block != 0 || chain[0] == w;
        for (i, &j) in chain.iter().enumerate() {
            if j == block {
                let expected = chain.get(i + 1).copied().unwrap_or((1 << m) - 1);
                ok &= w == expected;
            }
        }
        if !ok {
            mem.set_uint(FAILED, 1);
        }
    }
}

impl ControlProgram for ChaseCertificate {
    fn alphabet(&self) -> Arc<Alphabet> {
        self.sigma.clone()
    }

    fn states(&self) -> u32 {
        2
    }

    fn internal_alphabet(&self) -> u32 {
        4
    }

    fn prepare(&self, mem: &mut Arena) {
        mem.set_uint(POS, 1);
        let recs: Vec<Vec<u64>> = self.chain.iter().map(|&j| vec![j]).collect();
        mem.set_records(CERT, &recs);
    }

    fn step(&self, control: StateId, read: Read, mem: &mut Arena, _out: &mut Output) -> Action {
        let pos = mem.get_uint(POS);
        if control == ONES {
            return prefix(read, mem, pos).expect("prefix always decides");
        }
        let m = mem.get_uint(M);
        let Some(b) = bit(read.symbol) else {
            let complete = read.symbol.is_none() && pos - m - 2 == m << m;
            let in_range = mem.records(CERT).iter().all(|r| r[0] < 1 << m);
            return if complete && in_range && mem.is_empty(FAILED) {
                Action::accept()
            } else {
                Action::reject()
            };
        };
        let (block, offset) = locate(pos, m);
        mem.set_at(WORD, offset as usize, b);
        if offset == m - 1 {
            Self::check_block(mem, block);
        }
        step_right(mem, pos, BODY)
    }
}

/// A table on which the deterministic chaser needs exactly `k` turns: the chain
/// alternates between low and high blocks after a first hop to the last block.
/// Requires `k ≤ 2^m - 2`.
pub fn zigzag_chase_table<R: Rng + ?Sized>(
    m: u32,
    k: usize,
    member: bool,
    rng: &mut R,
) -> Result<FunctionTable, InstanceError> {
    let size = 1u64 << m;
    if k as u64 + 2 > size {
        return Err(InstanceError::Table(format!("k = {k} needs more than 2^{m} blocks")));
    }
    let top = size - 1;
    let mut values: Vec<u64> = (0..size).map(|_| rng.gen_range(0..size)).collect();
    let mut chain = vec![top];
    let (mut low, mut high) = (1u64, size - 2);
    for i in 0..k {
        if i % 2 == 0 {
            chain.push(low);
            low += 1;
        } else {
            chain.push(high);
            high -= 1;
        }
    }
    values[0] = chain[0];
    for w in chain.windows(2) {
        values[w[0] as usize] = w[1];
    }
    let last = *chain.last().expect("chain is never empty") as usize;
    values[last] = if member { top } else { rng.gen_range(0..top) };
    FunctionTable::new(m, values)
}
