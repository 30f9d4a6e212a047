//! Natural join on the first column through a virtually expanded tape.
//!
//! The input is `A | B` in flat record form. Without writing anything, the
//! head presents every A-tuple `|B|` times (tagged `1..|B|` by staying on
//! its last cell) and the `j`-th B-tuple once with tag `j`. Sorting that
//! virtual sequence by `(key, tag, B before A)` puts each B-tuple directly
//! ahead of the A-tuples it joins with.

use std::sync::Arc;

use crate::meter::{Action, Alphabet, Arena, ControlProgram, Output, Read, Reg, StateId};

use super::keysort::Selection;
use super::records::{self, record_alphabet, Syntax, Validated, BAR, SEMI};

const CUR: Reg = Reg(0);
const SIZE_A: Reg = Reg(1);
const SIZE_B: Reg = Reg(2);
/// 1-based index of the A-tuple being expanded.
const ITER_A: Reg = Reg(3);
/// Tag of the next B-tuple.
const CURRENT_B: Reg = Reg(4);
/// Tag of the next virtual copy of the current A-tuple.
const COPY: Reg = Reg(5);
/// The A-tuple being expanded.
const HELD_A: Reg = Reg(6);
/// Last B-tuple seen by the merge.
const TUP: Reg = Reg(7);
const PASSES: Reg = Reg(8);

const REL_B: u64 = 0;
const REL_A: u64 = 1;

// Count pass: 3 syntax states per relation.
const COUNT_A: StateId = 0;
const COUNT_B: StateId = 3;
const RETURN: StateId = 6;
const FWD_A: StateId = 7;
const EXPAND_FWD: StateId = 8;
const FWD_B: StateId = 9;
const BWD_B: StateId = 10;
const BWD_A: StateId = 11;
const EXPAND_BWD: StateId = 12;
const EXPAND_BWD_LAST: StateId = 13;

/// A virtual item: `(key, tag, relation, ordinal)` followed by the tuple's other fields.
pub type VirtualItem = Vec<u64>;

/// What happens to the virtual records as the head presents them.
pub trait VirtualConsumer {
    fn offer(&self, mem: &mut Arena, item: VirtualItem, out: &mut Output);

    /// Called at every turn of the head; returns `true` when the run is complete.
    fn end_pass(&self, mem: &mut Arena, out: &mut Output, total: u64) -> bool;
}

/// Sort the virtual records and merge each B-tuple with the A-tuples behind it.
#[derive(Debug, Clone, Copy)]
pub struct SortMerge {
    select: Selection,
}

impl VirtualConsumer for SortMerge {
    fn offer(&self, mem: &mut Arena, item: VirtualItem, _out: &mut Output) {
        self.select.offer(mem, item);
    }

    fn end_pass(&self, mem: &mut Arena, out: &mut Output, total: u64) -> bool {
        for item in self.select.flush(mem) {
            let (key, tag, rel) = (item[0], item[1], item[2]);
            let payload = &item[4..];
            if rel == REL_B {
                let mut tup = vec![key, tag];
                tup.extend_from_slice(payload);
                mem.set_records(TUP, &[tup]);
                continue;
            }
            if let Some(tup) = mem.records(TUP).first() {
                if tup[0] == key && tup[1] == tag {
                    let mut joined = vec![key];
                    joined.extend_from_slice(payload);
                    joined.extend_from_slice(&tup[2..]);
                    out.emit(&joined);
                }
            }
        }
        self.select.emitted(mem) == total
    }
}

/// Emits every virtual record in presentation order during one forward and
/// one backward traversal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Enumerate;

impl VirtualConsumer for Enumerate {
    fn offer(&self, _mem: &mut Arena, item: VirtualItem, out: &mut Output) {
        out.emit(&item);
    }

    fn end_pass(&self, mem: &mut Arena, _out: &mut Output, _total: u64) -> bool {
        let passes = mem.get_uint(PASSES) + 1;
        mem.set_uint(PASSES, passes);
        passes == 2
    }
}

/// Counts both relations in a forward and backward pass, then drives a
/// [`VirtualConsumer`] over the expanded sequence until it is satisfied.
#[derive(Debug, Clone)]
pub struct VirtualExpandedTape<C> {
    sigma: Arc<Alphabet>,
    consumer: C,
}

pub type JoinViaSort = VirtualExpandedTape<SortMerge>;

/// Join through the selection sorter holding `b` virtual tuples per pass.
pub fn join_via_sort(b: usize) -> JoinViaSort {
    assert!(b >= 1, "buffer must hold at least one tuple");
    VirtualExpandedTape {
        sigma: record_alphabet(),
        consumer: SortMerge {
            select: Selection {
                buffer: b,
                key_len: 4,
            },
        },
    }
}

/// The virtual sequence presented by one forward and one backward traversal.
pub fn enumerate_virtual() -> VirtualExpandedTape<Enumerate> {
    VirtualExpandedTape {
        sigma: record_alphabet(),
        consumer: Enumerate,
    }
}

impl<C: VirtualConsumer> VirtualExpandedTape<C> {
    fn total(mem: &Arena) -> u64 {
        let b = mem.get_uint(SIZE_B);
        mem.get_uint(SIZE_A) * b + b
    }

    fn offer_a(&self, mem: &mut Arena, out: &mut Output) {
        let held = mem.records(HELD_A).remove(0);
        let copy = mem.get_uint(COPY);
        let ord = (mem.get_uint(ITER_A) - 1) * mem.get_uint(SIZE_B) + copy;
        let mut item = vec![held[0], copy, REL_A, ord];
        item.extend_from_slice(&held[1..]);
        self.consumer.offer(mem, item, out);
    }

    fn offer_b(&self, mem: &mut Arena, out: &mut Output, backward: bool) {
        let rec = records::take_record(mem, CUR, backward);
        let tag = mem.get_uint(CURRENT_B);
        let ord = mem.get_uint(SIZE_A) * mem.get_uint(SIZE_B) + tag;
        let mut item = vec![rec[0], tag, REL_B, ord];
        item.extend_from_slice(&rec[1..]);
        self.consumer.offer(mem, item, out);
        let next = if backward { tag - 1 } else { tag + 1 };
        mem.set_uint(CURRENT_B, next);
    }

    fn hold_a(mem: &mut Arena, backward: bool) {
        let rec = records::take_record(mem, CUR, backward);
        mem.set_records(HELD_A, &[rec]);
        let first = if backward { mem.get_uint(SIZE_B) } else { 1 };
        mem.set_uint(COPY, first);
    }

    fn turn(&self, mem: &mut Arena, out: &mut Output) -> bool {
        self.consumer.end_pass(mem, out, Self::total(mem))
    }

    fn count(&self, control: StateId, read: Read, mem: &mut Arena) -> Action {
        let (section, sub) = if control >= COUNT_B {
            (COUNT_B, control - COUNT_B)
        } else {
            (COUNT_A, control)
        };
        let syntax = [Syntax::Start, Syntax::Field, Syntax::Comma][sub as usize];
        let Some(sym) = read.symbol else {
            if section != COUNT_B || syntax != Syntax::Start {
                return Action::reject();
            }
            if mem.get_uint(SIZE_A) == 0 || mem.get_uint(SIZE_B) == 0 {
                return Action::done();
            }
            return Action::left(RETURN);
        };
        if sym == BAR {
            return if section == COUNT_A && syntax == Syntax::Start {
                Action::right(COUNT_B)
            } else {
                Action::reject()
            };
        }
        match records::validate(syntax, sym) {
            Validated::Invalid => Action::reject(),
            Validated::Continue(next) => Action::right(section + next as StateId),
            Validated::RecordEnd => {
                let size = if section == COUNT_A { SIZE_A } else { SIZE_B };
                mem.set_uint(size, mem.get_uint(size) + 1);
                Action::right(section)
            }
        }
    }
}

impl<C: VirtualConsumer> ControlProgram for VirtualExpandedTape<C> {
    fn alphabet(&self) -> Arc<Alphabet> {
        self.sigma.clone()
    }

    fn states(&self) -> u32 {
        14
    }

    fn internal_alphabet(&self) -> u32 {
        4
    }

    fn prepare(&self, mem: &mut Arena) {
        mem.set_uint(SIZE_A, 0);
        mem.set_uint(SIZE_B, 0);
    }

    fn step(&self, control: StateId, read: Read, mem: &mut Arena, out: &mut Output) -> Action {
        match control {
            c if c < RETURN => self.count(c, read, mem),
            RETURN => {
                if read.at_start {
                    mem.set_uint(ITER_A, 0);
                    Action::stay(FWD_A)
                } else {
                    Action::left(RETURN)
                }
            }
            FWD_A => match read.symbol {
                Some(BAR) => {
                    mem.set_uint(CURRENT_B, 1);
                    Action::right(FWD_B)
                }
                Some(SEMI) => {
                    mem.set_uint(ITER_A, mem.get_uint(ITER_A) + 1);
                    Self::hold_a(mem, false);
                    Action::stay(EXPAND_FWD)
                }
                Some(sym) => {
                    records::feed(mem, CUR, sym);
                    Action::right(FWD_A)
                }
                None => Action::reject(),
            },
            EXPAND_FWD => {
                self.offer_a(mem, out);
                let copy = mem.get_uint(COPY);
                if copy == mem.get_uint(SIZE_B) {
                    mem.clear(HELD_A);
                    mem.clear(COPY);
                    Action::right(FWD_A)
                } else {
                    mem.set_uint(COPY, copy + 1);
                    Action::stay(EXPAND_FWD)
                }
            }
            FWD_B => match read.symbol {
                Some(SEMI) => {
                    self.offer_b(mem, out, false);
                    Action::right(FWD_B)
                }
                Some(sym) => {
                    records::feed(mem, CUR, sym);
                    Action::right(FWD_B)
                }
                None => {
                    if self.turn(mem, out) {
                        return Action::done();
                    }
                    mem.set_uint(CURRENT_B, mem.get_uint(SIZE_B));
                    Action::left(BWD_B)
                }
            },
            BWD_B => match read.symbol {
                Some(SEMI) => {
                    if !mem.is_empty(CUR) {
                        self.offer_b(mem, out, true);
                    }
                    Action::left(BWD_B)
                }
                Some(BAR) => {
                    if !mem.is_empty(CUR) {
                        self.offer_b(mem, out, true);
                    }
                    mem.set_uint(ITER_A, mem.get_uint(SIZE_A));
                    Action::left(BWD_A)
                }
                Some(sym) => {
                    records::feed(mem, CUR, sym);
                    Action::left(BWD_B)
                }
                None => Action::reject(),
            },
            BWD_A => {
                match read.symbol {
                    Some(SEMI) if !mem.is_empty(CUR) => {
                        Self::hold_a(mem, true);
                        return Action::stay(EXPAND_BWD);
                    }
                    Some(SEMI) => {}
                    Some(sym) => records::feed(mem, CUR, sym),
                    None => return Action::reject(),
                }
                if read.at_start {
                    Self::hold_a(mem, true);
                    Action::stay(EXPAND_BWD_LAST)
                } else {
                    Action::left(BWD_A)
                }
            }
            _ => {
                self.offer_a(mem, out);
                let copy = mem.get_uint(COPY);
                if copy > 1 {
                    mem.set_uint(COPY, copy - 1);
                    return Action::stay(control);
                }
                mem.clear(HELD_A);
                mem.clear(COPY);
                mem.set_uint(ITER_A, mem.get_uint(ITER_A) - 1);
                if control == EXPAND_BWD {
                    return Action::left(BWD_A);
                }
                if self.turn(mem, out) {
                    return Action::done();
                }
                mem.set_uint(ITER_A, 0);
                Action::stay(FWD_A)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::records::encode_join_input;
    use crate::instances::char_tokens;
    use crate::meter::{load_tape, run, Halt, Run};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exec<P: ControlProgram>(p: &P, a: &[Vec<u64>], b: &[Vec<u64>]) -> Run {
        let input = encode_join_input(a, b);
        let tape = load_tape(p.alphabet(), &char_tokens(&input), false).unwrap();
        run(p, tape, Some(10_000_000)).unwrap()
    }

    fn nested_loop(a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
        let mut out = Vec::new();
        for ta in a {
            for tb in b {
                if ta[0] == tb[0] {
                    let mut t = ta.clone();
                    t.extend_from_slice(&tb[1..]);
                    out.push(t);
                }
            }
        }
        out.sort();
        out
    }

    fn sorted(run: &Run) -> Vec<Vec<u64>> {
        let mut v = run.output.records().to_vec();
        v.sort();
        v
    }

    #[test]
    fn worked_example() {
        // Keys a = 1, b = 2, c = 3; values x_i = 10 + i, y_i = 20 + i.
        let a = [vec![1, 11], vec![2, 12], vec![1, 13]];
        let b = [vec![3, 21], vec![1, 22], vec![1, 23]];
        let r = exec(&join_via_sort(2), &a, &b);
        assert_eq!(r.report.halted, Halt::OutputComplete);
        assert_eq!(
            r.output.records(),
            &[vec![1, 11, 22], vec![1, 13, 22], vec![1, 11, 23], vec![1, 13, 23]]
        );
        assert_eq!(r.report.external_writes, 0);
    }

    #[test]
    fn empty_relations_give_empty_output() {
        for (a, b) in [(vec![], vec![vec![1, 1]]), (vec![vec![1, 1]], vec![]), (vec![], vec![])] {
            let r = exec(&join_via_sort(1), &a, &b);
            assert_eq!(r.report.halted, Halt::OutputComplete);
            assert!(r.output.is_empty());
        }
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let p = join_via_sort(2);
        for bad in ["1;", "1;|1;|", "1,;|1;", "|1", "1;|;"] {
            let tape = load_tape(p.alphabet(), &char_tokens(bad), false).unwrap();
            assert_eq!(run(&p, tape, None).unwrap().report.halted, Halt::Reject, "{bad}");
        }
    }

    #[test]
    fn random_relations_match_nested_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let gen = |rng: &mut ChaCha8Rng| -> Vec<Vec<u64>> {
                let len = rng.gen_range(0..=6);
                (0..len)
                    .map(|_| vec![rng.gen_range(1..=4), rng.gen_range(0..50)])
                    .collect()
            };
            let (a, b) = (gen(&mut rng), gen(&mut rng));
            let buf = rng.gen_range(1..6);
            let r = exec(&join_via_sort(buf), &a, &b);
            assert_eq!(sorted(&r), nested_loop(&a, &b));
            let virtual_len = (a.len() * b.len() + b.len()) as u64;
            if virtual_len > 0 && !a.is_empty() {
                assert!(r.report.r_used <= 2 * virtual_len.div_ceil(buf as u64) + 1 + 2);
            }
        }
    }

    #[test]
    fn virtual_tape_traversals_mirror_each_other() {
        let a = [vec![2, 5], vec![1, 6]];
        let b = [vec![1, 7], vec![3, 8], vec![1, 9]];
        let r = exec(&enumerate_virtual(), &a, &b);
        let items = r.output.records();
        let per_pass = a.len() * b.len() + b.len();
        assert_eq!(items.len(), 2 * per_pass);
        let (fwd, bwd) = items.split_at(per_pass);
        let mut reversed = bwd.to_vec();
        reversed.reverse();
        assert_eq!(fwd, reversed.as_slice());
        let tags: Vec<(u64, u64)> = fwd.iter().map(|t| (t[1], t[2])).collect();
        assert_eq!(
            tags,
            vec![(1, REL_A), (2, REL_A), (3, REL_A), (1, REL_A), (2, REL_A), (3, REL_A), (1, REL_B), (2, REL_B), (3, REL_B)]
        );
        let mut ords: Vec<u64> = fwd.iter().map(|t| t[3]).collect();
        ords.sort();
        assert_eq!(ords, (1..=per_pass as u64).collect::<Vec<_>>());
    }
}
