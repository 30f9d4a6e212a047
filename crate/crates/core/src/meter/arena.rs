use serde::{Deserialize, Serialize};

use super::alphabet::ceil_log2;

/// Content of one internal memory cell.
pub type Cell = u32;

/// Binary digit cells use `0` and `1`; record encodings add two separators.
pub const FIELD_SEP: Cell = 2;
pub const RECORD_SEP: Cell = 3;

/// Handle to one register of the arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Reg(pub u16);

/// Metered internal memory. All registers (and the random-access address
/// register) share one space account whose peak is the run's `s_peak`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arena {
    alphabet: u32,
    regs: Vec<Vec<Cell>>,
    address: Vec<Cell>,
    used: usize,
    peak: usize,
}

/// Packed copy of the arena, as shipped across a protocol boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Cell count of every register, address register last.
    pub layout: Vec<usize>,
    pub cell_bits: u32,
    pub packed: Vec<u8>,
}

impl Snapshot {
    pub fn bits(&self) -> u64 {
        8 * self.packed.len() as u64
    }

    pub fn cells(&self) -> usize {
        self.layout.iter().sum()
    }
}

impl Arena {
    pub fn new(alphabet: u32) -> Self {
        assert!(alphabet >= 2, "internal alphabet needs at least two cells values");
        Arena {
            alphabet,
            regs: Vec::new(),
            address: Vec::new(),
            used: 0,
            peak: 0,
        }
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn cell_bits(&self) -> u32 {
        ceil_log2(self.alphabet as u64)
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn peak(&self) -> usize {
        self.peak
    }

    fn slot(&mut self, r: Reg) -> &mut Vec<Cell> {
        let i = r.0 as usize;
        if self.regs.len() <= i {
            self.regs.resize_with(i + 1, Vec::new);
        }
        &mut self.regs[i]
    }

    fn account(&mut self, before: usize, after: usize) {
        self.used = self.used + after - before;
        if self.used > self.peak {
            self.peak = self.used;
        }
    }

    fn check(&self, c: Cell) {
        assert!(
            c < self.alphabet,
            "cell value {c} outside internal alphabet of size {}",
            self.alphabet
        );
    }

    pub fn cells(&self, r: Reg) -> &[Cell] {
        self.regs.get(r.0 as usize).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self, r: Reg) -> usize {
        self.cells(r).len()
    }

    pub fn is_empty(&self, r: Reg) -> bool {
        self.cells(r).is_empty()
    }

    pub fn push(&mut self, r: Reg, c: Cell) {
        self.check(c);
        self.slot(r).push(c);
        self.account(0, 1);
    }

    pub fn pop(&mut self, r: Reg) -> Option<Cell> {
        let c = self.slot(r).pop();
        if c.is_some() {
            self.account(1, 0);
        }
        c
    }

    pub fn pop_front(&mut self, r: Reg) -> Option<Cell> {
        let v = self.slot(r);
        if v.is_empty() {
            return None;
        }
        let c = v.remove(0);
        self.account(1, 0);
        Some(c)
    }

    pub fn top(&self, r: Reg) -> Option<Cell> {
        self.cells(r).last().copied()
    }

    pub fn set_top(&mut self, r: Reg, c: Cell) {
        self.check(c);
        *self
            .slot(r)
            .last_mut()
            .expect("set_top on an empty register") = c;
    }

    /// Overwrites cell `i` of a register; the register must already be that long.
    pub fn set_at(&mut self, r: Reg, i: usize, c: Cell) {
        self.check(c);
        self.slot(r)[i] = c;
    }

    pub fn clear(&mut self, r: Reg) {
        let before = self.len(r);
        self.slot(r).clear();
        self.account(before, 0);
    }

    pub fn set_cells<I: IntoIterator<Item = Cell>>(&mut self, r: Reg, cells: I) {
        let before = self.len(r);
        let new: Vec<Cell> = cells.into_iter().collect();
        for &c in &new {
            self.check(c);
        }
        let after = new.len();
        *self.slot(r) = new;
        self.account(before, after);
    }

    /// Reads a register holding a binary number (most significant digit first).
    pub fn get_uint(&self, r: Reg) -> u64 {
        decode_uint(self.cells(r))
    }

    /// Stores `v` in binary using `max(1, bitlen(v))` cells.
    pub fn set_uint(&mut self, r: Reg, v: u64) {
        self.set_cells(r, encode_uint(v));
    }

    /// Reads a register holding a sequence of records of binary fields.
    pub fn records(&self, r: Reg) -> Vec<Vec<u64>> {
        decode_records(self.cells(r))
    }

    pub fn set_records(&mut self, r: Reg, records: &[Vec<u64>]) {
        assert!(self.alphabet >= 4, "record registers need four cell values");
        self.set_cells(r, encode_records(records));
    }

    /// Writes an address for the next random access.
    pub fn set_address(&mut self, addr: u64) {
        let before = self.address.len();
        self.address = encode_uint(addr);
        let after = self.address.len();
        self.account(before, after);
    }

    pub fn address_is_empty(&self) -> bool {
        self.address.is_empty()
    }

    /// Consumes the address register, clearing it.
    pub fn take_address(&mut self) -> Option<u64> {
        if self.address.is_empty() {
            return None;
        }
        let v = decode_uint(&self.address);
        let before = self.address.len();
        self.address.clear();
        self.account(before, 0);
        Some(v)
    }

    pub fn snapshot(&self) -> Snapshot {
        let bits = self.cell_bits();
        let mut layout: Vec<usize> = self.regs.iter().map(Vec::len).collect();
        layout.push(self.address.len());
        let total = self.used * bits as usize;
        let mut packed = vec![0u8; total.div_ceil(8)];
        let mut at = 0usize;
        for c in self.regs.iter().flatten().chain(self.address.iter()) {
            for b in 0..bits {
                if (c >> b) & 1 == 1 {
                    packed[at / 8] |= 1 << (at % 8);
                }
                at += 1;
            }
        }
        Snapshot {
            layout,
            cell_bits: bits,
            packed,
        }
    }

    /// Rebuilds an arena from a snapshot. The peak restarts at the restored usage.
    pub fn restore(alphabet: u32, snap: &Snapshot) -> Self {
        let bits = snap.cell_bits;
        let mut at = 0usize;
        let mut next = || {
            let mut c = 0;
            for b in 0..bits {
                if (snap.packed[at / 8] >> (at % 8)) & 1 == 1 {
                    c |= 1 << b;
                }
                at += 1;
            }
            c
        };
        let (addr_len, reg_lens) = snap.layout.split_last().expect("snapshot layout is never empty");
        let regs: Vec<Vec<Cell>> = reg_lens
            .iter()
            .map(|&len| (0..len).map(|_| next()).collect())
            .collect();
        let address = (0..*addr_len).map(|_| next()).collect();
        let used = snap.cells();
        Arena {
            alphabet,
            regs,
            address,
            used,
            peak: used,
        }
    }

    /// Content equality ignoring the peak counter and trailing empty registers.
    pub fn same_content(&self, other: &Arena) -> bool {
        let trim = |v: &[Vec<Cell>]| {
            let mut n = v.len();
            while n > 0 && v[n - 1].is_empty() {
                n -= 1;
            }
            v[..n].to_vec()
        };
        trim(&self.regs) == trim(&other.regs) && self.address == other.address
    }
}

pub fn encode_uint(v: u64) -> Vec<Cell> {
    if v == 0 {
        return vec![0];
    }
    let len = 64 - v.leading_zeros();
    (0..len).rev().map(|i| ((v >> i) & 1) as Cell).collect()
}

pub fn decode_uint(cells: &[Cell]) -> u64 {
    cells.iter().fold(0u64, |acc, &c| (acc << 1) | (c & 1) as u64)
}

pub fn encode_records(records: &[Vec<u64>]) -> Vec<Cell> {
    let mut out = Vec::new();
    for rec in records {
        for &f in rec {
            out.extend(encode_uint(f));
            out.push(FIELD_SEP);
        }
        out.push(RECORD_SEP);
    }
    out
}

pub fn decode_records(cells: &[Cell]) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut rec = Vec::new();
    let mut field = 0u64;
    for &c in cells {
        match c {
            FIELD_SEP => {
                rec.push(field);
                field = 0;
            }
            RECORD_SEP => out.push(std::mem::take(&mut rec)),
            b => field = (field << 1) | b as u64,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn peak_is_monotone_and_covers_used() {
        let mut a = Arena::new(2);
        a.set_uint(Reg(0), 255);
        assert_eq!(a.used(), 8);
        a.set_uint(Reg(0), 1);
        assert_eq!(a.used(), 1);
        assert_eq!(a.peak(), 8);
        a.push(Reg(3), 1);
        assert_eq!(a.used(), 2);
        assert_eq!(a.peak(), 8);
    }

    #[test]
    fn address_register_counts_and_clears() {
        let mut a = Arena::new(2);
        assert_eq!(a.take_address(), None);
        a.set_address(5);
        assert_eq!(a.used(), 3);
        assert_eq!(a.take_address(), Some(5));
        assert_eq!(a.used(), 0);
        assert!(a.address_is_empty());
    }

    #[test]
    #[should_panic]
    fn out_of_alphabet_cells_panic() {
        let mut a = Arena::new(2);
        a.push(Reg(0), 2);
    }

    proptest! {
        #[test]
        fn snapshot_restores_content(
            regs in proptest::collection::vec(proptest::collection::vec(0u32..5, 0..12), 0..5),
            addr in proptest::option::of(1u64..1000),
        ) {
            let mut a = Arena::new(5);
            for (i, r) in regs.iter().enumerate() {
                a.set_cells(Reg(i as u16), r.iter().copied());
            }
            if let Some(x) = addr {
                a.set_address(x);
            }
            let snap = a.snapshot();
            prop_assert_eq!(snap.bits(), 8 * ((a.used() * 3).div_ceil(8)) as u64);
            let b = Arena::restore(5, &snap);
            prop_assert!(a.same_content(&b));
            prop_assert_eq!(b.used(), a.used());
        }

        #[test]
        fn records_round_trip(recs in proptest::collection::vec(proptest::collection::vec(0u64..1 << 20, 1..4), 0..6)) {
            prop_assert_eq!(decode_records(&encode_records(&recs)), recs);
        }
    }
}
