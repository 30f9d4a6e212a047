//! Streaming passes over tag tapes. The bottom-up passes keep one stack in
//! the arena; each entry holds an automaton state (or ⊥) and, while a node
//! is open, that node's tag so nesting can be checked on the fly.

use std::sync::Arc;

use crate::meter::{Action, Alphabet, Arena, Cell, ControlProgram, Move, Output, Read, Reg, StateId};

use super::automaton::{BottomUpBDTA, SelectionPair, Side};
use super::events::{EventKind, TagAlphabet};
use super::tree::Encoding;
use super::TreeError;

const STACK: Reg = Reg(0);
const IDX: Reg = Reg(1);

/// Kind of the previously processed symbol, in scan order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Prev {
    None,
    Enter,
    Leave,
}

impl Prev {
    fn from_code(c: u32) -> Prev {
        match c {
            0 => Prev::None,
            1 => Prev::Enter,
            _ => Prev::Leave,
        }
    }

    fn code(self) -> u32 {
        match self {
            Prev::None => 0,
            Prev::Enter => 1,
            Prev::Leave => 2,
        }
    }
}

/// Role of a tag in scan order: the first of a node's two tags enters it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Enter,
    Leave,
    Both,
}

fn role(kind: EventKind, forward: bool) -> Role {
    match (kind, forward) {
        (EventKind::Bachelor, _) => Role::Both,
        (EventKind::Open, true) | (EventKind::Close, false) => Role::Enter,
        _ => Role::Leave,
    }
}

struct Malformed;

#[derive(Debug, Clone)]
struct StackPass {
    aut: BottomUpBDTA,
    labels: Vec<usize>,
    tags: u32,
}

impl StackPass {
    fn new(aut: &BottomUpBDTA, tags: &TagAlphabet, encoding: Encoding) -> Result<Self, TreeError> {
        if aut.encoding() != encoding {
            return Err(TreeError::Automaton(format!("pass needs a {encoding} automaton")));
        }
        let labels = tags
            .tags()
            .iter()
            .map(|t| aut.label_index(t).ok_or_else(|| TreeError::UnknownLabel(t.clone())))
            .collect::<Result<_, _>>()?;
        Ok(StackPass {
            aut: aut.clone(),
            labels,
            tags: tags.tags().len() as u32,
        })
    }

    fn cells(&self) -> u32 {
        (self.aut.state_count() + 1) * (self.tags + 1)
    }

    fn cell(&self, state: Option<u32>, pending: Option<usize>) -> Cell {
        state.map_or(0, |q| q + 1) * (self.tags + 1) + pending.map_or(0, |t| t as u32 + 1)
    }

    fn split(&self, c: Cell) -> (Option<u32>, Option<usize>) {
        let (s, t) = (c / (self.tags + 1), c % (self.tags + 1));
        (s.checked_sub(1), (t as usize).checked_sub(1))
    }

    /// Processes one tag; returns the node's state when the tag leaves it.
    fn event(&self, mem: &mut Arena, role: Role, tag: usize, prev: Prev) -> Result<Option<u32>, Malformed> {
        match role {
            Role::Enter => {
                let top = mem.top(STACK).map(|c| self.split(c));
                if mem.len(STACK) == 1 && top.is_some_and(|(_, p)| p.is_none()) {
                    return Err(Malformed);
                }
                match prev {
                    Prev::None | Prev::Enter => mem.push(STACK, self.cell(None, Some(tag))),
                    Prev::Leave => match top {
                        Some((state, None)) => mem.set_top(STACK, self.cell(state, Some(tag))),
                        _ => return Err(Malformed),
                    },
                }
                Ok(None)
            }
            Role::Leave => {
                let q1 = match prev {
                    Prev::None => return Err(Malformed),
                    Prev::Enter => None,
                    Prev::Leave => match mem.pop(STACK).map(|c| self.split(c)) {
                        Some((Some(q), None)) => Some(q),
                        _ => return Err(Malformed),
                    },
                };
                let q2 = match mem.pop(STACK).map(|c| self.split(c)) {
                    Some((q, Some(t))) if t == tag => q,
                    _ => return Err(Malformed),
                };
                let q = self.aut.delta(self.labels[tag], q1, q2);
                mem.push(STACK, self.cell(Some(q), None));
                Ok(Some(q))
            }
            Role::Both => {
                self.event(mem, Role::Enter, tag, prev)?;
                self.event(mem, Role::Leave, tag, Prev::Enter)
            }
        }
    }

    /// Root state once the whole document has been consumed.
    fn root_state(&self, mem: &Arena) -> Option<u32> {
        match mem.top(STACK).map(|c| self.split(c)) {
            Some((Some(q), None)) if mem.len(STACK) == 1 => Some(q),
            _ => None,
        }
    }

    fn verdict(&self, mem: &Arena) -> Action {
        match self.root_state(mem) {
            Some(q) if self.aut.is_final(q) => Action::accept(),
            _ => Action::reject(),
        }
    }
}

fn next_prev(role: Role) -> Prev {
    if role == Role::Enter {
        Prev::Enter
    } else {
        Prev::Leave
    }
}

/// Forward scan to the end, then one backward scan running a fcns automaton.
#[derive(Debug, Clone)]
pub struct FilterBackward {
    tags: TagAlphabet,
    pass: StackPass,
}

/// A single forward scan running an lcns automaton.
#[derive(Debug, Clone)]
pub struct FilterForward {
    tags: TagAlphabet,
    pass: StackPass,
}

pub fn stream_filter_backward<S: AsRef<str>>(aut: &BottomUpBDTA, tags: &[S]) -> Result<FilterBackward, TreeError> {
    let tags = TagAlphabet::new(tags, 0)?;
    let pass = StackPass::new(aut, &tags, Encoding::Fcns)?;
    Ok(FilterBackward { tags, pass })
}

pub fn stream_filter_forward<S: AsRef<str>>(aut: &BottomUpBDTA, tags: &[S]) -> Result<FilterForward, TreeError> {
    let tags = TagAlphabet::new(tags, 0)?;
    let pass = StackPass::new(aut, &tags, Encoding::Lcns)?;
    Ok(FilterForward { tags, pass })
}

impl FilterBackward {
    pub fn tag_alphabet(&self) -> &TagAlphabet {
        &self.tags
    }
}

impl FilterForward {
    pub fn tag_alphabet(&self) -> &TagAlphabet {
        &self.tags
    }
}

const SCAN: StateId = 0;

impl ControlProgram for FilterBackward {
    fn alphabet(&self) -> Arc<Alphabet> {
        self.tags.alphabet()
    }

    // 0: forward to the end; 1 + prev: backward pass.
    fn states(&self) -> u32 {
        4
    }

    fn internal_alphabet(&self) -> u32 {
        self.pass.cells().max(2)
    }

    fn step(&self, control: StateId, read: Read, mem: &mut Arena, _out: &mut Output) -> Action {
        let Some(sym) = read.symbol else {
            return if read.at_start { Action::reject() } else { Action::left(1) };
        };
        if control == SCAN {
            return Action::right(SCAN);
        }
        let (kind, tag, _) = self.tags.decode(sym);
        let r = role(kind, false);
        if self.pass.event(mem, r, tag, Prev::from_code(control - 1)).is_err() {
            return Action::reject();
        }
        if read.at_start {
            self.pass.verdict(mem)
        } else {
            Action::left(1 + next_prev(r).code())
        }
    }
}

impl ControlProgram for FilterForward {
    fn alphabet(&self) -> Arc<Alphabet> {
        self.tags.alphabet()
    }

    // Control is the previous-symbol kind.
    fn states(&self) -> u32 {
        3
    }

    fn internal_alphabet(&self) -> u32 {
        self.pass.cells().max(2)
    }

    fn step(&self, control: StateId, read: Read, mem: &mut Arena, _out: &mut Output) -> Action {
        let Some(sym) = read.symbol else {
            return self.pass.verdict(mem);
        };
        let (kind, tag, _) = self.tags.decode(sym);
        let r = role(kind, true);
        if self.pass.event(mem, r, tag, Prev::from_code(control)).is_err() {
            return Action::reject();
        }
        Action::right(next_prev(r).code())
    }
}

/// Three scans: to the end, back computing and writing `ρA` into every
/// opening tag, then forward running the top-down automaton and emitting
/// selected indices in ascending order.
#[derive(Debug, Clone)]
pub struct SelectAscending {
    tags: TagAlphabet,
    pass: StackPass,
    pair: SelectionPair,
}

/// Two scans: forward computing lcns states into every closing tag, then
/// backward running the top-down automaton and emitting indices in
/// descending order.
#[derive(Debug, Clone)]
pub struct SelectDescending {
    tags: TagAlphabet,
    pass: StackPass,
    pair: SelectionPair,
}

pub fn select_ascending<S: AsRef<str>>(pair: &SelectionPair, tags: &[S]) -> Result<SelectAscending, TreeError> {
    let tags = TagAlphabet::new(tags, pair.bottom().state_count())?;
    let pass = StackPass::new(pair.bottom(), &tags, Encoding::Fcns)?;
    Ok(SelectAscending {
        tags,
        pass,
        pair: pair.clone(),
    })
}

pub fn select_descending<S: AsRef<str>>(pair: &SelectionPair, tags: &[S]) -> Result<SelectDescending, TreeError> {
    let tags = TagAlphabet::new(tags, pair.bottom().state_count())?;
    let pass = StackPass::new(pair.bottom(), &tags, Encoding::Lcns)?;
    Ok(SelectDescending {
        tags,
        pass,
        pair: pair.clone(),
    })
}

impl SelectAscending {
    pub fn tag_alphabet(&self) -> &TagAlphabet {
        &self.tags
    }
}

impl SelectDescending {
    pub fn tag_alphabet(&self) -> &TagAlphabet {
        &self.tags
    }
}

const ASC_BACK: StateId = 1;
const ASC_TOPDOWN: StateId = 4;

impl ControlProgram for SelectAscending {
    fn alphabet(&self) -> Arc<Alphabet> {
        self.tags.alphabet()
    }

    // 0: forward to the end; 1 + prev: bottom-up pass; 4 + prev: top-down pass.
    fn states(&self) -> u32 {
        7
    }

    fn internal_alphabet(&self) -> u32 {
        self.pass.cells().max(self.pair.topdown_state_count()).max(2)
    }

    fn step(&self, control: StateId, read: Read, mem: &mut Arena, out: &mut Output) -> Action {
        if control == SCAN {
            return match read.symbol {
                Some(_) => Action::right(SCAN),
                None if read.at_start => Action::reject(),
                None => Action::left(ASC_BACK),
            };
        }
        if control < ASC_TOPDOWN {
            let sym = read.symbol.expect("backward pass stays on the input");
            let (kind, tag, _) = self.tags.decode(sym);
            let r = role(kind, false);
            let Ok(state) = self.pass.event(mem, r, tag, Prev::from_code(control - ASC_BACK)) else {
                return Action::reject();
            };
            let write = state.map(|q| self.tags.encode(kind, tag, Some(q)));
            if !read.at_start {
                let next = ASC_BACK + next_prev(r).code();
                return Action::Go {
                    write,
                    dir: Move::Left,
                    next,
                };
            }
            if self.pass.root_state(mem).is_none() {
                return Action::reject();
            }
            mem.clear(STACK);
            return Action::Go {
                write,
                dir: Move::Stay,
                next: ASC_TOPDOWN,
            };
        }

        let Some(sym) = read.symbol else {
            return Action::done();
        };
        let prev = Prev::from_code(control - ASC_TOPDOWN);
        let (kind, tag, ann) = self.tags.decode(sym);
        if kind == EventKind::Close {
            if prev == Prev::Leave {
                mem.pop(STACK);
            }
            return Action::right(ASC_TOPDOWN + Prev::Leave.code());
        }
        let Some(qa) = ann else {
            return Action::reject();
        };
        let label = self.pass.labels[tag];
        let index = mem.get_uint(IDX) + 1;
        mem.set_uint(IDX, index);
        let qb = match prev {
            Prev::None => {
                let q = self.pair.topdown(label, qa, Side::Root, self.pair.topdown_init());
                mem.push(STACK, q);
                q
            }
            Prev::Enter => {
                let q = self.pair.topdown(label, qa, Side::First, mem.top(STACK).unwrap_or(0));
                mem.push(STACK, q);
                q
            }
            Prev::Leave => {
                let q = self.pair.topdown(label, qa, Side::Next, mem.top(STACK).unwrap_or(0));
                mem.set_top(STACK, q);
                q
            }
        };
        if self.pair.selects(qa, qb) {
            out.emit(&[index]);
        }
        let after = if kind == EventKind::Open { Prev::Enter } else { Prev::Leave };
        Action::right(ASC_TOPDOWN + after.code())
    }
}

const DESC_TOPDOWN: StateId = 3;

impl ControlProgram for SelectDescending {
    fn alphabet(&self) -> Arc<Alphabet> {
        self.tags.alphabet()
    }

    // prev: forward bottom-up pass; 3 + prev: backward top-down pass.
    fn states(&self) -> u32 {
        6
    }

    fn internal_alphabet(&self) -> u32 {
        self.pass.cells().max(2 * self.pair.topdown_state_count()).max(2)
    }

    fn step(&self, control: StateId, read: Read, mem: &mut Arena, out: &mut Output) -> Action {
        if control < DESC_TOPDOWN {
            let Some(sym) = read.symbol else {
                if read.at_start || self.pass.root_state(mem).is_none() {
                    return Action::reject();
                }
                mem.clear(STACK);
                return Action::left(DESC_TOPDOWN);
            };
            let (kind, tag, _) = self.tags.decode(sym);
            let r = role(kind, true);
            if kind != EventKind::Close {
                let count = mem.get_uint(IDX) + 1;
                mem.set_uint(IDX, count);
            }
            let Ok(state) = self.pass.event(mem, r, tag, Prev::from_code(control)) else {
                return Action::reject();
            };
            return Action::Go {
                write: state.map(|q| self.tags.encode(kind, tag, Some(q))),
                dir: Move::Right,
                next: next_prev(r).code(),
            };
        }

        let sym = read.symbol.expect("backward pass stays on the input");
        let prev = Prev::from_code(control - DESC_TOPDOWN);
        let (kind, tag, ann) = self.tags.decode(sym);
        let label = self.pass.labels[tag];
        if kind != EventKind::Open {
            let Some(qa) = ann else {
                return Action::reject();
            };
            let top = mem.top(STACK).unwrap_or(0) / 2;
            let (side, from) = match prev {
                Prev::None => (Side::Root, self.pair.topdown_init()),
                Prev::Enter => (Side::First, top),
                Prev::Leave => (Side::Next, top),
            };
            let qb = self.pair.topdown(label, qa, side, from);
            let entry = 2 * qb + u32::from(self.pair.selects(qa, qb));
            if prev == Prev::Leave {
                mem.set_top(STACK, entry);
            } else {
                mem.push(STACK, entry);
            }
        }
        if kind != EventKind::Close {
            if prev == Prev::Leave && kind == EventKind::Open {
                mem.pop(STACK);
            }
            let index = mem.get_uint(IDX);
            if mem.top(STACK).is_some_and(|e| e % 2 == 1) {
                out.emit(&[index]);
            }
            mem.set_uint(IDX, index.saturating_sub(1));
        }
        if read.at_start {
            return Action::done();
        }
        let after = if kind == EventKind::Close { Prev::Enter } else { Prev::Leave };
        Action::left(DESC_TOPDOWN + after.code())
    }
}

#[cfg(test)]
mod tests {
    use super::super::automaton::fixtures::constant_pair;
    use super::super::automaton::{run_bottom_up_reference, select_reference};
    use super::super::tree::UnrankedTree;
    use super::*;
    use crate::meter::{load_tape, run, Halt, Run};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TAGS: [&str; 3] = ["a", "b", "c"];

    fn random_automaton(rng: &mut ChaCha8Rng, encoding: Encoding, tags: usize) -> BottomUpBDTA {
        let q = rng.gen_range(1..=4u32);
        let w = (q + 1) as usize;
        let table: Vec<u32> = (0..tags * w * w).map(|_| rng.gen_range(0..q)).collect();
        let finals = (0..q).map(|_| rng.gen_bool(0.5)).collect();
        BottomUpBDTA::from_fn(
            encoding,
            TAGS[..tags].iter().map(|s| s.to_string()).collect(),
            (0..q).map(|i| format!("q{i}")).collect(),
            finals,
            |a, l, r| table[(a * w + l.map_or(0, |x| x as usize + 1)) * w + r.map_or(0, |x| x as usize + 1)],
        )
        .unwrap()
    }

    fn random_pair(rng: &mut ChaCha8Rng, encoding: Encoding, tags: usize) -> SelectionPair {
        let bottom = random_automaton(rng, encoding, tags);
        let qa = bottom.state_count() as usize;
        let qb = rng.gen_range(1..=3u32);
        let table: Vec<u32> = (0..tags * qa * 3 * qb as usize).map(|_| rng.gen_range(0..qb)).collect();
        let sel: Vec<bool> = (0..qa * qb as usize).map(|_| rng.gen_bool(0.4)).collect();
        let side_code = |s: Side| match s {
            Side::Root => 0,
            Side::First => 1,
            Side::Next => 2,
        };
        SelectionPair::from_fn(
            bottom,
            (0..qb).map(|i| format!("p{i}")).collect(),
            0,
            |a, x, s, p| table[((a * qa + x as usize) * 3 + side_code(s)) * qb as usize + p as usize],
            |x, p| sel[x as usize * qb as usize + p as usize],
        )
        .unwrap()
    }

    fn exec<P: ControlProgram>(p: P, tree: &UnrankedTree, writable: bool) -> Run {
        let tape = load_tape(p.alphabet(), &tree.to_tokens(), writable).unwrap();
        run(p, tape, None).unwrap()
    }

    #[test]
    fn filters_agree_with_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..500 {
            let tags = 1 + case % 3;
            let size = rng.gen_range(1..25);
            let tree = UnrankedTree::random(&mut rng, size, &TAGS[..tags]);
            let fcns = random_automaton(&mut rng, Encoding::Fcns, tags);
            let lcns = random_automaton(&mut rng, Encoding::Lcns, tags);
            let back = exec(stream_filter_backward(&fcns, &TAGS[..tags]).unwrap(), &tree, false).report;
            let fwd = exec(stream_filter_forward(&lcns, &TAGS[..tags]).unwrap(), &tree, false).report;
            assert_eq!(back.accepted(), run_bottom_up_reference(&fcns, &tree).unwrap().1);
            assert_eq!(fwd.accepted(), run_bottom_up_reference(&lcns, &tree).unwrap().1);
            assert_eq!(back.reversals, 1);
            assert_eq!(fwd.reversals, 0);
            let bound = tree.depth() as u64 + 1;
            assert!(back.s_peak <= bound && fwd.s_peak <= bound);
        }
    }

    #[test]
    fn path_tree_peak_is_depth_plus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let tree = UnrankedTree::path(5, "a");
        let fcns = random_automaton(&mut rng, Encoding::Fcns, 1);
        let lcns = random_automaton(&mut rng, Encoding::Lcns, 1);
        assert_eq!(exec(stream_filter_backward(&fcns, &["a"]).unwrap(), &tree, false).report.s_peak, 6);
        assert_eq!(exec(stream_filter_forward(&lcns, &["a"]).unwrap(), &tree, false).report.s_peak, 6);
    }

    #[test]
    fn malformed_documents_are_rejected() {
        let aut = BottomUpBDTA::from_fn(Encoding::Fcns, vec!["a".into(), "b".into()], vec!["q".into()], vec![true], |_, _, _| 0)
            .unwrap();
        let lcns = BottomUpBDTA::from_fn(Encoding::Lcns, vec!["a".into(), "b".into()], vec!["q".into()], vec![true], |_, _, _| 0)
            .unwrap();
        let back = stream_filter_backward(&aut, &["a", "b"]).unwrap();
        let fwd = stream_filter_forward(&lcns, &["a", "b"]).unwrap();
        for doc in ["<a></b>", "<a><b></a></b>", "<a/><a/>", "<a></a><b></b>", "<a>", "</a>", "<a><b/>", ""] {
            let tokens: Vec<String> = super::super::events::lex(doc).unwrap().iter().map(|e| e.to_string()).collect();
            for p in [&back as &dyn ControlProgram, &fwd] {
                let tape = load_tape(p.alphabet(), &tokens, false).unwrap();
                assert_eq!(run(p, tape, None).unwrap().report.halted, Halt::Reject, "{doc}");
            }
        }
    }

    #[test]
    fn constant_selections() {
        let tree = UnrankedTree::parse("<a><b/><c><d/></c></a>").unwrap();
        let tags = ["a", "b", "c", "d"];
        let asc = exec(select_ascending(&constant_pair(Encoding::Fcns, true), &tags).unwrap(), &tree, true);
        assert_eq!(asc.output.records(), &[vec![1], vec![2], vec![3], vec![4]]);
        assert_eq!(asc.report.r_used, 3);
        let desc = exec(select_descending(&constant_pair(Encoding::Lcns, true), &tags).unwrap(), &tree, true);
        assert_eq!(desc.output.records(), &[vec![4], vec![3], vec![2], vec![1]]);
        assert_eq!(desc.report.r_used, 2);
        let none = exec(select_ascending(&constant_pair(Encoding::Fcns, false), &tags).unwrap(), &tree, true);
        assert!(none.output.is_empty());
        assert_eq!(none.report.r_used, 3);
        let none = exec(select_descending(&constant_pair(Encoding::Lcns, false), &tags).unwrap(), &tree, true);
        assert!(none.output.is_empty());
        assert_eq!(none.report.r_used, 2);
    }

    #[test]
    fn selections_agree_with_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for case in 0..300 {
            let tags = 1 + case % 3;
            let size = rng.gen_range(1..25);
            let tree = UnrankedTree::random(&mut rng, size, &TAGS[..tags]);
            let fcns = random_pair(&mut rng, Encoding::Fcns, tags);
            let lcns = random_pair(&mut rng, Encoding::Lcns, tags);
            let asc = exec(select_ascending(&fcns, &TAGS[..tags]).unwrap(), &tree, true);
            let desc = exec(select_descending(&lcns, &TAGS[..tags]).unwrap(), &tree, true);
            let flat = |r: &Run| r.output.records().iter().map(|x| x[0]).collect::<Vec<u64>>();
            assert_eq!(flat(&asc), select_reference(&fcns, &tree).unwrap());
            let mut expected = select_reference(&lcns, &tree).unwrap();
            expected.reverse();
            assert_eq!(flat(&desc), expected);
            assert_eq!((asc.report.r_used, desc.report.r_used), (3, 2));
        }
    }

    #[test]
    fn selection_needs_a_writable_tape() {
        let tree = UnrankedTree::parse("<a><b/></a>").unwrap();
        let p = select_ascending(&constant_pair(Encoding::Fcns, true), &["a", "b"]).unwrap();
        let tape = load_tape(p.alphabet(), &tree.to_tokens(), false).unwrap();
        assert!(run(&p, tape, None).unwrap_err().is_read_only_violation());
    }
}
