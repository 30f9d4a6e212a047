use std::collections::HashMap;
use std::fmt::{self, Write as _};

use super::tree::{bin_encode, Encoding, UnrankedTree};
use super::TreeError;

/// Label that matches every tag not listed explicitly.
pub const WILDCARD: &str = "*";

/// Deterministic bottom-up automaton on binary encodings with
/// `δ : label × (Q ∪ {⊥}) × (Q ∪ {⊥}) → Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BottomUpBDTA {
    encoding: Encoding,
    labels: Vec<String>,
    states: Vec<String>,
    finals: Vec<bool>,
    delta: Vec<u32>,
}

fn slot(q: Option<u32>) -> usize {
    q.map_or(0, |q| q as usize + 1)
}

impl BottomUpBDTA {
    pub fn from_fn<F>(
        encoding: Encoding,
        labels: Vec<String>,
        states: Vec<String>,
        finals: Vec<bool>,
        delta: F,
    ) -> Result<Self, TreeError>
    where
        F: Fn(usize, Option<u32>, Option<u32>) -> u32,
    {
        if states.is_empty() {
            return Err(TreeError::Automaton("no states".into()));
        }
        if finals.len() != states.len() {
            return Err(TreeError::Automaton("final flags do not match states".into()));
        }
        let q = states.len() as u32;
        let all = || std::iter::once(None).chain((0..q).map(Some));
        let mut table = Vec::with_capacity(labels.len() * (q as usize + 1).pow(2));
        for a in 0..labels.len() {
            for ql in all() {
                for qr in all() {
                    let target = delta(a, ql, qr);
                    if target >= q {
                        return Err(TreeError::Automaton(format!("transition to unknown state {target}")));
                    }
                    table.push(target);
                }
            }
        }
        Ok(BottomUpBDTA {
            encoding,
            labels,
            states,
            finals,
            delta: table,
        })
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn state_count(&self) -> u32 {
        self.states.len() as u32
    }

    pub fn state_name(&self, q: u32) -> &str {
        &self.states[q as usize]
    }

    pub fn is_final(&self, q: u32) -> bool {
        self.finals[q as usize]
    }

    /// Automaton label used for `tag`: an exact match, else the wildcard.
    pub fn label_index(&self, tag: &str) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l == tag)
            .or_else(|| self.labels.iter().position(|l| l == WILDCARD))
    }

    pub fn delta(&self, label: usize, left: Option<u32>, right: Option<u32>) -> u32 {
        let w = self.states.len() + 1;
        self.delta[(label * w + slot(left)) * w + slot(right)]
    }

    pub fn parse(text: &str) -> Result<Self, TreeError> {
        Ok(parse_sections(text, false)?.0)
    }

    fn write_text(&self, out: &mut String) {
        let _ = writeln!(out, "encoding: {}", self.encoding);
        let _ = writeln!(out, "states: {}", self.states.join(" "));
        let finals: Vec<&str> = (0..self.state_count())
            .filter(|&q| self.is_final(q))
            .map(|q| self.state_name(q))
            .collect();
        let _ = writeln!(out, "final: {}", finals.join(" "));
        let name = |q: Option<u32>| q.map_or("_", |q| self.state_name(q));
        let all: Vec<Option<u32>> = std::iter::once(None).chain((0..self.state_count()).map(Some)).collect();
        for (a, label) in self.labels.iter().enumerate() {
            for &ql in &all {
                for &qr in &all {
                    let q = self.delta(a, ql, qr);
                    let _ = writeln!(out, "{label} {} {} -> {}", name(ql), name(qr), self.state_name(q));
                }
            }
        }
    }
}

impl fmt::Display for BottomUpBDTA {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_text(&mut s);
        f.write_str(&s)
    }
}

/// Edge along which a top-down automaton enters a node of the binary encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Root,
    /// Left edge: first child (fcns) or last child (lcns).
    First,
    /// Right edge: next sibling (fcns) or previous sibling (lcns).
    Next,
}

impl Side {
    const ALL: [Side; 3] = [Side::Root, Side::First, Side::Next];

    fn code(self) -> usize {
        match self {
            Side::Root => 0,
            Side::First => 1,
            Side::Next => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Side::Root => "root",
            Side::First => "first",
            Side::Next => "next",
        }
    }
}

/// A bottom-up automaton `A` plus a deterministic top-down automaton `B`
/// reading `A`-annotated labels, and a selection predicate on `(ρA, ρB)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionPair {
    bottom: BottomUpBDTA,
    td_states: Vec<String>,
    td_init: u32,
    td: Vec<u32>,
    select: Vec<bool>,
}

impl SelectionPair {
    pub fn from_fn<F, S>(
        bottom: BottomUpBDTA,
        td_states: Vec<String>,
        td_init: u32,
        topdown: F,
        select: S,
    ) -> Result<Self, TreeError>
    where
        F: Fn(usize, u32, Side, u32) -> u32,
        S: Fn(u32, u32) -> bool,
    {
        let qb = td_states.len() as u32;
        if qb == 0 || td_init >= qb {
            return Err(TreeError::Automaton("bad top-down states".into()));
        }
        let qa = bottom.state_count();
        let mut td = Vec::new();
        for a in 0..bottom.labels.len() {
            for x in 0..qa {
                for side in Side::ALL {
                    for p in 0..qb {
                        let t = topdown(a, x, side, p);
                        if t >= qb {
                            return Err(TreeError::Automaton(format!("top-down transition to unknown state {t}")));
                        }
                        td.push(t);
                    }
                }
            }
        }
        let select = (0..qa)
            .flat_map(|x| (0..qb).map(move |p| (x, p)))
            .map(|(x, p)| select(x, p))
            .collect();
        Ok(SelectionPair {
            bottom,
            td_states,
            td_init,
            td,
            select,
        })
    }

    pub fn bottom(&self) -> &BottomUpBDTA {
        &self.bottom
    }

    pub fn topdown_state_count(&self) -> u32 {
        self.td_states.len() as u32
    }

    pub fn topdown_init(&self) -> u32 {
        self.td_init
    }

    /// `ρB` of a node with label `label` and `ρA = qa`, entered along `side`
    /// from a node in state `from` (the initial state for the root).
    pub fn topdown(&self, label: usize, qa: u32, side: Side, from: u32) -> u32 {
        let qb = self.td_states.len();
        let qa_count = self.bottom.states.len();
        self.td[((label * qa_count + qa as usize) * 3 + side.code()) * qb + from as usize]
    }

    pub fn selects(&self, qa: u32, qb: u32) -> bool {
        self.select[qa as usize * self.td_states.len() + qb as usize]
    }

    pub fn parse(text: &str) -> Result<Self, TreeError> {
        let (_, pair) = parse_sections(text, true)?;
        Ok(pair.expect("pair requested"))
    }
}

impl fmt::Display for SelectionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.bottom.write_text(&mut s);
        let _ = writeln!(s, "topdown-states: {}", self.td_states.join(" "));
        let _ = writeln!(s, "topdown-init: {}", self.td_states[self.td_init as usize]);
        let qa = self.bottom.state_count();
        let qb = self.topdown_state_count();
        for (a, label) in self.bottom.labels.iter().enumerate() {
            for x in 0..qa {
                for side in Side::ALL {
                    for p in 0..qb {
                        let t = self.topdown(a, x, side, p);
                        let _ = writeln!(
                            s,
                            "topdown: {label}@{} {} {} -> {}",
                            self.bottom.state_name(x),
                            side.name(),
                            self.td_states[p as usize],
                            self.td_states[t as usize]
                        );
                    }
                }
            }
        }
        let pairs: Vec<String> = (0..qa)
            .flat_map(|x| (0..qb).map(move |p| (x, p)))
            .filter(|&(x, p)| self.selects(x, p))
            .map(|(x, p)| format!("({},{})", self.bottom.state_name(x), self.td_states[p as usize]))
            .collect();
        let _ = writeln!(s, "select: {}", pairs.join(" "));
        f.write_str(&s)
    }
}

struct Names {
    index: HashMap<String, u32>,
    names: Vec<String>,
}

impl Names {
    fn new(names: Vec<String>, line: usize) -> Result<Self, TreeError> {
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if n == "_" || index.insert(n.clone(), i as u32).is_some() {
                return Err(TreeError::Format {
                    line,
                    message: format!("bad or duplicate state name {n:?}"),
                });
            }
        }
        Ok(Names { index, names })
    }

    fn get(&self, name: &str, line: usize) -> Result<u32, TreeError> {
        self.index.get(name).copied().ok_or_else(|| TreeError::Format {
            line,
            message: format!("unknown state {name:?}"),
        })
    }
}

type BottomRule = (String, Option<u32>, Option<u32>, u32);
type TopRule = (String, u32, Side, u32, u32);

fn parse_sections(text: &str, want_pair: bool) -> Result<(BottomUpBDTA, Option<SelectionPair>), TreeError> {
    let mut encoding = None;
    let mut states: Option<Names> = None;
    let mut finals = Vec::new();
    let mut rules: Vec<BottomRule> = Vec::new();
    let mut td_states: Option<Names> = None;
    let mut td_init = None;
    let mut td_rules: Vec<TopRule> = Vec::new();
    let mut select = Vec::new();
    let mut labels: Vec<String> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let bad = |message: String| TreeError::Format { line, message };
        let need_states = || states.as_ref().ok_or_else(|| bad("states must come first".into()));
        let words = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
        if let Some(rest) = content.strip_prefix("encoding:") {
            encoding = Some(rest.trim().parse::<Encoding>().map_err(bad)?);
        } else if let Some(rest) = content.strip_prefix("states:") {
            states = Some(Names::new(words(rest), line)?);
        } else if let Some(rest) = content.strip_prefix("final:") {
            let s = need_states()?;
            for w in rest.split_whitespace() {
                finals.push(s.get(w, line)?);
            }
        } else if let Some(rest) = content.strip_prefix("topdown-states:") {
            td_states = Some(Names::new(words(rest), line)?);
        } else if let Some(rest) = content.strip_prefix("topdown-init:") {
            let t = td_states.as_ref().ok_or_else(|| bad("topdown-states must come first".into()))?;
            td_init = Some(t.get(rest.trim(), line)?);
        } else if let Some(rest) = content.strip_prefix("topdown:") {
            let s = need_states()?;
            let t = td_states.as_ref().ok_or_else(|| bad("topdown-states must come first".into()))?;
            let w = words(rest);
            if w.len() != 5 || w[3] != "->" {
                return Err(bad("expected `label@qA side qB -> qB'`".into()));
            }
            let (label, qa) = w[0].split_once('@').ok_or_else(|| bad("missing @".into()))?;
            let side = Side::ALL
                .into_iter()
                .find(|sd| sd.name() == w[1])
                .ok_or_else(|| bad(format!("unknown side {:?}", w[1])))?;
            td_rules.push((label.to_string(), s.get(qa, line)?, side, t.get(&w[2], line)?, t.get(&w[4], line)?));
        } else if let Some(rest) = content.strip_prefix("select:") {
            let s = need_states()?;
            let t = td_states.as_ref().ok_or_else(|| bad("topdown-states must come first".into()))?;
            for item in rest.split_whitespace() {
                let inner = item
                    .strip_prefix('(')
                    .and_then(|x| x.strip_suffix(')'))
                    .and_then(|x| x.split_once(','))
                    .ok_or_else(|| bad(format!("bad select pair {item:?}")))?;
                select.push((s.get(inner.0, line)?, t.get(inner.1, line)?));
            }
        } else {
            let s = need_states()?;
            let w = words(content);
            if w.len() != 5 || w[3] != "->" {
                return Err(bad("expected `label qL qR -> q`".into()));
            }
            let opt = |n: &str| if n == "_" { Ok(None) } else { s.get(n, line).map(Some) };
            rules.push((w[0].clone(), opt(&w[1])?, opt(&w[2])?, s.get(&w[4], line)?));
            if !labels.contains(&w[0]) {
                labels.push(w[0].clone());
            }
        }
    }

    let missing = |what: &str| TreeError::Format {
        line: 0,
        message: format!("missing {what}"),
    };
    let encoding = encoding.ok_or_else(|| missing("encoding"))?;
    let states = states.ok_or_else(|| missing("states"))?;
    let q = states.names.len();
    let w = q + 1;
    let mut table: Vec<Option<u32>> = vec![None; labels.len() * w * w];
    let label_pos = |l: &str| labels.iter().position(|x| x == l).expect("collected");
    for (label, ql, qr, target) in &rules {
        let idx = (label_pos(label) * w + slot(*ql)) * w + slot(*qr);
        if table[idx].replace(*target).is_some_and(|old| old != *target) {
            return Err(TreeError::Automaton(format!("conflicting transitions for {label}")));
        }
    }
    if let Some(pos) = table.iter().position(Option::is_none) {
        return Err(TreeError::Automaton(format!(
            "transition function is not total (label {:?} lacks a case)",
            labels[pos / (w * w)]
        )));
    }
    let mut final_flags = vec![false; q];
    for f in finals {
        final_flags[f as usize] = true;
    }
    let bottom = BottomUpBDTA {
        encoding,
        labels,
        states: states.names,
        finals: final_flags,
        delta: table.into_iter().map(|t| t.expect("total")).collect(),
    };
    if !want_pair {
        return Ok((bottom, None));
    }

    let td_states = td_states.ok_or_else(|| missing("topdown-states"))?;
    let td_init = td_init.ok_or_else(|| missing("topdown-init"))?;
    let qb = td_states.names.len();
    let mut td: Vec<Option<u32>> = vec![None; bottom.labels.len() * q * 3 * qb];
    for (label, qa, side, from, to) in td_rules {
        let a = bottom
            .labels
            .iter()
            .position(|x| *x == label)
            .ok_or_else(|| TreeError::Automaton(format!("top-down label {label:?} has no bottom-up transitions")))?;
        td[((a * q + qa as usize) * 3 + side.code()) * qb + from as usize] = Some(to);
    }
    if td.iter().any(Option::is_none) {
        return Err(TreeError::Automaton("top-down transition function is not total".into()));
    }
    let mut sel = vec![false; q * qb];
    for (x, p) in select {
        sel[x as usize * qb + p as usize] = true;
    }
    let pair = SelectionPair {
        bottom: bottom.clone(),
        td_states: td_states.names,
        td_init,
        td: td.into_iter().map(|t| t.expect("total")).collect(),
        select: sel,
    };
    Ok((bottom, Some(pair)))
}

fn label_map(aut: &BottomUpBDTA, tree: &UnrankedTree) -> Result<Vec<usize>, TreeError> {
    tree.labels()
        .iter()
        .map(|t| aut.label_index(t).ok_or_else(|| TreeError::UnknownLabel(t.clone())))
        .collect()
}

/// In-memory run of `aut` on the binary encoding of `tree`: the state of
/// every node (by node id) and the verdict.
pub fn run_bottom_up_reference(aut: &BottomUpBDTA, tree: &UnrankedTree) -> Result<(Vec<u32>, bool), TreeError> {
    if tree.is_empty() {
        return Err(TreeError::Empty);
    }
    let labels = label_map(aut, tree)?;
    let bin = bin_encode(tree, aut.encoding());
    let mut state = vec![0u32; tree.len()];
    for &v in bin.preorder().iter().rev() {
        let ql = bin.left[v].map(|c| state[c]);
        let qr = bin.right[v].map(|c| state[c]);
        state[v] = aut.delta(labels[v], ql, qr);
    }
    let accept = aut.is_final(state[0]);
    Ok((state, accept))
}

/// 1-based document-order indices selected by `pair`, ascending.
pub fn select_reference(pair: &SelectionPair, tree: &UnrankedTree) -> Result<Vec<u64>, TreeError> {
    let (rho_a, _) = run_bottom_up_reference(pair.bottom(), tree)?;
    let labels = label_map(pair.bottom(), tree)?;
    let bin = bin_encode(tree, pair.bottom().encoding());
    let mut rho_b = vec![0u32; tree.len()];
    rho_b[0] = pair.topdown(labels[0], rho_a[0], Side::Root, pair.topdown_init());
    for v in bin.preorder() {
        for (child, side) in [(bin.left[v], Side::First), (bin.right[v], Side::Next)] {
            if let Some(c) = child {
                rho_b[c] = pair.topdown(labels[c], rho_a[c], side, rho_b[v]);
            }
        }
    }
    Ok((0..tree.len())
        .filter(|&v| pair.selects(rho_a[v], rho_b[v]))
        .map(|v| v as u64 + 1)
        .collect())
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::instances::{make_sets_tree, BitSet};

    #[test]
    fn constant_automaton() {
        for finals in [true, false] {
            let aut = BottomUpBDTA::from_fn(Encoding::Fcns, vec![WILDCARD.into()], vec!["q".into()], vec![finals], |_, _, _| 0)
                .unwrap();
            let t = UnrankedTree::parse("<a><b/><c><d/></c></a>").unwrap();
            assert_eq!(run_bottom_up_reference(&aut, &t).unwrap().1, finals);
        }
    }

    #[test]
    fn contains_label_on_sets_trees() {
        let aut = contains_label(Encoding::Fcns, "1");
        let set = |xs: &[usize]| BitSet::new(1, xs.iter().copied()).unwrap();
        let yes = make_sets_tree(1, &set(&[1]), &set(&[])).unwrap();
        let no = make_sets_tree(1, &set(&[]), &set(&[])).unwrap();
        let tree = |d: &[String]| UnrankedTree::parse(&d.concat()).unwrap();
        assert!(run_bottom_up_reference(&aut, &tree(&yes.document)).unwrap().1);
        assert!(!run_bottom_up_reference(&aut, &tree(&no.document)).unwrap().1);
    }

    #[test]
    fn text_round_trip() {
        let aut = contains_label(Encoding::Lcns, "x");
        let text = aut.to_string();
        assert_eq!(BottomUpBDTA::parse(&text).unwrap(), aut);
        let pair = constant_pair(Encoding::Fcns, true);
        assert_eq!(SelectionPair::parse(&pair.to_string()).unwrap(), pair);
    }

    #[test]
    fn parse_rejects_partial_tables() {
        let text = "encoding: fcns\nstates: q\nfinal: q\na _ _ -> q\n";
        assert!(matches!(BottomUpBDTA::parse(text), Err(TreeError::Automaton(_))));
        assert!(matches!(
            BottomUpBDTA::parse("encoding: fcns\nstates: q\na _ _ -> r\n"),
            Err(TreeError::Format { line: 3, .. })
        ));
        assert!(BottomUpBDTA::parse("encoding: xx\n").is_err());
    }

    #[test]
    fn uncovered_label_is_reported() {
        let aut = BottomUpBDTA::from_fn(Encoding::Fcns, vec!["a".into()], vec!["q".into()], vec![true], |_, _, _| 0).unwrap();
        let t = UnrankedTree::parse("<a><b/></a>").unwrap();
        assert_eq!(run_bottom_up_reference(&aut, &t), Err(TreeError::UnknownLabel("b".into())));
    }

    #[test]
    fn constant_selection() {
        let t = UnrankedTree::parse("<a><b/><c><d/></c></a>").unwrap();
        assert_eq!(select_reference(&constant_pair(Encoding::Fcns, true), &t).unwrap(), vec![1, 2, 3, 4]);
        assert!(select_reference(&constant_pair(Encoding::Lcns, false), &t).unwrap().is_empty());
    }
}
