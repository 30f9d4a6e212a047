//! Downward queries as tree automata.
//!
//! A bottom-up state is a bit vector with one bit per query step `a`. For a
//! child step the bit says some node among the current node and its later
//! siblings (in binary-encoding order) matches the rest of the path from `a`
//! on; for a descendant step it says the same for the whole binary subtree.
//! Both encodings use the same transition because every test is an
//! existential over children or descendants.

use std::collections::HashMap;

use crate::treelang::{BottomUpBDTA, Encoding, SelectionPair, Side};

use super::ast::{Axis, CoreXPath, LocationPath, NodeTest, Pred};
use super::XPathError;

type Bits = u128;

#[derive(Debug)]
enum CPred {
    And(Box<CPred>, Box<CPred>),
    Or(Box<CPred>, Box<CPred>),
    Not(Box<CPred>),
    Path(usize),
}

#[derive(Debug)]
struct CStep {
    axis: Axis,
    /// Label index required by the node test; `None` for `*`.
    test: Option<usize>,
    pred: Option<CPred>,
    attr: usize,
}

#[derive(Debug)]
struct Plan {
    paths: Vec<Vec<CStep>>,
    labels: Vec<String>,
    attrs: usize,
    absolute: bool,
    /// Keep per-node step tests in the state (needed by the top-down pass).
    local: bool,
}

impl Plan {
    fn new(query: &CoreXPath, local: bool) -> Result<Self, XPathError> {
        if !query.is_downward() {
            return Err(XPathError::NotCompilable(format!(
                "{query} uses an upward axis; only child and descendant compile"
            )));
        }
        let mut labels = query.names();
        labels.push(crate::treelang::WILDCARD.to_string());
        let mut plan = Plan {
            paths: Vec::new(),
            labels,
            attrs: 0,
            absolute: query.absolute,
            local,
        };
        plan.add_path(&query.path);
        if plan.main_bits() > Bits::BITS as usize {
            return Err(XPathError::NotCompilable(format!(
                "{query} needs {} attribute bits; at most {} are supported",
                plan.main_bits(),
                Bits::BITS
            )));
        }
        Ok(plan)
    }

    fn add_path(&mut self, path: &LocationPath) -> usize {
        let id = self.paths.len();
        self.paths.push(Vec::new());
        let mut steps = Vec::with_capacity(path.steps.len());
        for s in &path.steps {
            let test = match &s.test {
                NodeTest::Any => None,
                NodeTest::Name(n) => self.labels.iter().position(|l| l == n),
            };
            let pred = s.predicate.as_ref().map(|p| self.add_pred(p));
            steps.push(CStep {
                axis: s.axis,
                test,
                pred,
                attr: self.attrs,
            });
            self.attrs += 1;
        }
        self.paths[id] = steps;
        id
    }

    fn add_pred(&mut self, pred: &Pred) -> CPred {
        match pred {
            Pred::And(a, b) => CPred::And(Box::new(self.add_pred(a)), Box::new(self.add_pred(b))),
            Pred::Or(a, b) => CPred::Or(Box::new(self.add_pred(a)), Box::new(self.add_pred(b))),
            Pred::Not(a) => CPred::Not(Box::new(self.add_pred(a))),
            Pred::Path(p) => CPred::Path(self.add_path(p)),
        }
    }

    fn main_len(&self) -> usize {
        self.paths[0].len()
    }

    fn main_bits(&self) -> usize {
        self.attrs + self.main_len() + 2
    }

    fn attr(&self, a: usize) -> Bits {
        1 << a
    }

    /// Node-local test of main-path step `j` (node test and predicate).
    fn holds_main(&self, j: usize) -> Bits {
        1 << (self.attrs + j)
    }

    fn top(&self) -> Bits {
        1 << (self.attrs + self.main_len())
    }

    fn anywhere(&self) -> Bits {
        1 << (self.attrs + self.main_len() + 1)
    }

    fn accepting(&self) -> Bits {
        if self.absolute {
            self.top()
        } else {
            self.anywhere()
        }
    }

    /// Whether the node owning first-child vector `child` has a match of
    /// path `p` from step `j` on.
    fn continues(&self, child: Bits, p: usize, j: usize) -> bool {
        let Some(step) = self.paths[p].get(j) else {
            return true;
        };
        child & self.attr(step.attr) != 0
    }

    fn pred(&self, pred: &CPred, child: Bits) -> bool {
        match pred {
            CPred::And(a, b) => self.pred(a, child) && self.pred(b, child),
            CPred::Or(a, b) => self.pred(a, child) || self.pred(b, child),
            CPred::Not(a) => !self.pred(a, child),
            CPred::Path(p) => self.continues(child, *p, 0),
        }
    }

    fn delta(&self, label: usize, child: Bits, sibling: Bits) -> Bits {
        let mut out = 0;
        for (p, steps) in self.paths.iter().enumerate() {
            for (j, s) in steps.iter().enumerate() {
                let holds = s.test.is_none_or(|t| t == label) && s.pred.as_ref().is_none_or(|e| self.pred(e, child));
                if p == 0 && holds && self.local {
                    out |= self.holds_main(j);
                }
                let bit = self.attr(s.attr);
                let below = match s.axis {
                    Axis::Child => sibling,
                    _ => child | sibling,
                };
                if (holds && self.continues(child, p, j + 1)) || below & bit != 0 {
                    out |= bit;
                }
            }
        }
        if self.continues(child, 0, 0) {
            out |= self.top() | self.anywhere();
        }
        out | ((child | sibling) & self.anywhere())
    }

    fn build_bottom_up(&self, encoding: Encoding) -> Result<(BottomUpBDTA, Vec<Bits>), XPathError> {
        let mut states: Vec<Bits> = Vec::new();
        let mut index: HashMap<Bits, u32> = HashMap::new();
        let mut add = |v: Bits, states: &mut Vec<Bits>| {
            index.entry(v).or_insert_with(|| {
                states.push(v);
                states.len() as u32 - 1
            });
        };
        for a in 0..self.labels.len() {
            add(self.delta(a, 0, 0), &mut states);
        }
        let mut done = 0;
        while done < states.len() {
            let s = states[done];
            for t in std::iter::once(None).chain((0..=done).map(Some)) {
                let t = t.map_or(0, |i| states[i]);
                for a in 0..self.labels.len() {
                    add(self.delta(a, s, t), &mut states);
                    add(self.delta(a, t, s), &mut states);
                }
            }
            done += 1;
        }
        let lookup: HashMap<Bits, u32> = states.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
        let vec_of = |q: Option<u32>| q.map_or(0, |q| states[q as usize]);
        let aut = BottomUpBDTA::from_fn(
            encoding,
            self.labels.clone(),
            (0..states.len()).map(|i| format!("q{i}")).collect(),
            states.iter().map(|&v| v & self.accepting() != 0).collect(),
            |a, l, r| lookup[&self.delta(a, vec_of(l), vec_of(r))],
        )?;
        Ok((aut, states))
    }

    // Top-down vector layout for a main path of k steps: bit j holds
    // ctx_j(parent), bit k+j "some proper ancestor has ctx_j", bit 2k+j
    // ctx_j(node), where ctx_j means "lies at the end of a match of the
    // first j steps".
    fn topdown(&self, qa: Bits, side: Side, from: Bits) -> Bits {
        let k = self.main_len();
        let low = (1 << k) - 1;
        let (parent, above) = match side {
            Side::Root => (0, 0),
            Side::First => {
                let own = (from >> (2 * k)) & low;
                (own, ((from >> k) & low) | own)
            }
            Side::Next => (from & low, (from >> k) & low),
        };
        let mut ctx: Bits = u128::from(side == Side::Root || !self.absolute);
        for (j, step) in self.paths[0].iter().enumerate() {
            let source = if step.axis == Axis::Child { parent } else { above };
            if qa & self.holds_main(j) != 0 && source >> j & 1 == 1 {
                ctx |= 1 << (j + 1);
            }
        }
        parent | (above << k) | (ctx << (2 * k))
    }

    fn selected(&self, qb: Bits) -> bool {
        let k = self.main_len();
        qb >> (3 * k) & 1 == 1
    }
}

/// Bottom-up automaton accepting exactly the trees on which the query
/// selects at least one node.
pub fn compile_filter(query: &CoreXPath, encoding: Encoding) -> Result<BottomUpBDTA, XPathError> {
    Ok(Plan::new(query, false)?.build_bottom_up(encoding)?.0)
}

/// Selection pair whose selected nodes are exactly the query's result.
pub fn compile_selector(query: &CoreXPath, encoding: Encoding) -> Result<SelectionPair, XPathError> {
    let plan = Plan::new(query, true)?;
    if 3 * plan.main_len() + 1 > Bits::BITS as usize {
        return Err(XPathError::NotCompilable(format!("{query} has too many steps")));
    }
    let (bottom, qa_vecs) = plan.build_bottom_up(encoding)?;
    let mut states: Vec<Bits> = vec![0];
    let mut index: HashMap<Bits, u32> = HashMap::from([(0, 0)]);
    let mut add = |v: Bits, states: &mut Vec<Bits>| {
        index.entry(v).or_insert_with(|| {
            states.push(v);
            states.len() as u32 - 1
        });
    };
    for &qa in &qa_vecs {
        add(plan.topdown(qa, Side::Root, 0), &mut states);
    }
    let mut done = 0;
    while done < states.len() {
        let from = states[done];
        for &qa in &qa_vecs {
            for side in [Side::First, Side::Next] {
                add(plan.topdown(qa, side, from), &mut states);
            }
        }
        done += 1;
    }
    let lookup: HashMap<Bits, u32> = states.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
    let pair = SelectionPair::from_fn(
        bottom,
        (0..states.len()).map(|i| format!("p{i}")).collect(),
        0,
        |_, qa, side, from| lookup[&plan.topdown(qa_vecs[qa as usize], side, states[from as usize])],
        |_, qb| plan.selected(states[qb as usize]),
    )?;
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{make_sets_tree, sets_tree_oracle, BitSet, SETS_TREE_QUERY};
    use crate::meter::{load_tape, run, ControlProgram};
    use crate::treelang::{
        run_bottom_up_reference, select_ascending, select_descending, select_reference, stream_filter_backward,
        stream_filter_forward, UnrankedTree,
    };
    use crate::xpath::{eval_reference, parse_corexpath, random_query};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tags_of(tree: &UnrankedTree) -> Vec<String> {
        let mut t = tree.labels().to_vec();
        t.sort();
        t.dedup();
        t
    }

    fn outputs<P: ControlProgram>(p: P, tree: &UnrankedTree, writable: bool) -> (bool, Vec<u64>) {
        let tape = load_tape(p.alphabet(), &tree.to_tokens(), writable).unwrap();
        let r = run(p, tape, None).unwrap();
        (r.report.accepted(), r.output.records().iter().map(|x| x[0]).collect())
    }

    #[test]
    fn upward_axes_do_not_compile() {
        for q in ["/child::a/parent::*", "descendant::a[ancestor::b]", "child::a[not(parent::b)]"] {
            let q = parse_corexpath(q).unwrap();
            assert!(matches!(compile_filter(&q, Encoding::Fcns), Err(XPathError::NotCompilable(_))));
            assert!(matches!(compile_selector(&q, Encoding::Lcns), Err(XPathError::NotCompilable(_))));
        }
    }

    #[test]
    fn root_child_filter() {
        let q = parse_corexpath("/child::A").unwrap();
        let aut = compile_filter(&q, Encoding::Fcns).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let size = rng.gen_range(1..10);
            let tree = UnrankedTree::random(&mut rng, size, &["A", "B"]);
            let expected = tree.children(0).iter().any(|&c| tree.label(c) == "A");
            assert_eq!(run_bottom_up_reference(&aut, &tree).unwrap().1, expected);
        }
    }

    #[test]
    fn trivial_selections() {
        let tree = UnrankedTree::parse("<r><a/><b><c/></b><a/></r>").unwrap();
        let pair = compile_selector(&parse_corexpath("/child::*").unwrap(), Encoding::Fcns).unwrap();
        assert_eq!(select_reference(&pair, &tree).unwrap(), vec![2, 3, 5]);
        let pair = compile_selector(&parse_corexpath("descendant::Z").unwrap(), Encoding::Fcns).unwrap();
        assert!(select_reference(&pair, &tree).unwrap().is_empty());
    }

    #[test]
    fn sets_tree_query_streams() {
        let q = parse_corexpath(SETS_TREE_QUERY).unwrap();
        let back = compile_filter(&q, Encoding::Fcns).unwrap();
        let asc = compile_selector(&q, Encoding::Fcns).unwrap();
        let desc = compile_selector(&q, Encoding::Lcns).unwrap();
        for n in 1..=4usize {
            for xm in 0u32..1 << n {
                for ym in 0u32..1 << n {
                    let set = |m: u32| BitSet::new(n, (1..=n).filter(|i| m >> (i - 1) & 1 == 1)).unwrap();
                    let inst = make_sets_tree(n, &set(xm), &set(ym)).unwrap();
                    let tree = UnrankedTree::parse(&inst.document.concat()).unwrap();
                    let tags = tags_of(&tree);
                    let x1 = inst.x_leaf_index(1);
                    let expected: Vec<u64> =
                        sets_tree_oracle(&inst).into_iter().filter(|&i| i != x1).map(|i| i as u64).collect();
                    let (verdict, _) = outputs(stream_filter_backward(&back, &tags).unwrap(), &tree, false);
                    assert_eq!(verdict, !expected.is_empty());
                    assert_eq!(outputs(select_ascending(&asc, &tags).unwrap(), &tree, true).1, expected);
                    let mut rev = expected.clone();
                    rev.reverse();
                    assert_eq!(outputs(select_descending(&desc, &tags).unwrap(), &tree, true).1, rev);
                }
            }
        }
    }

    #[test]
    fn compiled_automata_match_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..300 {
            let size = rng.gen_range(1..=20);
            let tree = UnrankedTree::random(&mut rng, size, &["a", "b", "c"]);
            let q = random_query(&mut rng, &["a", "b"], 3, false);
            let expected: Vec<u64> = eval_reference(&q, &tree).into_iter().collect();
            let tags = tags_of(&tree);
            let fcns = compile_filter(&q, Encoding::Fcns).unwrap();
            let lcns = compile_filter(&q, Encoding::Lcns).unwrap();
            let (back, _) = outputs(stream_filter_backward(&fcns, &tags).unwrap(), &tree, false);
            let (fwd, _) = outputs(stream_filter_forward(&lcns, &tags).unwrap(), &tree, false);
            assert_eq!(back, !expected.is_empty(), "{q} on {tree}");
            assert_eq!(fwd, !expected.is_empty(), "{q} on {tree}");
            let asc = compile_selector(&q, Encoding::Fcns).unwrap();
            let desc = compile_selector(&q, Encoding::Lcns).unwrap();
            assert_eq!(outputs(select_ascending(&asc, &tags).unwrap(), &tree, true).1, expected, "{q} on {tree}");
            let mut rev = expected.clone();
            rev.reverse();
            assert_eq!(outputs(select_descending(&desc, &tags).unwrap(), &tree, true).1, rev, "{q} on {tree}");
        }
    }
}
