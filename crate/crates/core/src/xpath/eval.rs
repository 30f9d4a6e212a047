use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;

use crate::treelang::UnrankedTree;

use super::ast::{Axis, CoreXPath, LocationPath, Pred, Step};

/// 1-based document-order indices.
pub type NodeSet = BTreeSet<u64>;

/// A binary relation on the nodes: row `x` holds every `y` with `⟨x, y⟩`.
type Relation = Vec<FixedBitSet>;

struct Evaluator<'t> {
    tree: &'t UnrankedTree,
    n: usize,
}

impl Evaluator<'_> {
    fn empty_set(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.n)
    }

    fn axis(&self, axis: Axis) -> Relation {
        let t = self.tree;
        let mut rel = vec![self.empty_set(); self.n];
        for y in 0..self.n {
            let mut up = t.parent(y);
            let mut first = true;
            while let Some(x) = up {
                match axis {
                    Axis::Child if first => rel[x].insert(y),
                    Axis::Parent if first => rel[y].insert(x),
                    Axis::Descendant => rel[x].insert(y),
                    Axis::Ancestor => rel[y].insert(x),
                    _ => {}
                }
                first = false;
                up = t.parent(x);
            }
        }
        rel
    }

    fn step(&self, step: &Step) -> Relation {
        let mut targets = self.empty_set();
        for y in 0..self.n {
            targets.set(y, step.test.matches(self.tree.label(y)));
        }
        if let Some(p) = &step.predicate {
            targets.intersect_with(&self.pred(p));
        }
        let mut rel = self.axis(step.axis);
        for row in &mut rel {
            row.intersect_with(&targets);
        }
        rel
    }

    fn path(&self, path: &LocationPath) -> Relation {
        let mut rel = self.step(&path.steps[0]);
        for s in &path.steps[1..] {
            let next = self.step(s);
            rel = rel
                .iter()
                .map(|row| {
                    let mut out = self.empty_set();
                    for y in row.ones() {
                        out.union_with(&next[y]);
                    }
                    out
                })
                .collect();
        }
        rel
    }

    fn pred(&self, pred: &Pred) -> FixedBitSet {
        match pred {
            Pred::And(a, b) => {
                let mut s = self.pred(a);
                s.intersect_with(&self.pred(b));
                s
            }
            Pred::Or(a, b) => {
                let mut s = self.pred(a);
                s.union_with(&self.pred(b));
                s
            }
            Pred::Not(a) => {
                let mut s = self.pred(a);
                s.toggle_range(..);
                s
            }
            Pred::Path(p) => {
                let rel = self.path(p);
                let mut s = self.empty_set();
                for (x, row) in rel.iter().enumerate() {
                    s.set(x, !row.is_clear());
                }
                s
            }
        }
    }

    fn query(&self, q: &CoreXPath) -> Relation {
        let rel = self.path(&q.path);
        if q.absolute {
            vec![rel[0].clone(); self.n]
        } else {
            rel
        }
    }
}

/// `Eval(Q, T)`: every node reached from some context node.
pub fn eval_reference(query: &CoreXPath, tree: &UnrankedTree) -> NodeSet {
    let ev = Evaluator { tree, n: tree.len() };
    let mut hit = ev.empty_set();
    for row in ev.query(query) {
        hit.union_with(&row);
    }
    hit.ones().map(|v| v as u64 + 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{make_sets_tree, sets_tree_oracle, BitSet, SETS_TREE_QUERY};
    use crate::xpath::{parse_corexpath, random_query, NodeTest};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Pairs = BTreeSet<(usize, usize)>;

    /// Independent brute force: relations as explicit pair sets.
    struct Naive<'t>(&'t UnrankedTree);

    impl Naive<'_> {
        fn is_ancestor(&self, x: usize, y: usize) -> bool {
            let mut up = self.0.parent(y);
            while let Some(u) = up {
                if u == x {
                    return true;
                }
                up = self.0.parent(u);
            }
            false
        }

        fn axis(&self, axis: Axis, x: usize, y: usize) -> bool {
            match axis {
                Axis::Child => self.0.parent(y) == Some(x),
                Axis::Parent => self.0.parent(x) == Some(y),
                Axis::Descendant => self.is_ancestor(x, y),
                Axis::Ancestor => self.is_ancestor(y, x),
            }
        }

        fn nodes(&self) -> std::ops::Range<usize> {
            0..self.0.len()
        }

        fn s(&self, path: &LocationPath) -> Pairs {
            let step = &path.steps[path.steps.len() - 1];
            let e = step.predicate.as_ref().map(|p| self.e(p));
            let last: Pairs = self
                .nodes()
                .flat_map(|x| self.nodes().map(move |y| (x, y)))
                .filter(|&(x, y)| {
                    self.axis(step.axis, x, y)
                        && match &step.test {
                            NodeTest::Any => true,
                            NodeTest::Name(n) => self.0.label(y) == n,
                        }
                        && e.as_ref().is_none_or(|e| e.contains(&y))
                })
                .collect();
            if path.steps.len() == 1 {
                return last;
            }
            let prefix = self.s(&LocationPath {
                steps: path.steps[..path.steps.len() - 1].to_vec(),
            });
            let mut out = Pairs::new();
            for x in self.nodes() {
                for z in self.nodes() {
                    if self.nodes().any(|y| prefix.contains(&(x, y)) && last.contains(&(y, z))) {
                        out.insert((x, z));
                    }
                }
            }
            out
        }

        fn e(&self, pred: &Pred) -> BTreeSet<usize> {
            match pred {
                Pred::And(a, b) => self.e(a).intersection(&self.e(b)).copied().collect(),
                Pred::Or(a, b) => self.e(a).union(&self.e(b)).copied().collect(),
                Pred::Not(a) => {
                    let inner = self.e(a);
                    self.nodes().filter(|v| !inner.contains(v)).collect()
                }
                Pred::Path(p) => {
                    let s = self.s(p);
                    self.nodes().filter(|&x| self.nodes().any(|y| s.contains(&(x, y)))).collect()
                }
            }
        }

        fn eval(&self, q: &CoreXPath) -> NodeSet {
            let s = self.s(&q.path);
            let pairs: Pairs = if q.absolute {
                self.nodes()
                    .flat_map(|v| self.nodes().filter(|&x| s.contains(&(0, x))).map(move |x| (v, x)))
                    .collect()
            } else {
                s
            };
            pairs.into_iter().map(|(_, y)| y as u64 + 1).collect()
        }
    }

    #[test]
    fn section_two_example() {
        let tree = UnrankedTree::parse("<root><c><A/><B/></c><d><A/></d></root>").unwrap();
        let q = parse_corexpath("/descendant::*[child::A and child::B]/child::*").unwrap();
        assert_eq!(eval_reference(&q, &tree), NodeSet::from([3, 4]));
    }

    #[test]
    fn child_on_single_node_is_empty() {
        let tree = UnrankedTree::parse("<a/>").unwrap();
        assert!(eval_reference(&parse_corexpath("child::*").unwrap(), &tree).is_empty());
    }

    #[test]
    fn sets_tree_query_exhaustive() {
        let q = parse_corexpath(SETS_TREE_QUERY).unwrap();
        for n in 1..=6usize {
            for xm in 0u32..1 << n {
                for ym in 0u32..1 << n {
                    let set = |m: u32| BitSet::new(n, (1..=n).filter(|i| m >> (i - 1) & 1 == 1)).unwrap();
                    let inst = make_sets_tree(n, &set(xm), &set(ym)).unwrap();
                    let tree = UnrankedTree::parse(&inst.document.concat()).unwrap();
                    // The root is nobody's descendant, so level 1 never matches.
                    let x1 = inst.x_leaf_index(1);
                    let expected: NodeSet =
                        sets_tree_oracle(&inst).into_iter().filter(|&i| i != x1).map(|i| i as u64).collect();
                    assert_eq!(eval_reference(&q, &tree), expected);
                }
            }
        }
    }

    #[test]
    fn agrees_with_naive_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..300 {
            let size = rng.gen_range(1..=8);
            let tree = UnrankedTree::random(&mut rng, size, &["a", "b"]);
            let q = random_query(&mut rng, &["a", "b"], 3, true);
            assert_eq!(eval_reference(&q, &tree), Naive(&tree).eval(&q), "{q} on {tree}");
        }
    }
}
