use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::events::{check_well_formed, Event, EventKind};
use super::TreeError;

/// Ordered, labelled tree. Node ids are 0-based document order, so the
/// 1-based index of node `v` is `v + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnrankedTree {
    labels: Vec<String>,
    children: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
}

impl UnrankedTree {
    pub fn from_events(events: &[Event]) -> Result<Self, TreeError> {
        check_well_formed(events)?;
        let mut tree = UnrankedTree {
            labels: Vec::new(),
            children: Vec::new(),
            parent: Vec::new(),
        };
        let mut open: Vec<usize> = Vec::new();
        for e in events {
            if e.kind == EventKind::Close {
                open.pop();
                continue;
            }
            let id = tree.add(&e.tag, open.last().copied());
            if e.kind == EventKind::Open {
                open.push(id);
            }
        }
        Ok(tree)
    }

    pub fn parse(text: &str) -> Result<Self, TreeError> {
        Self::from_events(&super::events::lex(text)?)
    }

    fn add(&mut self, label: &str, parent: Option<usize>) -> usize {
        let id = self.labels.len();
        self.labels.push(label.to_string());
        self.children.push(Vec::new());
        self.parent.push(parent);
        if let Some(p) = parent {
            self.children[p].push(id);
        }
        id
    }

    /// Builds a tree from a parent array (`parents[0]` is ignored; the other
    /// entries must point to earlier nodes). Children keep insertion order;
    /// ids are renumbered into document order.
    pub fn from_parents(labels: &[String], parents: &[usize]) -> Self {
        let n = labels.len();
        let mut kids = vec![Vec::new(); n];
        for v in 1..n {
            kids[parents[v]].push(v);
        }
        let mut tree = UnrankedTree {
            labels: Vec::with_capacity(n),
            children: Vec::with_capacity(n),
            parent: Vec::with_capacity(n),
        };
        if n == 0 {
            return tree;
        }
        let mut stack = vec![(0usize, None)];
        while let Some((old, parent)) = stack.pop() {
            let id = tree.add(&labels[old], parent);
            for &c in kids[old].iter().rev() {
                stack.push((c, Some(id)));
            }
        }
        tree
    }

    /// Random tree with `nodes` nodes: each new node picks a uniformly random
    /// earlier node as parent and becomes its last child.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, nodes: usize, tags: &[&str]) -> Self {
        assert!(nodes >= 1 && !tags.is_empty());
        let labels: Vec<String> = (0..nodes)
            .map(|_| tags[rng.gen_range(0..tags.len())].to_string())
            .collect();
        let parents: Vec<usize> = (0..nodes)
            .map(|v| if v == 0 { 0 } else { rng.gen_range(0..v) })
            .collect();
        Self::from_parents(&labels, &parents)
    }

    /// A chain of `depth + 1` nodes labelled `tag`.
    pub fn path(depth: usize, tag: &str) -> Self {
        let labels = vec![tag.to_string(); depth + 1];
        let parents: Vec<usize> = (0..=depth).map(|v| v.saturating_sub(1)).collect();
        Self::from_parents(&labels, &parents)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// Length of the longest root-to-leaf path in edges.
    pub fn depth(&self) -> usize {
        let mut d = vec![0usize; self.len()];
        for v in 1..self.len() {
            d[v] = d[self.parent[v].expect("non-root")] + 1;
        }
        d.into_iter().max().unwrap_or(0)
    }

    /// Document-order events; leaves become bachelor tags.
    pub fn to_events(&self) -> Vec<Event> {
        let mut out = Vec::with_capacity(2 * self.len());
        if self.is_empty() {
            return out;
        }
        let mut stack = vec![(0usize, false)];
        while let Some((v, done)) = stack.pop() {
            let tag = &self.labels[v];
            if done {
                out.push(Event::close(tag));
            } else if self.children[v].is_empty() {
                out.push(Event::bachelor(tag));
            } else {
                out.push(Event::open(tag));
                stack.push((v, true));
                for &c in self.children[v].iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    pub fn to_tokens(&self) -> Vec<String> {
        self.to_events().iter().map(Event::to_string).collect()
    }
}

impl fmt::Display for UnrankedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in self.to_events() {
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Encoding {
    /// Left child = first child, right child = next sibling.
    Fcns,
    /// Left child = last child, right child = previous sibling.
    Lcns,
}

impl FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fcns" => Ok(Encoding::Fcns),
            "lcns" => Ok(Encoding::Lcns),
            other => Err(format!("unknown encoding {other:?}")),
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Fcns => "fcns",
            Encoding::Lcns => "lcns",
        })
    }
}

/// Binary encoding of an [`UnrankedTree`]; node ids are shared with it and
/// node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinTree {
    pub encoding: Encoding,
    pub left: Vec<Option<usize>>,
    pub right: Vec<Option<usize>>,
}

impl BinTree {
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    /// Node ids with every node after its binary parent.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        if self.is_empty() {
            return out;
        }
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.right[v]);
            stack.extend(self.left[v]);
        }
        out
    }
}

pub fn bin_encode(tree: &UnrankedTree, encoding: Encoding) -> BinTree {
    let n = tree.len();
    let mut left = vec![None; n];
    let mut right = vec![None; n];
    #[allow(clippy::needless_range_loop)]
    for v in 0..n {
        let kids = tree.children(v);
        match encoding {
            Encoding::Fcns => {
                left[v] = kids.first().copied();
                for w in kids.windows(2) {
                    right[w[0]] = Some(w[1]);
                }
            }
            Encoding::Lcns => {
                left[v] = kids.last().copied();
                for w in kids.windows(2) {
                    right[w[1]] = Some(w[0]);
                }
            }
        }
    }
    BinTree {
        encoding,
        left,
        right,
    }
}
