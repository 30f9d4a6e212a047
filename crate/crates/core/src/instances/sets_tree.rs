use super::{BitSet, InstanceError};

/// Selects `x_i` exactly when `i ∈ X ∩ Y` on a sets tree.
pub const SETS_TREE_QUERY: &str =
    "/descendant::*[child::right/child::right/child::1]/child::left/child::1";

/// `Doc(T_n(X,Y))` together with the position splitting the X-part from the Y-part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetsTreeInstance {
    pub n: usize,
    pub x: BitSet,
    pub y: BitSet,
    pub document: Vec<String>,
    /// Position of the innermost `<left/>` token; cells up to here depend on X only.
    pub split: usize,
}

impl SetsTreeInstance {
    /// Document-order index of the leaf `x_i` (opening and bachelor tags counted from 1).
    pub fn x_leaf_index(&self, i: usize) -> usize {
        3 * i
    }

    /// Document-order index of the leaf `y_i`.
    pub fn y_leaf_index(&self, i: usize) -> usize {
        // Everything before level i's `right` subtree: 3(n-1)+4 nodes through the
        // innermost leaves, then 3 nodes (right, right, y) per level from n down to i.
        3 * self.n + 1 + 3 * (self.n - i + 1)
    }
}

fn leaf(set: &BitSet, i: usize) -> String {
    format!("<{}/>", u8::from(set.contains(i)))
}

/// Builds `T_n(X,Y)`. Level `i` is a node with children `left(x_i, level i+1)` and
/// `right(right(y_i))`; the outermost level is labelled `root`, the others `left`,
/// and the innermost `left` subtree ends in a bachelor `<left/>`.
pub fn make_sets_tree(n: usize, x: &BitSet, y: &BitSet) -> Result<SetsTreeInstance, InstanceError> {
    if n == 0 {
        return Err(InstanceError::EmptyUniverse);
    }
    for set in [x, y] {
        if let Some(bad) = set.members().find(|&i| i > n) {
            return Err(InstanceError::Range { element: bad, n });
        }
    }
    let x = BitSet::new(n, x.members())?;
    let y = BitSet::new(n, y.members())?;
    let mut doc = Vec::with_capacity(10 * n + 1);
    for i in 1..=n {
        let label = if i == 1 { "root" } else { "left" };
        doc.push(format!("<{label}>"));
        doc.push("<left>".to_string());
        doc.push(leaf(&x, i));
    }
    doc.push("<left/>".to_string());
    let split = doc.len();
    for i in (1..=n).rev() {
        let label = if i == 1 { "root" } else { "left" };
        doc.push("</left>".to_string());
        doc.push("<right>".to_string());
        doc.push("<right>".to_string());
        doc.push(leaf(&y, i));
        doc.push("</right>".to_string());
        doc.push("</right>".to_string());
        doc.push(format!("</{label}>"));
    }
    Ok(SetsTreeInstance {
        n,
        x,
        y,
        document: doc,
        split,
    })
}

/// Document-order indices of `{x_i : i ∈ X ∩ Y}`, ascending.
pub fn sets_tree_oracle(inst: &SetsTreeInstance) -> Vec<usize> {
    inst.x
        .members()
        .filter(|&i| inst.y.contains(i))
        .map(|i| inst.x_leaf_index(i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node_index(doc: &[String], token_pos: usize) -> usize {
        doc[..token_pos].iter().filter(|t| !t.starts_with("</")).count()
    }

    #[test]
    fn single_level_document() {
        let inst = make_sets_tree(1, &BitSet::new(1, [1]).unwrap(), &BitSet::empty(1)).unwrap();
        assert_eq!(
            inst.document.concat(),
            "<root><left><1/><left/></left><right><right><0/></right></right></root>"
        );
        assert_eq!(inst.split, 4);
        assert_eq!(inst.document.len(), 11);
    }

    #[test]
    fn shape_constraints() {
        for n in 1..=6 {
            for xm in 0u32..1 << n {
                let ym = xm.rotate_left(3) ^ 0b1011;
                let x = BitSet::new(n, (1..=n).filter(|i| xm >> (i - 1) & 1 == 1)).unwrap();
                let y = BitSet::new(n, (1..=n).filter(|i| ym >> (i - 1) & 1 == 1)).unwrap();
                let inst = make_sets_tree(n, &x, &y).unwrap();
                let doc = &inst.document;
                assert_eq!(doc.len(), 10 * n + 1);
                assert_eq!(inst.split, 3 * n + 1);
                let leaves: Vec<usize> = (0..doc.len())
                    .filter(|&p| doc[p] == "<0/>" || doc[p] == "<1/>")
                    .collect();
                assert_eq!(leaves.len(), 2 * n);
                for i in 1..=n {
                    let xp = leaves[i - 1];
                    let yp = leaves[2 * n - i];
                    assert_eq!(doc[xp] == "<1/>", x.contains(i));
                    assert_eq!(doc[yp] == "<1/>", y.contains(i));
                    assert_eq!(node_index(doc, xp + 1), inst.x_leaf_index(i));
                    assert_eq!(node_index(doc, yp + 1), inst.y_leaf_index(i));
                }
            }
        }
    }

    #[test]
    fn halves_depend_on_one_set_each() {
        let n = 4;
        let sets: Vec<BitSet> = (0u32..16)
            .map(|m| BitSet::new(n, (1..=n).filter(|i| m >> (i - 1) & 1 == 1)).unwrap())
            .collect();
        for x in &sets {
            for y in &sets {
                let a = make_sets_tree(n, x, y).unwrap();
                let b = make_sets_tree(n, x, &sets[5]).unwrap();
                let c = make_sets_tree(n, &sets[9], y).unwrap();
                assert_eq!(a.document[..a.split], b.document[..b.split]);
                assert_eq!(a.document[a.split..], c.document[c.split..]);
            }
        }
    }

    #[test]
    fn oracle_and_errors() {
        let one = BitSet::new(2, [1]).unwrap();
        let inst = make_sets_tree(2, &one, &one).unwrap();
        assert_eq!(sets_tree_oracle(&inst), vec![3]);
        let inst = make_sets_tree(2, &one, &BitSet::new(2, [2]).unwrap()).unwrap();
        assert!(sets_tree_oracle(&inst).is_empty());
        assert!(matches!(
            make_sets_tree(1, &BitSet::new(3, [2]).unwrap(), &BitSet::empty(1)),
            Err(InstanceError::Range { element: 2, n: 1 })
        ));
        assert!(make_sets_tree(0, &BitSet::empty(0), &BitSet::empty(0)).is_err());
    }
}
