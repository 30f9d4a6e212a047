use std::collections::BTreeSet;

use super::{BitSet, InstanceError};

/// A binary relation over the naturals, kept sorted and duplicate-free.
pub type Relation = BTreeSet<(u64, u64)>;

fn open(tag: &str) -> String {
    format!("<{tag}>")
}

fn close(tag: &str) -> String {
    format!("</{tag}>")
}

fn push_bin(out: &mut Vec<String>, v: u64) {
    let bits = if v == 0 { 1 } else { 64 - v.leading_zeros() };
    for i in (0..bits).rev() {
        out.push(if (v >> i) & 1 == 1 { "<1/>" } else { "<0/>" }.to_string());
    }
}

/// `Doc(i,j)`: a `tuple` element holding the binary digits of `i` and `j`.
pub fn encode_tuple(i: u64, j: u64) -> Vec<String> {
    let mut out = vec![open("tuple"), open("no1")];
    push_bin(&mut out, i);
    out.push(close("no1"));
    out.push(open("no2"));
    push_bin(&mut out, j);
    out.push(close("no2"));
    out.push(close("tuple"));
    out
}

/// `Doc(T(A,B))`; each relation is listed in lexicographic order.
pub fn encode_relpair(a: &Relation, b: &Relation) -> Vec<String> {
    let mut out = vec![open("rels"), open("rel1")];
    for &(i, j) in a {
        out.extend(encode_tuple(i, j));
    }
    out.push(close("rel1"));
    out.push(open("rel2"));
    for &(i, j) in b {
        out.extend(encode_tuple(i, j));
    }
    out.push(close("rel2"));
    out.push(close("rels"));
    out
}

struct Cursor<'a, S> {
    tokens: &'a [S],
    pos: usize,
}

impl<S: AsRef<str>> Cursor<'_, S> {
    fn peek(&self) -> Option<&str> {
        self.tokens.get(self.pos).map(AsRef::as_ref)
    }

    fn fail(&self, expected: &'static str) -> InstanceError {
        InstanceError::Parse {
            position: self.pos + 1,
            expected,
            found: self.peek().unwrap_or("end of input").to_string(),
        }
    }

    fn expect(&mut self, token: &str, expected: &'static str) -> Result<(), InstanceError> {
        if self.peek() == Some(token) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.fail(expected))
        }
    }

    fn number(&mut self, expected: &'static str) -> Result<u64, InstanceError> {
        let mut v = 0u64;
        let mut digits = 0;
        while let Some(d) = match self.peek() {
            Some("<0/>") => Some(0),
            Some("<1/>") => Some(1),
            _ => None,
        } {
            if digits == 64 {
                return Err(self.fail("a number of at most 64 bits"));
            }
            v = (v << 1) | d;
            digits += 1;
            self.pos += 1;
        }
        if digits == 0 {
            return Err(self.fail(expected));
        }
        Ok(v)
    }

    fn relation(&mut self, end: &str, expected: &'static str) -> Result<Relation, InstanceError> {
        let mut rel = Relation::new();
        loop {
            match self.peek() {
                Some("<tuple>") => {
                    self.pos += 1;
                    self.expect("<no1>", "<no1>")?;
                    let i = self.number("a binary digit")?;
                    self.expect("</no1>", "</no1>")?;
                    self.expect("<no2>", "<no2>")?;
                    let j = self.number("a binary digit")?;
                    self.expect("</no2>", "</no2>")?;
                    self.expect("</tuple>", "</tuple>")?;
                    rel.insert((i, j));
                }
                Some(t) if t == end => {
                    self.pos += 1;
                    return Ok(rel);
                }
                _ => return Err(self.fail(expected)),
            }
        }
    }
}

/// Parses `Doc(T(A,B))` back into canonical relations.
pub fn decode_relpair<S: AsRef<str>>(tokens: &[S]) -> Result<(Relation, Relation), InstanceError> {
    let mut c = Cursor { tokens, pos: 0 };
    c.expect("<rels>", "<rels>")?;
    c.expect("<rel1>", "<rel1>")?;
    let a = c.relation("</rel1>", "<tuple> or </rel1>")?;
    c.expect("<rel2>", "<rel2>")?;
    let b = c.relation("</rel2>", "<tuple> or </rel2>")?;
    c.expect("</rels>", "</rels>")?;
    if c.pos != tokens.len() {
        return Err(c.fail("end of input"));
    }
    Ok((a, b))
}

/// `A ⋈₁ B = {(x, y) : ∃z A(z, x) ∧ B(z, y)}` by nested loops.
pub fn join1_oracle(a: &Relation, b: &Relation) -> Relation {
    let mut out = Relation::new();
    for &(z1, x) in a {
        for &(z2, y) in b {
            if z1 == z2 {
                out.insert((x, y));
            }
        }
    }
    out
}

/// `A_X = {(i,1) : i ∈ X}` and `B_Y = {(i,2) : i ∈ Y}`.
pub fn reduce_disj_to_join(x: &BitSet, y: &BitSet) -> (Relation, Relation) {
    let a = x.members().map(|i| (i as u64, 1)).collect();
    let b = y.members().map(|i| (i as u64, 2)).collect();
    (a, b)
}
