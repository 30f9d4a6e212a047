use std::collections::BTreeSet;

use super::InstanceError;

/// A subset of `{1..n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    n: usize,
    members: BTreeSet<usize>,
}

impl BitSet {
    pub fn new(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self, InstanceError> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&i| i == 0 || i > n) {
            return Err(InstanceError::Range { element: bad, n });
        }
        Ok(BitSet { n, members })
    }

    pub fn empty(n: usize) -> Self {
        BitSet {
            n,
            members: BTreeSet::new(),
        }
    }

    /// `S(x) = {i : x_i = 1}`.
    pub fn from_bits(bits: &str) -> Result<Self, InstanceError> {
        let mut members = BTreeSet::new();
        for (offset, c) in bits.chars().enumerate() {
            match c {
                '0' => {}
                '1' => {
                    members.insert(offset + 1);
                }
                found => return Err(InstanceError::NotBinary { offset, found }),
            }
        }
        Ok(BitSet {
            n: bits.chars().count(),
            members,
        })
    }

    pub fn to_bits(&self) -> String {
        (1..=self.n)
            .map(|i| if self.members.contains(&i) { '1' } else { '0' })
            .collect()
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_disjoint(&self, other: &BitSet) -> bool {
        self.members.is_disjoint(&other.members)
    }
}

fn check_bits(s: &str) -> Result<(), InstanceError> {
    match s.chars().enumerate().find(|&(_, c)| c != '0' && c != '1') {
        Some((offset, found)) => Err(InstanceError::NotBinary { offset, found }),
        None => Ok(()),
    }
}

/// `x#y`, one token per character.
pub fn make_disj_string(x: &str, y: &str) -> Result<String, InstanceError> {
    check_bits(x)?;
    check_bits(y)?;
    if x.len() != y.len() {
        return Err(InstanceError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if x.is_empty() {
        return Err(InstanceError::EmptyUniverse);
    }
    Ok(format!("{x}#{y}"))
}

/// True iff no position holds a 1 in both strings.
pub fn disj_oracle(x: &str, y: &str) -> bool {
    x.len() == y.len() && !x.bytes().zip(y.bytes()).any(|(a, b)| a == b'1' && b == b'1')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strings() {
        assert_eq!(make_disj_string("101", "010").unwrap(), "101#010");
        assert_eq!(make_disj_string("000", "000").unwrap(), "000#000");
        assert!(matches!(
            make_disj_string("1", "10"),
            Err(InstanceError::LengthMismatch { x: 1, y: 2 })
        ));
        assert!(make_disj_string("1a", "10").is_err());
    }

    #[test]
    fn oracle() {
        assert!(disj_oracle("101", "010"));
        assert!(!disj_oracle("1", "1"));
        assert!(!disj_oracle("11", "11"));
        assert!(disj_oracle("0000", "1111"));
    }

    #[test]
    fn bitsets() {
        let s = BitSet::from_bits("1010").unwrap();
        assert_eq!(s.members().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(s.to_bits(), "1010");
        assert!(matches!(
            BitSet::new(3, [4]),
            Err(InstanceError::Range { element: 4, n: 3 })
        ));
        assert!(BitSet::new(3, [0]).is_err());
    }
}
