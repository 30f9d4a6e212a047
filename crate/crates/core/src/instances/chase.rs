use rand::Rng;

use super::InstanceError;

/// Widest word accepted when parsing; `m·2^m` cells beyond this are impractical.
pub const MAX_CHASE_WIDTH: u32 = 24;

/// A function `{0..2^m-1} → {0..2^m-1}` listed as `m`-bit words `w_0..w_{2^m-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    m: u32,
    values: Vec<u64>,
}

impl FunctionTable {
    pub fn new(m: u32, values: Vec<u64>) -> Result<Self, InstanceError> {
        if m == 0 || m > MAX_CHASE_WIDTH {
            return Err(InstanceError::Table(format!("word width {m} outside 1..={MAX_CHASE_WIDTH}")));
        }
        let size = 1usize << m;
        if values.len() != size {
            return Err(InstanceError::Table(format!(
                "{} words given, 2^{m} = {size} expected",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v >= size as u64) {
            return Err(InstanceError::Table(format!("word {v} does not fit in {m} bits")));
        }
        Ok(FunctionTable { m, values })
    }

    /// Builds a table from `m`-bit binary words.
    pub fn from_words<S: AsRef<str>>(words: &[S]) -> Result<Self, InstanceError> {
        let m = words.first().map_or(0, |w| w.as_ref().len()) as u32;
        let values = words
            .iter()
            .map(|w| {
                let w = w.as_ref();
                if w.len() != m as usize || !w.bytes().all(|b| b == b'0' || b == b'1') {
                    return Err(InstanceError::Table(format!("word {w:?} is not {m} bits")));
                }
                Ok(u64::from_str_radix(w, 2).unwrap_or(0))
            })
            .collect::<Result<Vec<_>, _>>()?;
        FunctionTable::new(m, values)
    }

    pub fn random<R: Rng + ?Sized>(m: u32, rng: &mut R) -> Result<Self, InstanceError> {
        let size = 1u64 << m.min(MAX_CHASE_WIDTH);
        FunctionTable::new(m, (0..size).map(|_| rng.gen_range(0..size)).collect())
    }

    pub fn width(&self) -> u32 {
        self.m
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn get(&self, i: u64) -> u64 {
        self.values[i as usize]
    }

    pub fn top(&self) -> u64 {
        (1u64 << self.m) - 1
    }

    pub fn word(&self, i: u64) -> String {
        format!("{:0width$b}", self.get(i), width = self.m as usize)
    }

    /// The chain `j_1 = w_0, j_{i+1} = w_{j_i}` up to `j_{k+1}`.
    pub fn chain(&self, k: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(k + 1);
        let mut j = self.get(0);
        out.push(j);
        for _ in 0..k {
            j = self.get(j);
            out.push(j);
        }
        out
    }

    /// Membership of the encoded table in the `k+1`-step chase language.
    pub fn chase_holds(&self, k: usize) -> bool {
        let last = *self.chain(k).last().expect("chain is never empty");
        self.get(last) == self.top()
    }
}

/// `1^m # w_0 … w_{2^m-1}`.
pub fn make_chase_string(f: &FunctionTable) -> String {
    let mut s = "1".repeat(f.m as usize);
    s.push('#');
    for i in 0..f.values.len() as u64 {
        s.push_str(&f.word(i));
    }
    s
}

/// Inverse of [`make_chase_string`]; `None` for anything not of that shape.
pub fn parse_chase_string(s: &str) -> Option<FunctionTable> {
    let (ones, body) = s.split_once('#')?;
    let m = ones.len() as u32;
    if m == 0 || m > MAX_CHASE_WIDTH || !ones.bytes().all(|b| b == b'1') {
        return None;
    }
    if body.len() != (m as usize) << m {
        return None;
    }
    let words: Vec<&str> = (0..1usize << m)
        .map(|i| &body[i * m as usize..(i + 1) * m as usize])
        .collect();
    FunctionTable::from_words(&words).ok()
}

/// True iff `s` encodes a table whose chain of length `k+1` ends on an all-ones word.
pub fn chase_oracle(k: usize, s: &str) -> bool {
    parse_chase_string(s).is_some_and(|f| f.chase_holds(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Searches every index tuple for a witness chain.
    fn brute_force(k: usize, f: &FunctionTable) -> bool {
        let size = 1u64 << f.width();
        let mut tuple = vec![0u64; k + 1];
        loop {
            let ok = f.get(0) == tuple[0]
                && (0..k).all(|i| f.get(tuple[i]) == tuple[i + 1])
                && f.get(tuple[k]) == size - 1;
            if ok {
                return true;
            }
            let mut pos = 0;
            loop {
                if pos == tuple.len() {
                    return false;
                }
                tuple[pos] += 1;
                if tuple[pos] < size {
                    break;
                }
                tuple[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn strings() {
        let f = FunctionTable::from_words(&["10", "11", "01", "00"]).unwrap();
        assert_eq!(make_chase_string(&f), "11#10110100");
        let f = FunctionTable::from_words(&["1", "1"]).unwrap();
        assert_eq!(make_chase_string(&f), "1#11");
        let f = FunctionTable::from_words(&["0", "0"]).unwrap();
        assert_eq!(make_chase_string(&f), "1#00");
    }

    #[test]
    fn oracle_examples_match_brute_force() {
        for (s, expected) in [("11#10110100", true), ("1#11", true), ("11#00000000", false)] {
            assert_eq!(chase_oracle(1, s), expected, "{s}");
            assert_eq!(brute_force(1, &parse_chase_string(s).unwrap()), expected);
        }
        assert_eq!(FunctionTable::from_words(&["10", "11", "01", "00"]).unwrap().chain(1), vec![2, 1]);
    }

    #[test]
    fn malformed_strings_are_rejected() {
        for s in ["", "#", "1#1", "1#111", "10#0000", "11#1011010", "1#1a", "11"] {
            assert!(!chase_oracle(1, s), "{s}");
        }
    }

    #[test]
    fn chain_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in 1..=3 {
            for k in 0..=3 {
                for _ in 0..40 {
                    let f = FunctionTable::random(m, &mut rng).unwrap();
                    assert_eq!(f.chase_holds(k), brute_force(k, &f));
                    let s = make_chase_string(&f);
                    assert_eq!(s.len(), m as usize + 1 + (m as usize) * (1 << m));
                    assert_eq!(parse_chase_string(&s).unwrap(), f);
                }
            }
        }
    }
}
