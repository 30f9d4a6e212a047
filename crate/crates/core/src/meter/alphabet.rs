use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Index of a token inside an [`Alphabet`].
pub type Symbol = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("alphabet must contain at least one token")]
    Empty,
    #[error("duplicate token {0:?} in alphabet")]
    Duplicate(String),
}

/// A finite ordered set of distinct tokens. One token fills one tape cell.
#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    tokens: Vec<String>,
    index: HashMap<String, Symbol>,
}

impl Alphabet {
    pub fn new<I, S>(tokens: I) -> Result<Self, AlphabetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = Alphabet {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        for tok in tokens {
            let tok = tok.into();
            if out.index.contains_key(&tok) {
                return Err(AlphabetError::Duplicate(tok));
            }
            out.index.insert(tok.clone(), out.tokens.len() as Symbol);
            out.tokens.push(tok);
        }
        if out.tokens.is_empty() {
            return Err(AlphabetError::Empty);
        }
        Ok(out)
    }

    /// Alphabet whose tokens are the given single characters.
    pub fn from_chars(chars: &str) -> Result<Self, AlphabetError> {
        Self::new(chars.chars().map(String::from))
    }

    pub fn symbol(&self, token: &str) -> Option<Symbol> {
        self.index.get(token).copied()
    }

    pub fn token(&self, sym: Symbol) -> &str {
        &self.tokens[sym as usize]
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.tokens.iter()).finish()
    }
}

/// `ceil(log2(x))`, with `ceil_log2(0) == ceil_log2(1) == 0`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty() {
        assert_eq!(
            Alphabet::new(["a", "b", "a"]).unwrap_err(),
            AlphabetError::Duplicate("a".into())
        );
        assert_eq!(
            Alphabet::new(Vec::<String>::new()).unwrap_err(),
            AlphabetError::Empty
        );
    }

    #[test]
    fn symbols_follow_declaration_order() {
        let a = Alphabet::from_chars("01#").unwrap();
        assert_eq!(a.symbol("#"), Some(2));
        assert_eq!(a.token(1), "1");
        assert_eq!(a.symbol("x"), None);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(1024), 10);
    }
}
