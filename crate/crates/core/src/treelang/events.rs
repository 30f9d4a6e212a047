use std::fmt;
use std::sync::Arc;

use crate::meter::{Alphabet, Symbol};

use super::TreeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Open,
    Close,
    Bachelor,
}

/// One tag token. `annotation` carries an automaton state written onto the
/// tape by a selection pass.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    pub kind: EventKind,
    pub tag: String,
    pub annotation: Option<u32>,
}

impl Event {
    pub fn open(tag: &str) -> Self {
        Event {
            kind: EventKind::Open,
            tag: tag.to_string(),
            annotation: None,
        }
    }

    pub fn close(tag: &str) -> Self {
        Event {
            kind: EventKind::Close,
            tag: tag.to_string(),
            annotation: None,
        }
    }

    pub fn bachelor(tag: &str) -> Self {
        Event {
            kind: EventKind::Bachelor,
            tag: tag.to_string(),
            annotation: None,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ann = self.annotation.map(|q| format!(" q={q}")).unwrap_or_default();
        match self.kind {
            EventKind::Open => write!(f, "<{}{ann}>", self.tag),
            EventKind::Close => write!(f, "</{}{ann}>", self.tag),
            EventKind::Bachelor => write!(f, "<{}{ann}/>", self.tag),
        }
    }
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')
}

fn parse_token(body: &str, offset: usize) -> Result<Event, TreeError> {
    let err = |message: &str| TreeError::Lex {
        offset,
        message: format!("{message} in <{body}>"),
    };
    let (kind, rest) = if let Some(rest) = body.strip_prefix('/') {
        (EventKind::Close, rest)
    } else if let Some(rest) = body.strip_suffix('/') {
        (EventKind::Bachelor, rest)
    } else {
        (EventKind::Open, body)
    };
    let (name, annotation) = match rest.split_once(" q=") {
        Some((name, q)) => (name, Some(q.parse::<u32>().map_err(|_| err("bad annotation"))?)),
        None => (rest, None),
    };
    if name.is_empty() || !name.chars().all(is_name_char) {
        return Err(err("bad tag name"));
    }
    Ok(Event {
        kind,
        tag: name.to_string(),
        annotation,
    })
}

/// Splits text into tag events without checking nesting. Whitespace between
/// tags is ignored.
pub fn lex(text: &str) -> Result<Vec<Event>, TreeError> {
    let mut out = Vec::new();
    let mut rest = text;
    let mut offset = 0;
    loop {
        let trimmed = rest.trim_start();
        offset += rest.len() - trimmed.len();
        rest = trimmed;
        if rest.is_empty() {
            return Ok(out);
        }
        if !rest.starts_with('<') {
            return Err(TreeError::Lex {
                offset,
                message: "expected '<'".into(),
            });
        }
        let end = rest.find('>').ok_or(TreeError::Lex {
            offset,
            message: "unterminated tag".into(),
        })?;
        out.push(parse_token(&rest[1..end], offset)?);
        offset += end + 1;
        rest = &rest[end + 1..];
    }
}

/// Checks that the events form exactly one properly nested tree.
pub fn check_well_formed(events: &[Event]) -> Result<(), TreeError> {
    if events.is_empty() {
        return Err(TreeError::Empty);
    }
    let mut open: Vec<&str> = Vec::new();
    let mut closed_root = false;
    for (i, e) in events.iter().enumerate() {
        let position = i + 1;
        let bad = |message: String| TreeError::Malformed { position, message };
        if closed_root {
            return Err(bad("content after the root element".into()));
        }
        match e.kind {
            EventKind::Open => open.push(&e.tag),
            EventKind::Close => match open.pop() {
                Some(t) if t == e.tag => {}
                Some(t) => return Err(bad(format!("</{}> closes <{t}>", e.tag))),
                None => return Err(bad(format!("</{}> has no opening tag", e.tag))),
            },
            EventKind::Bachelor => {}
        }
        closed_root = open.is_empty();
    }
    if !open.is_empty() {
        return Err(TreeError::Malformed {
            position: events.len() + 1,
            message: format!("<{}> is never closed", open[open.len() - 1]),
        });
    }
    Ok(())
}

/// Lexes and checks well-formedness.
pub fn tokenize(text: &str) -> Result<Vec<Event>, TreeError> {
    let events = lex(text)?;
    check_well_formed(&events)?;
    Ok(events)
}

/// Replaces every `<a/>` by `<a></a>`.
pub fn expand_bachelors(events: &[Event]) -> Vec<Event> {
    let mut out = Vec::with_capacity(events.len());
    for e in events {
        if e.kind == EventKind::Bachelor {
            out.push(Event {
                kind: EventKind::Open,
                ..e.clone()
            });
            out.push(Event {
                kind: EventKind::Close,
                ..e.clone()
            });
        } else {
            out.push(e.clone());
        }
    }
    out
}

/// Tape alphabet of tag tokens over a fixed tag set, optionally enlarged by
/// every token annotated with one of `annotations` automaton states.
///
/// Symbols are laid out arithmetically: plain tokens first (`3·tag + kind`),
/// then annotated ones.
#[derive(Debug, Clone)]
pub struct TagAlphabet {
    tags: Vec<String>,
    annotations: u32,
    alphabet: Arc<Alphabet>,
}

fn kind_code(kind: EventKind) -> u32 {
    match kind {
        EventKind::Open => 0,
        EventKind::Close => 1,
        EventKind::Bachelor => 2,
    }
}

const KINDS: [EventKind; 3] = [EventKind::Open, EventKind::Close, EventKind::Bachelor];

impl TagAlphabet {
    pub fn new<S: AsRef<str>>(tags: &[S], annotations: u32) -> Result<Self, TreeError> {
        let tags: Vec<String> = tags.iter().map(|t| t.as_ref().to_string()).collect();
        let mut tokens = Vec::new();
        for t in &tags {
            for kind in KINDS {
                tokens.push(Event { kind, tag: t.clone(), annotation: None }.to_string());
            }
        }
        for t in &tags {
            for kind in KINDS {
                for q in 0..annotations {
                    tokens.push(Event { kind, tag: t.clone(), annotation: Some(q) }.to_string());
                }
            }
        }
        let alphabet = Alphabet::new(tokens).map_err(|e| TreeError::Automaton(e.to_string()))?;
        Ok(TagAlphabet {
            tags,
            annotations,
            alphabet: Arc::new(alphabet),
        })
    }

    pub fn alphabet(&self) -> Arc<Alphabet> {
        self.alphabet.clone()
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn tag_index(&self, tag: &str) -> Option<usize> {
        self.tags.iter().position(|t| t == tag)
    }

    pub fn encode(&self, kind: EventKind, tag: usize, annotation: Option<u32>) -> Symbol {
        let plain = 3 * tag as u32 + kind_code(kind);
        match annotation {
            None => plain,
            Some(q) => {
                debug_assert!(q < self.annotations);
                3 * self.tags.len() as u32 + plain * self.annotations + q
            }
        }
    }

    /// `(kind, tag index, annotation)` of a symbol.
    pub fn decode(&self, sym: Symbol) -> (EventKind, usize, Option<u32>) {
        let plain_count = 3 * self.tags.len() as u32;
        let (plain, ann) = if sym < plain_count {
            (sym, None)
        } else {
            let rel = sym - plain_count;
            (rel / self.annotations, Some(rel % self.annotations))
        };
        (KINDS[(plain % 3) as usize], (plain / 3) as usize, ann)
    }

    /// Tokens of a document over this alphabet.
    pub fn tokens(events: &[Event]) -> Vec<String> {
        events.iter().map(Event::to_string).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        let ev = tokenize("<root><a/></root>").unwrap();
        assert_eq!(ev, vec![Event::open("root"), Event::bachelor("a"), Event::close("root")]);
        assert!(matches!(
            tokenize("<a></b>"),
            Err(TreeError::Malformed { position: 2, .. })
        ));
        assert!(matches!(tokenize("<a></a><b/>"), Err(TreeError::Malformed { position: 3, .. })));
        assert!(matches!(tokenize("<a>"), Err(TreeError::Malformed { position: 2, .. })));
        assert_eq!(tokenize(""), Err(TreeError::Empty));
        assert!(matches!(tokenize("<a>x</a>"), Err(TreeError::Lex { offset: 3, .. })));
        assert!(lex("<a q=x>").is_err());
    }

    #[test]
    fn annotated_tokens_round_trip() {
        for s in ["<a q=3>", "</a q=0>", "<a q=12/>", "<1/>", "</tuple>"] {
            let ev = lex(s).unwrap();
            assert_eq!(ev.len(), 1);
            assert_eq!(ev[0].to_string(), s);
        }
    }

    #[test]
    fn expansion() {
        let ev = expand_bachelors(&tokenize("<r><a/></r>").unwrap());
        let s: String = ev.iter().map(Event::to_string).collect();
        assert_eq!(s, "<r><a></a></r>");
    }

    #[test]
    fn alphabet_layout_matches_tokens() {
        let ta = TagAlphabet::new(&["a", "b"], 3).unwrap();
        let sigma = ta.alphabet();
        assert_eq!(sigma.len(), 6 + 18);
        for tag in 0..2 {
            for kind in KINDS {
                for ann in [None, Some(0), Some(2)] {
                    let sym = ta.encode(kind, tag, ann);
                    assert_eq!(ta.decode(sym), (kind, tag, ann));
                    let ev = Event {
                        kind,
                        tag: ta.tags()[tag].clone(),
                        annotation: ann,
                    };
                    assert_eq!(sigma.token(sym), ev.to_string());
                }
            }
        }
    }
}
