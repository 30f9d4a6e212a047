use std::fmt;

use rand::Rng;

use super::{XPathError, UNSUPPORTED_AXES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Child,
    Parent,
    Descendant,
    Ancestor,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Child => "child",
            Axis::Parent => "parent",
            Axis::Descendant => "descendant",
            Axis::Ancestor => "ancestor",
        }
    }

    pub fn is_downward(self) -> bool {
        matches!(self, Axis::Child | Axis::Descendant)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeTest {
    Name(String),
    Any,
}

impl NodeTest {
    pub fn matches(&self, label: &str) -> bool {
        match self {
            NodeTest::Any => true,
            NodeTest::Name(n) => n == label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Step {
    pub axis: Axis,
    pub test: NodeTest,
    pub predicate: Option<Pred>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocationPath {
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pred {
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
    Path(LocationPath),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoreXPath {
    pub absolute: bool,
    pub path: LocationPath,
}

impl CoreXPath {
    /// True when every axis, including those inside predicates, is downward.
    pub fn is_downward(&self) -> bool {
        self.path.is_downward()
    }

    /// Tag names mentioned in node tests.
    pub fn names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.path.collect_names(&mut out);
        out
    }
}

impl LocationPath {
    fn is_downward(&self) -> bool {
        self.steps
            .iter()
            .all(|s| s.axis.is_downward() && s.predicate.as_ref().is_none_or(Pred::is_downward))
    }

    fn collect_names(&self, out: &mut Vec<String>) {
        for s in &self.steps {
            if let NodeTest::Name(n) = &s.test {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
            if let Some(p) = &s.predicate {
                p.collect_names(out);
            }
        }
    }
}

impl Pred {
    fn is_downward(&self) -> bool {
        match self {
            Pred::And(a, b) | Pred::Or(a, b) => a.is_downward() && b.is_downward(),
            Pred::Not(a) => a.is_downward(),
            Pred::Path(p) => p.is_downward(),
        }
    }

    fn collect_names(&self, out: &mut Vec<String>) {
        match self {
            Pred::And(a, b) | Pred::Or(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Pred::Not(a) => a.collect_names(out),
            Pred::Path(p) => p.collect_names(out),
        }
    }
}

impl fmt::Display for LocationPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{}::", s.axis.name())?;
            match &s.test {
                NodeTest::Any => f.write_str("*")?,
                NodeTest::Name(n) => f.write_str(n)?,
            }
            if let Some(p) = &s.predicate {
                write!(f, "[{p}]")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pred::Or(a, b) => match **b {
                Pred::Or(..) => write!(f, "{a} or ({b})"),
                _ => write!(f, "{a} or {b}"),
            },
            Pred::And(a, b) => {
                let left = match **a {
                    Pred::Or(..) => format!("({a})"),
                    _ => a.to_string(),
                };
                match **b {
                    Pred::Or(..) | Pred::And(..) => write!(f, "{left} and ({b})"),
                    _ => write!(f, "{left} and {b}"),
                }
            }
            Pred::Not(a) => write!(f, "not({a})"),
            Pred::Path(p) => write!(f, "{p}"),
        }
    }
}

impl fmt::Display for CoreXPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.absolute {
            f.write_str("/")?;
        }
        write!(f, "{}", self.path)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str, expected: &'static str) -> Result<(), XPathError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn error(&self, expected: &'static str) -> XPathError {
        XPathError::Syntax {
            position: self.pos,
            expected,
        }
    }

    fn name(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest.find(|c: char| !is_name_char(c)).unwrap_or(rest.len());
        if len == 0 {
            return None;
        }
        self.pos += len;
        Some(&rest[..len])
    }

    fn path(&mut self) -> Result<LocationPath, XPathError> {
        let mut steps = vec![self.step()?];
        while self.eat("/") {
            steps.push(self.step()?);
        }
        Ok(LocationPath { steps })
    }

    fn step(&mut self) -> Result<Step, XPathError> {
        self.skip_ws();
        let start = self.pos;
        let name = self.name().ok_or_else(|| self.error("an axis name"))?;
        let axis = match name {
            "child" => Axis::Child,
            "parent" => Axis::Parent,
            "descendant" => Axis::Descendant,
            "ancestor" => Axis::Ancestor,
            other if UNSUPPORTED_AXES.contains(&other) => {
                return Err(XPathError::UnsupportedAxis {
                    position: start,
                    name: other.to_string(),
                })
            }
            _ => {
                self.pos = start;
                return Err(self.error("an axis name"));
            }
        };
        self.expect("::", "'::'")?;
        let test = if self.eat("*") {
            NodeTest::Any
        } else {
            NodeTest::Name(self.name().ok_or_else(|| self.error("a node test"))?.to_string())
        };
        let predicate = if self.eat("[") {
            let p = self.or()?;
            self.expect("]", "']'")?;
            Some(p)
        } else {
            None
        };
        Ok(Step { axis, test, predicate })
    }

    fn or(&mut self) -> Result<Pred, XPathError> {
        let mut lhs = self.and()?;
        while self.keyword("or") {
            lhs = Pred::Or(Box::new(lhs), Box::new(self.and()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Pred, XPathError> {
        let mut lhs = self.atom()?;
        while self.keyword("and") {
            lhs = Pred::And(Box::new(lhs), Box::new(self.atom()?));
        }
        Ok(lhs)
    }

    /// Consumes `word` when it stands alone (not a prefix of a longer name).
    fn keyword(&mut self, word: &str) -> bool {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        if rest.starts_with(word) && !rest[word.len()..].starts_with(is_name_char) {
            self.pos += word.len();
            true
        } else {
            false
        }
    }

    fn atom(&mut self) -> Result<Pred, XPathError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        if rest.starts_with("not") && rest[3..].trim_start().starts_with('(') {
            self.pos += 3;
            self.expect("(", "'('")?;
            let p = self.or()?;
            self.expect(")", "')'")?;
            return Ok(Pred::Not(Box::new(p)));
        }
        if self.peek() == Some('(') {
            self.pos += 1;
            let p = self.or()?;
            self.expect(")", "')'")?;
            return Ok(p);
        }
        Ok(Pred::Path(self.path()?))
    }
}

pub fn parse_corexpath(text: &str) -> Result<CoreXPath, XPathError> {
    let mut p = Parser { src: text, pos: 0 };
    let absolute = p.eat("/");
    let path = p.path()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error("end of query"));
    }
    Ok(CoreXPath { absolute, path })
}

/// A random query over `tags` with at most `max_steps` steps per path and
/// predicates nested at most two deep.
pub fn random_query<R: Rng + ?Sized>(rng: &mut R, tags: &[&str], max_steps: usize, upward: bool) -> CoreXPath {
    CoreXPath {
        absolute: rng.gen_bool(0.5),
        path: random_path(rng, tags, max_steps, upward, 2),
    }
}

fn random_path<R: Rng + ?Sized>(rng: &mut R, tags: &[&str], max_steps: usize, upward: bool, nesting: u32) -> LocationPath {
    let count = rng.gen_range(1..=max_steps.max(1));
    let steps = (0..count)
        .map(|_| {
            let axes: &[Axis] = if upward {
                &[Axis::Child, Axis::Descendant, Axis::Parent, Axis::Ancestor]
            } else {
                &[Axis::Child, Axis::Descendant]
            };
            let axis = axes[rng.gen_range(0..axes.len())];
            let test = if rng.gen_bool(0.3) {
                NodeTest::Any
            } else {
                NodeTest::Name(tags[rng.gen_range(0..tags.len())].to_string())
            };
            let predicate = (nesting > 0 && rng.gen_bool(0.35)).then(|| random_pred(rng, tags, max_steps, upward, nesting - 1));
            Step { axis, test, predicate }
        })
        .collect();
    LocationPath { steps }
}

fn random_pred<R: Rng + ?Sized>(rng: &mut R, tags: &[&str], max_steps: usize, upward: bool, nesting: u32) -> Pred {
    let leaf = |rng: &mut R| Pred::Path(random_path(rng, tags, max_steps.min(2), upward, nesting));
    match rng.gen_range(0..5) {
        0 => Pred::And(Box::new(leaf(rng)), Box::new(leaf(rng))),
        1 => Pred::Or(Box::new(leaf(rng)), Box::new(leaf(rng))),
        2 => Pred::Not(Box::new(leaf(rng))),
        _ => leaf(rng),
    }
}
