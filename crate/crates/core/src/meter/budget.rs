//! Resource budgets as closed-form expressions over the input length `n`.
//!
//! The expression language is deliberately small: integer literals, `n`,
//! `log2(..)`, `sqrt(..)`, `ceil(..)`, `+`, `*` and parentheses.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use super::machine::RunReport;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BudgetError {
    #[error("unexpected {found:?} at offset {offset} in budget expression")]
    Syntax { offset: usize, found: String },
    #[error("unknown budget dimension {0:?}; expected r, s or q")]
    Dimension(String),
    #[error("budget entry {0:?} is not of the form dim=EXPR")]
    Entry(String),
    #[error("budget needs both r and s")]
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(u64),
    N,
    Log2(Box<Expr>),
    Sqrt(Box<Expr>),
    Ceil(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, n: u64) -> f64 {
        match self {
            Expr::Int(v) => *v as f64,
            Expr::N => n as f64,
            Expr::Log2(e) => {
                let x = e.eval(n);
                if x <= 1.0 {
                    0.0
                } else {
                    x.log2()
                }
            }
            Expr::Sqrt(e) => e.eval(n).max(0.0).sqrt(),
            Expr::Ceil(e) => e.eval(n).ceil(),
            Expr::Add(a, b) => a.eval(n) + b.eval(n),
            Expr::Mul(a, b) => a.eval(n) * b.eval(n),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::N => f.write_str("n"),
            Expr::Log2(e) => write!(f, "log2({e})"),
            Expr::Sqrt(e) => write!(f, "sqrt({e})"),
            Expr::Ceil(e) => write!(f, "ceil({e})"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn error(&self) -> BudgetError {
        let found = self.src[self.pos..].chars().next().map_or_else(|| "end".to_string(), String::from);
        BudgetError::Syntax {
            offset: self.pos,
            found,
        }
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

    fn expr(&mut self) -> Result<Expr, BudgetError> {
        let mut lhs = self.term()?;
        while self.eat("+") {
            lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, BudgetError> {
        let mut lhs = self.factor()?;
        while self.eat("*") {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn call(&mut self) -> Result<Box<Expr>, BudgetError> {
        if !self.eat("(") {
            return Err(self.error());
        }
        let e = self.expr()?;
        if !self.eat(")") {
            return Err(self.error());
        }
        Ok(Box::new(e))
    }

    fn factor(&mut self) -> Result<Expr, BudgetError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let digits = rest.chars().take_while(char::is_ascii_digit).count();
        if digits > 0 {
            let v = rest[..digits].parse().map_err(|_| self.error())?;
            self.pos += digits;
            return Ok(Expr::Int(v));
        }
        if self.eat("log2") {
            return Ok(Expr::Log2(self.call()?));
        }
        if self.eat("sqrt") {
            return Ok(Expr::Sqrt(self.call()?));
        }
        if self.eat("ceil") {
            return Ok(Expr::Ceil(self.call()?));
        }
        if self.eat("n") {
            return Ok(Expr::N);
        }
        if self.eat("(") {
            let e = self.expr()?;
            if !self.eat(")") {
                return Err(self.error());
            }
            return Ok(e);
        }
        Err(self.error())
    }
}

impl FromStr for Expr {
    type Err = BudgetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { src: s, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.error());
        }
        Ok(e)
    }
}

/// Scan, space and (optionally) random-access bounds as functions of `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Budget {
    pub r: Expr,
    pub s: Expr,
    pub q: Option<Expr>,
}

impl FromStr for Budget {
    type Err = BudgetError;

    /// Parses `r=EXPR,s=EXPR[,q=EXPR]`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let (mut r, mut s, mut q) = (None, None, None);
        for entry in text.split(',').map(str::trim).filter(|e| !e.is_empty()) {
            let (dim, expr) = entry
                .split_once('=')
                .ok_or_else(|| BudgetError::Entry(entry.to_string()))?;
            let expr: Expr = expr.parse()?;
            match dim.trim() {
                "r" => r = Some(expr),
                "s" => s = Some(expr),
                "q" => q = Some(expr),
                other => return Err(BudgetError::Dimension(other.to_string())),
            }
        }
        Ok(Budget {
            r: r.ok_or(BudgetError::Missing)?,
            s: s.ok_or(BudgetError::Missing)?,
            q,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    R,
    S,
    Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BudgetVerdict {
    Pass,
    Fail(Vec<Dimension>),
}

impl BudgetVerdict {
    pub fn passed(&self) -> bool {
        *self == BudgetVerdict::Pass
    }
}

pub fn check_budget(report: &RunReport, budget: &Budget) -> BudgetVerdict {
    let n = report.n;
    let mut failed = Vec::new();
    if report.r_used as f64 > budget.r.eval(n) {
        failed.push(Dimension::R);
    }
    if report.s_peak as f64 > budget.s.eval(n) {
        failed.push(Dimension::S);
    }
    if let Some(q) = &budget.q {
        if report.q_used as f64 > q.eval(n) {
            failed.push(Dimension::Q);
        }
    }
    if failed.is_empty() {
        BudgetVerdict::Pass
    } else {
        BudgetVerdict::Fail(failed)
    }
}
