//! Recursive-descent reader for the expression language.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := "-"? atom ("^" unsigned-int)?
//! atom   := number | ident | func "(" expr ")" | "(" expr ")"
//! ```
//!
//! The same reader handles tensor values, where the last factor of a term may
//! be a wedge chain of basis elements: `d<var>^d<var>` for forms and
//! `@<var>^@<var>` for multivectors.

use std::collections::HashMap;

use super::{raw, Chart, Expr, Func, Node};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer;

impl Lexer {
    fn tokenize(text: &str, line0: usize, col0: usize) -> Result<Vec<Spanned>> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let (mut line, mut col) = (line0, col0);
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c == '\n' {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            if c.is_whitespace() {
                i += 1;
                col += 1;
                continue;
            }
            if c == '#' {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            let start = (line, col);
            if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let s: String = chars[i..j].iter().collect();
                let v: f64 = s.parse().map_err(|_| Error::Syntax {
                    line: start.0,
                    col: start.1,
                    msg: format!("malformed number `{s}`"),
                })?;
                out.push(Spanned { tok: Tok::Num(v), line: start.0, col: start.1 });
                col += j - i;
                i = j;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                out.push(Spanned { tok: Tok::Ident(s), line: start.0, col: start.1 });
                col += j - i;
                i = j;
                continue;
            }
            if "+-*/^()@,".contains(c) {
                out.push(Spanned { tok: Tok::Sym(c), line: start.0, col: start.1 });
                i += 1;
                col += 1;
                continue;
            }
            return Err(Error::Syntax { line, col, msg: format!("unexpected character `{c}`") });
        }
        out.push(Spanned { tok: Tok::End, line, col });
        Ok(out)
    }
}

/// Name resolution context: a chart plus previously defined scalars on it.
#[derive(Debug, Clone)]
pub struct ParseScope<'a> {
    pub chart: &'a Chart,
    pub scalars: HashMap<String, Expr>,
    /// Position of the first character of the text, for error reporting.
    pub origin: (usize, usize),
}

impl<'a> ParseScope<'a> {
    pub fn new(chart: &'a Chart) -> Self {
        ParseScope { chart, scalars: HashMap::new(), origin: (1, 1) }
    }

    pub fn with_scalars(mut self, scalars: HashMap<String, Expr>) -> Self {
        self.scalars = scalars;
        self
    }

    pub fn at(mut self, line: usize, col: usize) -> Self {
        self.origin = (line, col);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TensorMode {
    Form,
    MultiVector,
}

struct Parser<'s, 'a> {
    toks: Vec<Spanned>,
    pos: usize,
    scope: &'s ParseScope<'a>,
}

/// Parses a scalar expression over `scope.chart`.
pub fn parse_expr(text: &str, scope: &ParseScope<'_>) -> Result<Expr> {
    let mut p = Parser::new(text, scope)?;
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

/// One summand of a tensor value: coefficient and the (unsorted) basis
/// variable indices of its wedge chain.
pub(crate) type TensorTerm = (Expr, Vec<usize>);

pub(crate) fn parse_tensor_terms(text: &str, scope: &ParseScope<'_>, mode: TensorMode) -> Result<Vec<TensorTerm>> {
    let mut p = Parser::new(text, scope)?;
    let terms = p.tensor(mode)?;
    p.expect_end()?;
    Ok(terms)
}

impl<'s, 'a> Parser<'s, 'a> {
    fn new(text: &str, scope: &'s ParseScope<'a>) -> Result<Self> {
        let toks = Lexer::tokenize(text, scope.origin.0, scope.origin.1)?;
        Ok(Parser { toks, pos: 0, scope })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> Error {
        let t = &self.toks[self.pos];
        Error::Syntax { line: t.line, col: t.col, msg: msg.into() }
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        }
    }

    fn expect_end(&self) -> Result<()> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(self.err_here(format!("unexpected {}", self.describe())))
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.err_here(format!("expected `{c}`, found {}", self.describe())))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = raw::node(Node::Add(lhs, rhs));
                }
                Tok::Sym('-') => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = raw::node(Node::Sub(lhs, rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = raw::node(Node::Mul(lhs, rhs));
                }
                Tok::Sym('/') => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = raw::node(Node::Div(lhs, rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let negate = if *self.peek() == Tok::Sym('-') {
            self.bump();
            true
        } else {
            false
        };
        let mut a = self.atom()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            a = raw::node(Node::Pow(a, self.exponent()?));
        }
        Ok(if negate { raw::node(Node::Neg(a)) } else { a })
    }

    fn exponent(&mut self) -> Result<u32> {
        match *self.peek() {
            Tok::Num(n) if n >= 0.0 && n.fract() == 0.0 && n <= u32::MAX as f64 => {
                self.bump();
                Ok(n as u32)
            }
            _ => Err(self.err_here(format!("expected unsigned integer exponent, found {}", self.describe()))),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let t = self.bump();
        match t.tok {
            Tok::Num(n) => Ok(Expr::constant(n)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    if *self.peek() == Tok::Sym('(') {
                        self.bump();
                        let arg = self.expr()?;
                        self.expect_sym(')')?;
                        return Ok(raw::node(Node::Call(f, arg)));
                    }
                }
                self.resolve(&name, t.line, t.col)
            }
            _ => Err(self.err_at(&t, format!("expected a number, variable, function or `(`, found {}", describe_tok(&t.tok)))),
        }
    }

    fn err_at(&self, t: &Spanned, msg: String) -> Error {
        Error::Syntax { line: t.line, col: t.col, msg }
    }

    fn resolve(&self, name: &str, line: usize, col: usize) -> Result<Expr> {
        if let Some(i) = self.scope.chart.index_of(name) {
            Ok(Expr::var(i))
        } else if let Some(e) = self.scope.scalars.get(name) {
            Ok(e.clone())
        } else {
            Err(Error::UnknownVariable { name: name.to_string(), line, col })
        }
    }

    // --- tensor values ---

    fn tensor(&mut self, mode: TensorMode) -> Result<Vec<TensorTerm>> {
        let mut terms = vec![self.tensor_term(mode)?];
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    terms.push(self.tensor_term(mode)?);
                }
                Tok::Sym('-') => {
                    self.bump();
                    let (c, b) = self.tensor_term(mode)?;
                    terms.push((raw::node(Node::Neg(c)), b));
                }
                _ => return Ok(terms),
            }
        }
    }

    fn basis_at(&self, mode: TensorMode) -> Option<usize> {
        match mode {
            TensorMode::Form => match self.peek() {
                Tok::Ident(s) if self.scope.chart.index_of(s).is_none() && !self.scope.scalars.contains_key(s) => {
                    s.strip_prefix('d').and_then(|v| self.scope.chart.index_of(v))
                }
                _ => None,
            },
            TensorMode::MultiVector => match (self.peek(), self.toks.get(self.pos + 1).map(|t| &t.tok)) {
                (Tok::Sym('@'), Some(Tok::Ident(s))) => self.scope.chart.index_of(s),
                _ => None,
            },
        }
    }

    fn basis(&mut self, mode: TensorMode) -> Result<usize> {
        match self.basis_at(mode) {
            Some(i) => {
                if mode == TensorMode::MultiVector {
                    self.bump();
                }
                self.bump();
                Ok(i)
            }
            None => {
                if mode == TensorMode::MultiVector && *self.peek() == Tok::Sym('@') {
                    let t = &self.toks[(self.pos + 1).min(self.toks.len() - 1)];
                    if let Tok::Ident(name) = &t.tok {
                        return Err(Error::UnknownVariable { name: name.clone(), line: t.line, col: t.col });
                    }
                }
                Err(self.err_here(format!("expected a basis element, found {}", self.describe())))
            }
        }
    }

    fn wedge_chain(&mut self, mode: TensorMode) -> Result<Vec<usize>> {
        let mut idx = vec![self.basis(mode)?];
        while *self.peek() == Tok::Sym('^') {
            self.bump();
            idx.push(self.basis(mode)?);
        }
        Ok(idx)
    }

    fn tensor_term(&mut self, mode: TensorMode) -> Result<TensorTerm> {
        let negate = if *self.peek() == Tok::Sym('-') {
            self.bump();
            true
        } else {
            false
        };
        let wrap = |c: Expr| if negate { raw::node(Node::Neg(c)) } else { c };
        if self.basis_at(mode).is_some() {
            let chain = self.wedge_chain(mode)?;
            return Ok((wrap(Expr::one()), chain));
        }
        let mut coeff = self.atom_with_power()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    if self.basis_at(mode).is_some() {
                        let chain = self.wedge_chain(mode)?;
                        return Ok((wrap(coeff), chain));
                    }
                    let rhs = self.factor()?;
                    coeff = raw::node(Node::Mul(coeff, rhs));
                }
                Tok::Sym('/') => {
                    self.bump();
                    let rhs = self.factor()?;
                    coeff = raw::node(Node::Div(coeff, rhs));
                }
                _ => return Ok((wrap(coeff), Vec::new())),
            }
        }
    }

    fn atom_with_power(&mut self) -> Result<Expr> {
        let mut a = self.atom()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            a = raw::node(Node::Pow(a, self.exponent()?));
        }
        Ok(a)
    }
}

fn describe_tok(t: &Tok) -> String {
    match t {
        Tok::Num(n) => format!("number `{n}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".to_string(),
    }
}
