//! Reader for labels, trees, planted trees, forests and their rational
//! linear combinations.
//!
//! ```text
//! expr    := ["-"] term (("+" | "-") term)*
//! term    := rational ["*"] object | rational | object
//! object  := tree | planted+ | "1"
//! tree    := "(" label child* ")"
//! child   := "[" label "]" tree
//! planted := "[" label "]" tree
//! label   := "<" n ("," n)* ">" | "Xi" | "*" | ident | "{" label "," label "}"
//! ```

use std::fmt;

use rtcalc_core::lincomb::parse_scalar;
use rtcalc_core::{Basis, Forest, Label, LinComb, MultiIndex, Planted, Scalar, Tree};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// A parsed combination, kept in the most specific form its terms allow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedExpr {
    Trees(LinComb<Tree>),
    Planted(LinComb<Planted>),
    Forests(LinComb<Forest>),
}

impl ParsedExpr {
    pub fn kind(&self) -> &'static str {
        match self {
            ParsedExpr::Trees(_) => "trees",
            ParsedExpr::Planted(_) => "planted trees",
            ParsedExpr::Forests(_) => "forests",
        }
    }

    pub fn into_trees(self) -> Result<LinComb<Tree>, String> {
        match self {
            ParsedExpr::Trees(x) => Ok(x),
            other => Err(format!("expected trees, found {}", other.kind())),
        }
    }

    pub fn into_planted(self) -> Result<LinComb<Planted>, String> {
        match self {
            ParsedExpr::Planted(x) => Ok(x),
            ParsedExpr::Forests(x) if x.terms().all(|f| f.trees().len() == 1) => {
                Ok(x.map_terms(|f| f.trees()[0].clone()))
            }
            other => Err(format!("expected planted trees, found {}", other.kind())),
        }
    }

    pub fn into_forests(self) -> Result<LinComb<Forest>, String> {
        match self {
            ParsedExpr::Planted(x) => Ok(x.map_terms(|p| Forest::single(p.clone()))),
            ParsedExpr::Forests(x) => Ok(x),
            other => Err(format!("expected forests, found {}", other.kind())),
        }
    }
}

impl fmt::Display for ParsedExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParsedExpr::Trees(x) => write!(f, "{x}"),
            ParsedExpr::Planted(x) => write!(f, "{x}"),
            ParsedExpr::Forests(x) => write!(f, "{x}"),
        }
    }
}

/// Optional edge and vertex bases that every label must belong to.
#[derive(Clone, Copy, Debug, Default)]
pub struct Bases<'a> {
    pub edges: Option<&'a Basis>,
    pub vertices: Option<&'a Basis>,
}

enum Object {
    Tree(Tree),
    Forest(Vec<Planted>),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    bases: Bases<'a>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Edge,
    Vertex,
}

impl<'a> Parser<'a> {
    fn error(&self, at: usize, msg: impl Into<String>) -> ParseError {
        let before = &self.src[..at.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError { line, col, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_raw() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek_raw(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek_raw()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(c) => Err(self.error(self.pos, format!("expected '{want}', found '{c}'"))),
            None => Err(self.error(self.pos, format!("expected '{want}', found end of input"))),
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek_raw() {
            if f(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    fn number(&mut self) -> Result<u32, ParseError> {
        self.skip_ws();
        let at = self.pos;
        let digits = self.take_while(|c| c.is_ascii_digit());
        digits.parse().map_err(|_| self.error(at, "expected a natural number"))
    }

    fn raw_label(&mut self) -> Result<Label, ParseError> {
        let at = {
            self.skip_ws();
            self.pos
        };
        match self.peek() {
            Some('<') => {
                self.bump();
                let mut entries = vec![self.number()?];
                while self.peek() == Some(',') {
                    self.bump();
                    entries.push(self.number()?);
                }
                self.expect('>')?;
                Ok(Label::Mi(MultiIndex::new(entries)))
            }
            Some('*') => {
                self.bump();
                Ok(Label::Star)
            }
            Some('{') => {
                self.bump();
                let a = self.raw_label()?;
                self.expect(',')?;
                let b = self.raw_label()?;
                self.expect('}')?;
                Ok(Label::pair(a, b))
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let name = self.take_while(|c| c.is_alphanumeric() || c == '_' || c == '\'');
                Ok(if name == "Xi" { Label::Xi } else { Label::sym(name) })
            }
            Some(c) => Err(self.error(at, format!("expected a label, found '{c}'"))),
            None => Err(self.error(at, "expected a label, found end of input")),
        }
    }

    fn label(&mut self, role: Role) -> Result<Label, ParseError> {
        self.skip_ws();
        let at = self.pos;
        let l = self.raw_label()?;
        let (name, basis) = match role {
            Role::Edge => ("edge", self.bases.edges),
            Role::Vertex => ("vertex", self.bases.vertices),
        };
        match (&l, role) {
            (Label::Star, Role::Edge) => return Err(self.error(at, "'*' cannot decorate an edge")),
            (Label::Xi, Role::Vertex) => return Err(self.error(at, "'Xi' cannot decorate a vertex")),
            _ => {}
        }
        if let Some(b) = basis {
            if !b.contains(&l) {
                return Err(self.error(at, format!("label {l} is not in the {name} basis")));
            }
        }
        Ok(l)
    }

    fn tree(&mut self) -> Result<Tree, ParseError> {
        self.expect('(')?;
        let root = self.label(Role::Vertex)?;
        let mut children = Vec::new();
        while self.peek() == Some('[') {
            children.push(self.planted_parts()?);
        }
        self.expect(')')?;
        Ok(Tree::new(root, children))
    }

    fn planted_parts(&mut self) -> Result<(Label, Tree), ParseError> {
        self.expect('[')?;
        let e = self.label(Role::Edge)?;
        self.expect(']')?;
        Ok((e, self.tree()?))
    }

    fn rational(&mut self) -> Option<Scalar> {
        self.skip_ws();
        let start = self.pos;
        let num = self.take_while(|c| c.is_ascii_digit());
        if num.is_empty() {
            return None;
        }
        let save = self.pos;
        if self.peek_raw() == Some('/') {
            self.pos += 1;
            let den = self.take_while(|c| c.is_ascii_digit());
            if den.is_empty() {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        match parse_scalar(text) {
            Some(s) => Some(s),
            None => {
                self.pos = start;
                None
            }
        }
    }

    fn object(&mut self, after_star: bool) -> Result<Option<Object>, ParseError> {
        match self.peek() {
            Some('(') => Ok(Some(Object::Tree(self.tree()?))),
            Some('[') => {
                let mut trees = Vec::new();
                while self.peek() == Some('[') {
                    let (e, t) = self.planted_parts()?;
                    trees.push(Planted::new(e, t));
                }
                Ok(Some(Object::Forest(trees)))
            }
            Some('1') if after_star => {
                self.bump();
                Ok(Some(Object::Forest(Vec::new())))
            }
            _ => Ok(None),
        }
    }

    fn term(&mut self) -> Result<(Scalar, Object), ParseError> {
        self.skip_ws();
        let at = self.pos;
        let coeff = self.rational();
        let star = coeff.is_some() && self.peek() == Some('*');
        if star {
            self.bump();
        }
        match (coeff, self.object(star)?) {
            (c, Some(obj)) => Ok((c.unwrap_or_else(|| Scalar::from_integer(1.into())), obj)),
            (Some(c), None) if !star => Ok((c, Object::Forest(Vec::new()))),
            _ => Err(self.error(if star { self.pos } else { at }, "expected a tree, a planted tree or a forest")),
        }
    }

    fn expr(&mut self) -> Result<ParsedExpr, ParseError> {
        let mut terms = Vec::new();
        let mut sign = Scalar::from_integer(1.into());
        if self.peek() == Some('-') {
            self.bump();
            sign = -sign;
        }
        loop {
            let (c, obj) = self.term()?;
            terms.push((sign * c, obj));
            match self.peek() {
                Some('+') => sign = Scalar::from_integer(1.into()),
                Some('-') => sign = Scalar::from_integer((-1).into()),
                None => break,
                Some(c) => return Err(self.error(self.pos, format!("unexpected '{c}'"))),
            }
            self.bump();
        }
        let any_tree = terms.iter().any(|(_, o)| matches!(o, Object::Tree(_)));
        if any_tree {
            if terms.iter().any(|(_, o)| matches!(o, Object::Forest(_))) {
                return Err(self.error(0, "cannot mix trees with planted trees or forests"));
            }
            return Ok(ParsedExpr::Trees(
                terms.into_iter().filter_map(|(c, o)| if let Object::Tree(t) = o { Some((c, t)) } else { None }).collect(),
            ));
        }
        let forests: Vec<(Scalar, Vec<Planted>)> =
            terms.into_iter().filter_map(|(c, o)| if let Object::Forest(f) = o { Some((c, f)) } else { None }).collect();
        if forests.iter().all(|(_, f)| f.len() == 1) {
            Ok(ParsedExpr::Planted(forests.into_iter().map(|(c, mut f)| (c, f.remove(0))).collect()))
        } else {
            Ok(ParsedExpr::Forests(forests.into_iter().map(|(c, f)| (c, Forest::new(f))).collect()))
        }
    }
}

pub fn parse_expr(src: &str, bases: Bases<'_>) -> Result<ParsedExpr, ParseError> {
    let mut p = Parser { src, pos: 0, bases };
    if p.peek().is_none() {
        return Err(p.error(p.pos, "empty expression"));
    }
    p.expr()
}

/// A single label, without role restrictions.
pub fn parse_label(src: &str) -> Result<Label, ParseError> {
    let mut p = Parser { src, pos: 0, bases: Bases::default() };
    let l = p.raw_label()?;
    if let Some(c) = p.peek() {
        return Err(p.error(p.pos, format!("unexpected '{c}' after label")));
    }
    Ok(l)
}

/// An edge label, checked against an optional basis.
pub fn parse_edge_label(src: &str, basis: Option<&Basis>) -> Result<Label, ParseError> {
    let mut p = Parser { src, pos: 0, bases: Bases { edges: basis, vertices: None } };
    let l = p.label(Role::Edge)?;
    if let Some(c) = p.peek() {
        return Err(p.error(p.pos, format!("unexpected '{c}' after label")));
    }
    Ok(l)
}

/// A vertex label, checked against an optional basis.
pub fn parse_vertex_label(src: &str, basis: Option<&Basis>) -> Result<Label, ParseError> {
    let mut p = Parser { src, pos: 0, bases: Bases { edges: None, vertices: basis } };
    let l = p.label(Role::Vertex)?;
    if let Some(c) = p.peek() {
        return Err(p.error(p.pos, format!("unexpected '{c}' after label")));
    }
    Ok(l)
}
