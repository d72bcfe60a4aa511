//! Line-oriented description files.
//!
//! ```text
//! # comment
//! group A {
//!   block B = cyclic(p=5, k=1, mult=1)
//!   block C = torsionfree(pi={5}, rank=1)
//! }
//! endo phi on A {
//!   tf[C.0 -> C.0] = 1/5;
//! }
//! ```
//!
//! Entries inside an endo body: `tf[X.i -> Y.j]`, `div[X.i -> X.j]`,
//! `cyc[X.i -> X.j]` and `tau[X.i -> Y.j]` set one matrix entry;
//! `tf[X]`, `div[X]` and `cyc[X]` set the scalar of a whole block;
//! `fin[X.i (mod m)] = { Y.j: q, ... }` sets the finitary image of one
//! generator. Separators `;` are optional.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::endokit::{Endo, EndoDraft, EndoViolation, Entry};
use crate::exactnum::{fmt_rational, is_prime, Int, Prime, Rational};
use crate::groupkit::{Block, BlockKind, Coord, GroupDesc, Mult};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(BigInt),
    Arrow,
    Sym(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s:?}"),
            Tok::Num(n) => write!(f, "{n}"),
            Tok::Arrow => f.write_str("\"->\""),
            Tok::Sym(c) => write!(f, "'{c}'"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, col) = (ln + 1, i + 1);
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let tok = if c.is_ascii_alphabetic() || c == '_' {
                let s: String = chars[i..].iter().take_while(|c| c.is_ascii_alphanumeric() || **c == '_').collect();
                i += s.chars().count();
                Tok::Ident(s)
            } else if c.is_ascii_digit() {
                let s: String = chars[i..].iter().take_while(|c| c.is_ascii_digit()).collect();
                i += s.len();
                Tok::Num(s.parse().expect("digits"))
            } else if c == '-' && chars.get(i + 1) == Some(&'>') {
                i += 2;
                Tok::Arrow
            } else if "{}[]()=,;.:/-".contains(c) {
                i += 1;
                Tok::Sym(c)
            } else {
                return Err(ParseError { line, col, message: format!("unexpected character {c:?}") });
            };
            out.push(Spanned { tok, line, col });
        }
    }
    Ok(out)
}

/// A parsed endo before validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedDraft {
    pub name: String,
    pub group: String,
    pub draft: EndoDraft,
    pub line: usize,
}

/// Groups and endomorphisms of one description file, in file order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub groups: Vec<(String, Arc<GroupDesc>)>,
    pub endos: Vec<NamedDraft>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("endo {name} (line {line}): {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ValidationError {
    pub name: String,
    pub line: usize,
    pub violations: Vec<EndoViolation>,
}

impl Document {
    pub fn group(&self, name: &str) -> Option<&Arc<GroupDesc>> {
        self.groups.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }

    /// Every endo validated into normal form.
    pub fn validated(&self) -> Result<Vec<(String, Endo)>, ValidationError> {
        self.endos
            .iter()
            .map(|e| {
                e.draft.clone().build().map(|x| (e.name.clone(), x)).map_err(|violations| ValidationError {
                    name: e.name.clone(),
                    line: e.line,
                    violations,
                })
            })
            .collect()
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn err_at(&self, at: usize, message: impl Into<String>) -> ParseError {
        let (line, col) = self.toks.get(at).map_or(self.end, |t| (t.line, t.col));
        ParseError { line, col, message: message.into() }
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        self.err_at(self.pos, message)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Result<Tok, ParseError> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone()).ok_or_else(|| self.err("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn sym(&mut self, c: char) -> Result<(), ParseError> {
        match self.next()? {
            Tok::Sym(x) if x == c => Ok(()),
            t => Err(self.err_at(self.pos - 1, format!("expected '{c}', found {t}"))),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.next()? {
            Tok::Ident(s) => Ok(s),
            t => Err(self.err_at(self.pos - 1, format!("expected a name, found {t}"))),
        }
    }

    fn keyword(&mut self, k: &str) -> Result<(), ParseError> {
        match self.next()? {
            Tok::Ident(s) if s == k => Ok(()),
            t => Err(self.err_at(self.pos - 1, format!("expected {k:?}, found {t}"))),
        }
    }

    fn num(&mut self) -> Result<BigInt, ParseError> {
        match self.next()? {
            Tok::Num(n) => Ok(n),
            t => Err(self.err_at(self.pos - 1, format!("expected a number, found {t}"))),
        }
    }

    fn small(&mut self) -> Result<u64, ParseError> {
        let at = self.pos;
        let n = self.num()?;
        u64::try_from(&n).map_err(|_| self.err_at(at, format!("{n} is too large")))
    }

    fn prime(&mut self) -> Result<Prime, ParseError> {
        let at = self.pos;
        let p = self.small()?;
        if !is_prime(p) {
            return Err(self.err_at(at, format!("{p} is not a prime")));
        }
        Ok(Prime::new(p).expect("checked"))
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let neg = self.eat_sym('-');
        let n = self.num()?;
        let n = if neg { -n } else { n };
        if self.eat_sym('/') {
            let at = self.pos;
            let d = self.num()?;
            if d == BigInt::from(0) {
                return Err(self.err_at(at, "zero denominator"));
            }
            return Ok(Rational::new(n, d));
        }
        Ok(Rational::from_integer(n))
    }

    fn mult(&mut self) -> Result<Mult, ParseError> {
        if let Some(Tok::Ident(s)) = self.peek() {
            if s == "omega" {
                self.pos += 1;
                return Ok(Mult::Omega);
            }
        }
        let at = self.pos;
        let n = self.small()?;
        if n == 0 {
            return Err(self.err_at(at, "multiplicity must be positive"));
        }
        Ok(Mult::Finite(n))
    }

    fn field(&mut self, name: &str) -> Result<(), ParseError> {
        self.keyword(name)?;
        self.sym('=')
    }

    fn block_kind(&mut self) -> Result<BlockKind, ParseError> {
        let at = self.pos;
        let kind = self.ident()?;
        self.sym('(')?;
        let k = match kind.as_str() {
            "cyclic" => {
                self.field("p")?;
                let p = self.prime()?;
                self.sym(',')?;
                self.field("k")?;
                let kat = self.pos;
                let k = self.small()?;
                if k == 0 || k > u64::from(u32::MAX) {
                    return Err(self.err_at(kat, "exponent must be positive"));
                }
                self.sym(',')?;
                self.field("mult")?;
                BlockKind::Cyclic { p, k: k as u32, mult: self.mult()? }
            }
            "prufer" => {
                self.field("p")?;
                let p = self.prime()?;
                self.sym(',')?;
                self.field("copies")?;
                BlockKind::Prufer { p, copies: self.mult()? }
            }
            "torsionfree" => {
                self.field("pi")?;
                self.sym('{')?;
                let mut pi = std::collections::BTreeSet::new();
                if !self.eat_sym('}') {
                    loop {
                        pi.insert(self.prime()?);
                        if self.eat_sym('}') {
                            break;
                        }
                        self.sym(',')?;
                    }
                }
                self.sym(',')?;
                self.field("rank")?;
                let rat = self.pos;
                match self.mult()? {
                    Mult::Omega if pi.is_empty() => BlockKind::FreeOmega,
                    Mult::Omega => return Err(self.err_at(rat, "rank omega requires pi = {}")),
                    Mult::Finite(rank) => BlockKind::TorsionFree { pi, rank },
                }
            }
            other => return Err(self.err_at(at, format!("unknown block kind {other:?}"))),
        };
        self.sym(')')?;
        Ok(k)
    }

    fn group(&mut self) -> Result<(String, GroupDesc), ParseError> {
        let head = self.pos;
        let name = self.ident()?;
        self.sym('{')?;
        let mut blocks = Vec::new();
        while !self.eat_sym('}') {
            self.keyword("block")?;
            let id = self.ident()?;
            self.sym('=')?;
            blocks.push(Block { name: id, kind: self.block_kind()? });
        }
        if blocks.is_empty() {
            return Err(self.err_at(head, format!("group {name} has no blocks")));
        }
        let g = GroupDesc::new(name.clone(), blocks).map_err(|e| self.err_at(head, e.to_string()))?;
        Ok((name, g))
    }

    fn block_ref(&mut self, g: &GroupDesc) -> Result<usize, ParseError> {
        let at = self.pos;
        let id = self.ident()?;
        g.block_index(&id).map_err(|_| self.err_at(at, format!("unknown block {id:?} in group {}", g.name())))
    }

    fn coord(&mut self, g: &GroupDesc) -> Result<Coord, ParseError> {
        let b = self.block_ref(g)?;
        self.sym('.')?;
        Ok(Coord::new(b, self.small()?))
    }

    fn entry(&mut self, g: &GroupDesc) -> Result<Entry, ParseError> {
        let at = self.pos;
        let kind = self.ident()?;
        self.sym('[')?;
        let b = self.block_ref(g)?;
        if kind == "fin" {
            self.sym('.')?;
            let src = Coord::new(b, self.small()?);
            let modulus = if self.eat_sym('(') {
                self.keyword("mod")?;
                let m = self.num()?;
                self.sym(')')?;
                Some(Int::from(m))
            } else {
                None
            };
            self.sym(']')?;
            self.sym('=')?;
            self.sym('{')?;
            let mut image = Vec::new();
            if !self.eat_sym('}') {
                loop {
                    let c = self.coord(g)?;
                    self.sym(':')?;
                    image.push((c, self.rational()?));
                    if self.eat_sym('}') {
                        break;
                    }
                    self.sym(',')?;
                }
            }
            return Ok(Entry::Fin { src, modulus, image });
        }
        if self.eat_sym(']') {
            self.sym('=')?;
            let value = self.rational()?;
            return match kind.as_str() {
                "tf" => Ok(Entry::TfScalar { block: b, value }),
                "div" => Ok(Entry::DivScalar { block: b, value }),
                "cyc" => Ok(Entry::CycScalar { block: b, value }),
                _ => Err(self.err_at(at, format!("{kind:?} takes a source and a target"))),
            };
        }
        self.sym('.')?;
        let i = self.small()?;
        if self.peek() != Some(&Tok::Arrow) {
            return Err(self.err("expected \"->\""));
        }
        self.pos += 1;
        let dst = self.coord(g)?;
        self.sym(']')?;
        self.sym('=')?;
        let value = self.rational()?;
        let src = Coord::new(b, i);
        let same = |e: Entry| if dst.block == b { Ok(e) } else { Err(self.err_at(at, format!("{kind} entries stay inside one block"))) };
        match kind.as_str() {
            "tf" => Ok(Entry::Tf { src, dst, value }),
            "tau" => Ok(Entry::Tau { src, dst, value }),
            "div" => same(Entry::Div { block: b, src: i, dst: dst.copy, value }),
            "cyc" => same(Entry::Cyc { block: b, src: i, dst: dst.copy, value }),
            _ => Err(self.err_at(at, format!("unknown entry kind {kind:?}"))),
        }
    }
}

/// Parses a description file; domain rules are checked later by
/// [`Document::validated`].
pub fn parse(text: &str) -> Result<Document, ParseError> {
    let toks = lex(text)?;
    let lines = text.lines().count();
    let mut ps = Parser { toks, pos: 0, end: (lines.max(1), 1) };
    let mut doc = Document::default();
    while ps.peek().is_some() {
        let at = ps.pos;
        match ps.ident()?.as_str() {
            "group" => {
                let (name, g) = ps.group()?;
                if doc.group(&name).is_some() {
                    return Err(ps.err_at(at, format!("duplicate group {name:?}")));
                }
                doc.groups.push((name, Arc::new(g)));
            }
            "endo" => {
                let line = ps.toks[at].line;
                let name = ps.ident()?;
                ps.keyword("on")?;
                let gat = ps.pos;
                let gname = ps.ident()?;
                let g = doc.group(&gname).cloned().ok_or_else(|| ps.err_at(gat, format!("unknown group {gname:?}")))?;
                if doc.endos.iter().any(|e| e.name == name) {
                    return Err(ps.err_at(at, format!("duplicate endo {name:?}")));
                }
                ps.sym('{')?;
                let mut entries = Vec::new();
                while !ps.eat_sym('}') {
                    if ps.eat_sym(';') {
                        continue;
                    }
                    entries.push(ps.entry(&g)?);
                }
                doc.endos.push(NamedDraft { name, group: gname, draft: EndoDraft { group: g, entries }, line });
            }
            other => return Err(ps.err_at(at, format!("expected \"group\" or \"endo\", found {other:?}"))),
        }
    }
    Ok(doc)
}

fn coord_name(g: &GroupDesc, c: Coord) -> String {
    format!("{}.{}", g.block(c.block).name, c.copy)
}

fn entry_text(g: &GroupDesc, e: &Entry) -> String {
    let b = |i: usize| g.block(i).name.clone();
    let c = |x: Coord| coord_name(g, x);
    let q = fmt_rational;
    match e {
        Entry::TfScalar { block, value } => format!("tf[{}] = {}", b(*block), q(value)),
        Entry::Tf { src, dst, value } => format!("tf[{} -> {}] = {}", c(*src), c(*dst), q(value)),
        Entry::DivScalar { block, value } => format!("div[{}] = {}", b(*block), q(value)),
        Entry::Div { block, src, dst, value } => format!("div[{0}.{src} -> {0}.{dst}] = {1}", b(*block), q(value)),
        Entry::CycScalar { block, value } => format!("cyc[{}] = {}", b(*block), q(value)),
        Entry::Cyc { block, src, dst, value } => format!("cyc[{0}.{src} -> {0}.{dst}] = {1}", b(*block), q(value)),
        Entry::Tau { src, dst, value } => format!("tau[{} -> {}] = {}", c(*src), c(*dst), q(value)),
        Entry::Fin { src, modulus, image } => {
            let m = modulus.as_ref().map(|m| format!(" (mod {m})")).unwrap_or_default();
            let img: Vec<String> = image.iter().map(|(d, v)| format!("{}: {}", c(*d), q(v))).collect();
            format!("fin[{}{}] = {{ {} }}", c(*src), m, img.join(", "))
        }
    }
}

/// Canonical one-line body of an endomorphism in normal form.
pub fn serialize_endo_body(e: &Endo) -> String {
    let d = e.to_draft();
    let parts: Vec<String> = d.entries.iter().map(|x| entry_text(e.group(), x)).collect();
    parts.join("; ")
}

fn serialize_group(name: &str, g: &GroupDesc) -> String {
    let mut s = format!("group {name} {{\n");
    for b in g.blocks() {
        s.push_str(&format!("  block {} = {}\n", b.name, b.kind));
    }
    s.push_str("}\n");
    s
}

fn serialize_endo(name: &str, group: &str, g: &GroupDesc, entries: &[Entry]) -> String {
    let mut s = format!("endo {name} on {group} {{\n");
    for e in entries {
        s.push_str(&format!("  {};\n", entry_text(g, e)));
    }
    s.push_str("}\n");
    s
}

/// Canonical text: groups then endos in file order, each endo in normal
/// form when it validates and as written otherwise.
pub fn serialize(doc: &Document) -> String {
    let mut parts: Vec<String> = doc.groups.iter().map(|(n, g)| serialize_group(n, g)).collect();
    for e in &doc.endos {
        let entries = match e.draft.clone().build() {
            Ok(x) => x.to_draft().entries,
            Err(_) => e.draft.entries.clone(),
        };
        parts.push(serialize_endo(&e.name, &e.group, &e.draft.group, &entries));
    }
    parts.join("\n")
}
