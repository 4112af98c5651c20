//! Parser for the CSS selector subset used by cosmetic hide rules.
//!
//! Supported: type and `*`, `#id`, `.class`, `[attr]`, `[attr=v]`, `[attr^=v]`,
//! `[attr$=v]`, `[attr*=v]`, `:not(simple)`, descendant and child
//! combinators, and comma grouping. Anything else is reported as
//! [`Unsupported`] so callers can count it.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttrOp {
    Exists,
    Equals,
    Prefix,
    Suffix,
    Substring,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AttrSelector {
    /// Lowercase attribute name.
    pub name: String,
    pub op: AttrOp,
    pub value: String,
}

impl AttrSelector {
    pub fn matches(&self, actual: Option<&str>) -> bool {
        let Some(actual) = actual else { return false };
        match self.op {
            AttrOp::Exists => true,
            AttrOp::Equals => actual == self.value,
            // Empty operands never match for the substring operators.
            AttrOp::Prefix => !self.value.is_empty() && actual.starts_with(&self.value),
            AttrOp::Suffix => !self.value.is_empty() && actual.ends_with(&self.value),
            AttrOp::Substring => !self.value.is_empty() && actual.contains(&self.value),
        }
    }
}

/// A single non-combinator test, the argument form of `:not()`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SimpleSelector {
    Type(String),
    Universal,
    Id(String),
    Class(String),
    Attr(AttrSelector),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CompoundSelector {
    /// Lowercase tag name; `None` for universal.
    pub tag: Option<String>,
    pub id: Option<String>,
    pub classes: Vec<String>,
    pub attrs: Vec<AttrSelector>,
    pub negations: Vec<SimpleSelector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Combinator {
    Descendant,
    Child,
}

/// Compounds left to right; `combinators[i]` joins `compounds[i]` and `compounds[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ComplexSelector {
    pub compounds: Vec<CompoundSelector>,
    pub combinators: Vec<Combinator>,
}

impl ComplexSelector {
    /// The compound tested against the candidate element itself.
    pub fn subject(&self) -> &CompoundSelector {
        self.compounds
            .last()
            .expect("complex selector is never empty")
    }
}

/// Comma-separated group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SelectorAst {
    pub selectors: Vec<ComplexSelector>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unsupported {
    PseudoElement,
    PseudoClass(String),
    SiblingCombinator,
    AttributeOperator(String),
    AttributeFlag,
    NamespacePrefix,
    MultipleIds,
    ComplexNegation,
    Syntax(String),
}

impl fmt::Display for Unsupported {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unsupported::PseudoElement => f.write_str("pseudo-element"),
            Unsupported::PseudoClass(p) => write!(f, "pseudo-class :{p}"),
            Unsupported::SiblingCombinator => f.write_str("sibling combinator"),
            Unsupported::AttributeOperator(op) => write!(f, "attribute operator {op}"),
            Unsupported::AttributeFlag => f.write_str("attribute flag"),
            Unsupported::NamespacePrefix => f.write_str("namespace prefix"),
            Unsupported::MultipleIds => f.write_str("more than one id in a compound"),
            Unsupported::ComplexNegation => f.write_str(":not() with a non-simple argument"),
            Unsupported::Syntax(s) => write!(f, "syntax: {s}"),
        }
    }
}

impl std::error::Error for Unsupported {}

pub fn parse_selector(text: &str) -> Result<SelectorAst, Unsupported> {
    let mut p = Parser {
        s: text.as_bytes(),
        src: text,
        pos: 0,
    };
    let mut selectors = Vec::new();
    loop {
        p.skip_ws();
        selectors.push(p.complex()?);
        p.skip_ws();
        match p.peek() {
            None => break,
            Some(b',') => p.pos += 1,
            Some(c) => return Err(p.unexpected(c)),
        }
    }
    Ok(SelectorAst { selectors })
}

struct Parser<'a> {
    s: &'a [u8],
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn skip_ws(&mut self) -> bool {
        let start = self.pos;
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r' | b'\x0c')) {
            self.pos += 1;
        }
        self.pos > start
    }

    fn unexpected(&self, c: u8) -> Unsupported {
        match c {
            b'+' | b'~' => Unsupported::SiblingCombinator,
            b'|' => Unsupported::NamespacePrefix,
            _ => Unsupported::Syntax(format!("unexpected {:?} at {}", char::from(c), self.pos)),
        }
    }

    fn complex(&mut self) -> Result<ComplexSelector, Unsupported> {
        let mut compounds = vec![self.compound()?];
        let mut combinators = Vec::new();
        loop {
            let had_ws = self.skip_ws();
            let comb = match self.peek() {
                None | Some(b',') => break,
                Some(b'>') => {
                    self.pos += 1;
                    self.skip_ws();
                    Combinator::Child
                }
                Some(b'+' | b'~') => return Err(Unsupported::SiblingCombinator),
                Some(_) if had_ws => Combinator::Descendant,
                Some(c) => return Err(self.unexpected(c)),
            };
            combinators.push(comb);
            compounds.push(self.compound()?);
        }
        Ok(ComplexSelector {
            compounds,
            combinators,
        })
    }

    fn compound(&mut self) -> Result<CompoundSelector, Unsupported> {
        let mut c = CompoundSelector::default();
        let mut any = false;
        match self.peek() {
            Some(b'*') => {
                self.pos += 1;
                any = true;
            }
            Some(ch) if is_ident_start(ch) => {
                c.tag = Some(self.ident()?.to_ascii_lowercase());
                any = true;
            }
            _ => {}
        }
        if self.peek() == Some(b'|') {
            return Err(Unsupported::NamespacePrefix);
        }
        loop {
            match self.peek() {
                Some(b'#') => {
                    self.pos += 1;
                    let id = self.ident()?;
                    if c.id.is_some() {
                        return Err(Unsupported::MultipleIds);
                    }
                    c.id = Some(id);
                }
                Some(b'.') => {
                    self.pos += 1;
                    c.classes.push(self.ident()?);
                }
                Some(b'[') => c.attrs.push(self.attribute()?),
                Some(b':') => {
                    self.pos += 1;
                    if self.peek() == Some(b':') {
                        return Err(Unsupported::PseudoElement);
                    }
                    let name = self.ident()?.to_ascii_lowercase();
                    if matches!(
                        name.as_str(),
                        "before" | "after" | "first-line" | "first-letter"
                    ) {
                        return Err(Unsupported::PseudoElement);
                    }
                    if name != "not" || self.peek() != Some(b'(') {
                        return Err(Unsupported::PseudoClass(name));
                    }
                    self.pos += 1;
                    self.skip_ws();
                    let simple = self.simple()?;
                    self.skip_ws();
                    match self.peek() {
                        Some(b')') => self.pos += 1,
                        _ => return Err(Unsupported::ComplexNegation),
                    }
                    c.negations.push(simple);
                }
                _ => break,
            }
            any = true;
        }
        if !any {
            return Err(match self.peek() {
                Some(ch) => self.unexpected(ch),
                None => Unsupported::Syntax("empty compound".into()),
            });
        }
        Ok(c)
    }

    fn simple(&mut self) -> Result<SimpleSelector, Unsupported> {
        match self.peek() {
            Some(b'*') => {
                self.pos += 1;
                Ok(SimpleSelector::Universal)
            }
            Some(b'#') => {
                self.pos += 1;
                Ok(SimpleSelector::Id(self.ident()?))
            }
            Some(b'.') => {
                self.pos += 1;
                Ok(SimpleSelector::Class(self.ident()?))
            }
            Some(b'[') => Ok(SimpleSelector::Attr(self.attribute()?)),
            Some(b':') => Err(Unsupported::ComplexNegation),
            Some(ch) if is_ident_start(ch) => {
                Ok(SimpleSelector::Type(self.ident()?.to_ascii_lowercase()))
            }
            Some(ch) => Err(self.unexpected(ch)),
            None => Err(Unsupported::Syntax("unterminated :not(".into())),
        }
    }

    fn attribute(&mut self) -> Result<AttrSelector, Unsupported> {
        debug_assert_eq!(self.peek(), Some(b'['));
        self.pos += 1;
        self.skip_ws();
        let name = self.ident()?.to_ascii_lowercase();
        if self.peek() == Some(b'|') && self.s.get(self.pos + 1) != Some(&b'=') {
            return Err(Unsupported::NamespacePrefix);
        }
        self.skip_ws();
        let op = match self.peek() {
            Some(b']') => {
                self.pos += 1;
                return Ok(AttrSelector {
                    name,
                    op: AttrOp::Exists,
                    value: String::new(),
                });
            }
            Some(b'=') => {
                self.pos += 1;
                AttrOp::Equals
            }
            Some(c @ (b'^' | b'$' | b'*' | b'~' | b'|')) => {
                if self.s.get(self.pos + 1) != Some(&b'=') {
                    return Err(Unsupported::Syntax("bad attribute operator".into()));
                }
                self.pos += 2;
                match c {
                    b'^' => AttrOp::Prefix,
                    b'$' => AttrOp::Suffix,
                    b'*' => AttrOp::Substring,
                    _ => {
                        return Err(Unsupported::AttributeOperator(format!(
                            "{}=",
                            char::from(c)
                        )))
                    }
                }
            }
            Some(c) => return Err(self.unexpected(c)),
            None => return Err(Unsupported::Syntax("unterminated attribute".into())),
        };
        self.skip_ws();
        let value = match self.peek() {
            Some(q @ (b'"' | b'\'')) => self.quoted(q)?,
            Some(_) => self.ident()?,
            None => return Err(Unsupported::Syntax("unterminated attribute".into())),
        };
        self.skip_ws();
        match self.peek() {
            Some(b']') => {
                self.pos += 1;
                Ok(AttrSelector { name, op, value })
            }
            Some(b'i' | b's' | b'I' | b'S') => Err(Unsupported::AttributeFlag),
            _ => Err(Unsupported::Syntax("unterminated attribute".into())),
        }
    }

    fn quoted(&mut self, quote: u8) -> Result<String, Unsupported> {
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(Unsupported::Syntax("unterminated string".into())),
                Some(c) if c == quote => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(b'\\') => {
                    self.pos += 1;
                    if self.peek() == Some(b'\n') {
                        self.pos += 1;
                    } else if self.peek().is_some() {
                        out.push(self.escape());
                    }
                }
                Some(_) => out.push(self.next_char()),
            }
        }
    }

    fn next_char(&mut self) -> char {
        let ch = self.src[self.pos..].chars().next().expect("in bounds");
        self.pos += ch.len_utf8();
        ch
    }

    /// Escape body after a backslash: hex code point or a literal character.
    fn escape(&mut self) -> char {
        let start = self.pos;
        while self.pos - start < 6 && self.peek().is_some_and(|c| c.is_ascii_hexdigit()) {
            self.pos += 1;
        }
        if self.pos > start {
            let cp = u32::from_str_radix(&self.src[start..self.pos], 16).unwrap_or(0xfffd);
            if matches!(self.peek(), Some(b' ' | b'\t' | b'\n')) {
                self.pos += 1;
            }
            return char::from_u32(cp)
                .filter(|c| *c != '\0')
                .unwrap_or('\u{fffd}');
        }
        self.next_char()
    }

    fn ident(&mut self) -> Result<String, Unsupported> {
        let mut out = String::new();
        if self.peek() == Some(b'-') {
            out.push('-');
            self.pos += 1;
        }
        loop {
            match self.peek() {
                Some(b'\\') => {
                    self.pos += 1;
                    if self.peek().is_none() {
                        return Err(Unsupported::Syntax("dangling escape".into()));
                    }
                    out.push(self.escape());
                }
                Some(c) if is_ident_char(c) => out.push(self.next_char()),
                _ => break,
            }
        }
        if out.is_empty() || out == "-" {
            return Err(match self.peek() {
                Some(c) => self.unexpected(c),
                None => Unsupported::Syntax("expected identifier".into()),
            });
        }
        Ok(out)
    }
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_' || c == b'-' || c == b'\\' || c >= 0x80
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'-' || c >= 0x80
}
