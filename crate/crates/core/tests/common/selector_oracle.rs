//! Random DOMs, random selectors, and a brute-force evaluator.
//!
//! Selectors are generated as a private structure, rendered to text for the
//! engine, and evaluated here left to right by set propagation: the set of
//! nodes matching the first compound is pushed through each combinator.

use std::collections::BTreeSet;

use noticescope::domquery::{DomDocument, NodeId};
use rand::seq::IndexedRandom;
use rand::Rng;

const TAGS: [&str; 7] = ["div", "span", "section", "ul", "li", "a", "em"];
const IDS: [&str; 4] = ["a", "b", "cookie", "Cookie"];
const CLASSES: [&str; 5] = ["x", "y", "z", "x-y", "banner"];
const ATTR_NAMES: [&str; 3] = ["data-k", "title", "role"];
const ATTR_VALUES: [&str; 5] = ["", "ab", "abc", "b", "cookie notice"];

#[derive(Debug, Clone, Copy)]
pub enum Op {
    Exists,
    Eq,
    Prefix,
    Suffix,
    Contains,
}

#[derive(Debug, Clone)]
pub enum Simple {
    Tag(&'static str),
    Id(&'static str),
    Class(&'static str),
    Attr(&'static str, Op, &'static str),
}

#[derive(Debug, Clone, Default)]
pub struct Compound {
    pub tag: Option<&'static str>,
    pub id: Option<&'static str>,
    pub classes: Vec<&'static str>,
    pub attrs: Vec<(&'static str, Op, &'static str)>,
    pub not: Option<Simple>,
}

#[derive(Debug, Clone)]
pub struct Complex {
    pub parts: Vec<Compound>,
    /// `true` joins with `>`, `false` with whitespace.
    pub child: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct Selector(pub Vec<Complex>);

fn attr_text(name: &str, op: Op, value: &str) -> String {
    let sym = match op {
        Op::Exists => return format!("[{name}]"),
        Op::Eq => "=",
        Op::Prefix => "^=",
        Op::Suffix => "$=",
        Op::Contains => "*=",
    };
    format!("[{name}{sym}\"{value}\"]")
}

fn simple_text(s: &Simple) -> String {
    match s {
        Simple::Tag(t) => t.to_string(),
        Simple::Id(i) => format!("#{i}"),
        Simple::Class(c) => format!(".{c}"),
        Simple::Attr(n, op, v) => attr_text(n, *op, v),
    }
}

impl Compound {
    fn text(&self) -> String {
        let mut s = self.tag.unwrap_or("").to_string();
        if let Some(i) = self.id {
            s += &format!("#{i}");
        }
        for c in &self.classes {
            s += &format!(".{c}");
        }
        for (n, op, v) in &self.attrs {
            s += &attr_text(n, *op, v);
        }
        if let Some(n) = &self.not {
            s += &format!(":not({})", simple_text(n));
        }
        if s.is_empty() {
            s.push('*');
        }
        s
    }
}

impl Selector {
    pub fn text(&self) -> String {
        self.0
            .iter()
            .map(|c| {
                let mut s = c.parts[0].text();
                for (part, &child) in c.parts[1..].iter().zip(&c.child) {
                    s += if child { " > " } else { " " };
                    s += &part.text();
                }
                s
            })
            .collect::<Vec<_>>()
            .join(", ")
    }
}

fn random_op<R: Rng>(rng: &mut R) -> Op {
    *[Op::Exists, Op::Eq, Op::Prefix, Op::Suffix, Op::Contains]
        .choose(rng)
        .unwrap()
}

fn random_compound<R: Rng>(rng: &mut R) -> Compound {
    let mut c = Compound::default();
    if rng.random_bool(0.5) {
        c.tag = Some(TAGS.choose(rng).unwrap());
    }
    if rng.random_bool(0.25) {
        c.id = Some(IDS.choose(rng).unwrap());
    }
    for _ in 0..rng.random_range(0..=2) {
        c.classes.push(CLASSES.choose(rng).unwrap());
    }
    if rng.random_bool(0.3) {
        c.attrs.push((
            ATTR_NAMES.choose(rng).unwrap(),
            random_op(rng),
            ATTR_VALUES.choose(rng).unwrap(),
        ));
    }
    if rng.random_bool(0.2) {
        c.not = Some(match rng.random_range(0..4) {
            0 => Simple::Tag(TAGS.choose(rng).unwrap()),
            1 => Simple::Id(IDS.choose(rng).unwrap()),
            2 => Simple::Class(CLASSES.choose(rng).unwrap()),
            _ => Simple::Attr(
                ATTR_NAMES.choose(rng).unwrap(),
                random_op(rng),
                ATTR_VALUES.choose(rng).unwrap(),
            ),
        });
    }
    c
}

pub fn random_selector<R: Rng>(rng: &mut R) -> Selector {
    let groups = if rng.random_bool(0.15) { 2 } else { 1 };
    Selector(
        (0..groups)
            .map(|_| {
                let n = rng.random_range(1..=3);
                Complex {
                    parts: (0..n).map(|_| random_compound(rng)).collect(),
                    child: (1..n).map(|_| rng.random_bool(0.5)).collect(),
                }
            })
            .collect(),
    )
}

fn random_element<R: Rng>(rng: &mut R, depth: usize, budget: &mut usize, out: &mut String) {
    let tag = TAGS.choose(rng).unwrap();
    out.push('<');
    out.push_str(tag);
    if rng.random_bool(0.3) {
        out.push_str(&format!(" id=\"{}\"", IDS.choose(rng).unwrap()));
    }
    if rng.random_bool(0.6) {
        let k = rng.random_range(1..=3);
        let cls: Vec<&str> = (0..k).map(|_| *CLASSES.choose(rng).unwrap()).collect();
        out.push_str(&format!(" class=\"{}\"", cls.join(" ")));
    }
    for name in ATTR_NAMES {
        if rng.random_bool(0.25) {
            out.push_str(&format!(" {name}=\"{}\"", ATTR_VALUES.choose(rng).unwrap()));
        }
    }
    out.push('>');
    if depth < 6 {
        for _ in 0..rng.random_range(0..=3) {
            if *budget == 0 {
                break;
            }
            *budget -= 1;
            random_element(rng, depth + 1, budget, out);
        }
    }
    if rng.random_bool(0.3) {
        out.push_str("text");
    }
    out.push_str(&format!("</{tag}>"));
}

/// Random markup of up to roughly 40 elements inside a body.
pub fn random_dom<R: Rng>(rng: &mut R) -> String {
    let mut out = String::from("<html><body>");
    let mut budget = rng.random_range(5..40);
    while budget > 0 {
        budget -= 1;
        random_element(rng, 0, &mut budget, &mut out);
    }
    out.push_str("</body></html>");
    out
}

fn raw_attr<'a>(doc: &'a DomDocument, id: NodeId, name: &str) -> Option<&'a str> {
    doc.element(id)?
        .attrs
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case(name))
        .map(|(_, v)| v.as_str())
}

fn attr_ok(actual: Option<&str>, op: Op, value: &str) -> bool {
    match (actual, op) {
        (None, _) => false,
        (Some(_), Op::Exists) => true,
        (Some(a), Op::Eq) => a == value,
        (Some(a), Op::Prefix) => !value.is_empty() && a.starts_with(value),
        (Some(a), Op::Suffix) => !value.is_empty() && a.ends_with(value),
        (Some(a), Op::Contains) => !value.is_empty() && a.contains(value),
    }
}

fn simple_ok(doc: &DomDocument, n: NodeId, s: &Simple) -> bool {
    let el = doc.element(n).expect("element");
    match s {
        Simple::Tag(t) => el.name.eq_ignore_ascii_case(t),
        Simple::Id(i) => raw_attr(doc, n, "id") == Some(*i),
        Simple::Class(c) => {
            raw_attr(doc, n, "class").is_some_and(|v| v.split_ascii_whitespace().any(|k| k == *c))
        }
        Simple::Attr(name, op, v) => attr_ok(raw_attr(doc, n, name), *op, v),
    }
}

fn compound_ok(doc: &DomDocument, n: NodeId, c: &Compound) -> bool {
    c.tag.is_none_or(|t| simple_ok(doc, n, &Simple::Tag(t)))
        && c.id.is_none_or(|i| simple_ok(doc, n, &Simple::Id(i)))
        && c.classes
            .iter()
            .all(|k| simple_ok(doc, n, &Simple::Class(k)))
        && c.attrs
            .iter()
            .all(|(a, op, v)| simple_ok(doc, n, &Simple::Attr(a, *op, v)))
        && c.not.as_ref().is_none_or(|s| !simple_ok(doc, n, s))
}

/// Matched elements in ascending node order.
pub fn evaluate(doc: &DomDocument, sel: &Selector) -> Vec<NodeId> {
    let elements: Vec<NodeId> = doc.elements().collect();
    let mut all = BTreeSet::new();
    for complex in &sel.0 {
        let mut current: BTreeSet<NodeId> = elements
            .iter()
            .copied()
            .filter(|&n| compound_ok(doc, n, &complex.parts[0]))
            .collect();
        for (part, &child) in complex.parts[1..].iter().zip(&complex.child) {
            current = elements
                .iter()
                .copied()
                .filter(|&n| compound_ok(doc, n, part))
                .filter(|&n| {
                    let mut p = doc.parent(n);
                    while let Some(a) = p {
                        if current.contains(&a) {
                            return true;
                        }
                        if child {
                            return false;
                        }
                        p = doc.parent(a);
                    }
                    false
                })
                .collect();
        }
        all.extend(current);
    }
    all.into_iter().collect()
}
