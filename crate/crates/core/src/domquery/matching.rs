//! Right-to-left selector evaluation with an id/class/tag candidate index.

use std::collections::HashMap;

use super::dom::{DomDocument, ElementData, NodeId};
use super::selector::{Combinator, ComplexSelector, CompoundSelector, SelectorAst, SimpleSelector};

/// Lookup tables over one document, built once and reused for many selectors.
pub struct DomIndex<'a> {
    doc: &'a DomDocument,
    by_id: HashMap<&'a str, Vec<NodeId>>,
    by_class: HashMap<&'a str, Vec<NodeId>>,
    by_tag: HashMap<&'a str, Vec<NodeId>>,
    elements: Vec<NodeId>,
}

impl<'a> DomIndex<'a> {
    pub fn new(doc: &'a DomDocument) -> Self {
        let mut by_id: HashMap<&str, Vec<NodeId>> = HashMap::new();
        let mut by_class: HashMap<&str, Vec<NodeId>> = HashMap::new();
        let mut by_tag: HashMap<&str, Vec<NodeId>> = HashMap::new();
        let mut elements = Vec::new();
        for id in doc.elements() {
            let e = doc.element(id).expect("element");
            elements.push(id);
            by_tag.entry(e.name.as_str()).or_default().push(id);
            if let Some(v) = e.id.as_deref() {
                by_id.entry(v).or_default().push(id);
            }
            for c in &e.classes {
                let list = by_class.entry(c.as_str()).or_default();
                // class="a a" must not list the node twice.
                if list.last() != Some(&id) {
                    list.push(id);
                }
            }
        }
        DomIndex {
            doc,
            by_id,
            by_class,
            by_tag,
            elements,
        }
    }

    pub fn document(&self) -> &'a DomDocument {
        self.doc
    }

    fn candidates(&self, subject: &CompoundSelector) -> &[NodeId] {
        fn get<'s>(m: &'s HashMap<&str, Vec<NodeId>>, k: &str) -> &'s [NodeId] {
            m.get(k).map(Vec::as_slice).unwrap_or(&[])
        }
        if let Some(id) = &subject.id {
            return get(&self.by_id, id);
        }
        if !subject.classes.is_empty() {
            return subject
                .classes
                .iter()
                .map(|c| get(&self.by_class, c))
                .min_by_key(|s| s.len())
                .unwrap_or(&[]);
        }
        if let Some(tag) = &subject.tag {
            return get(&self.by_tag, tag);
        }
        &self.elements
    }

    /// Matching elements in document order, without duplicates.
    pub fn query(&self, sel: &SelectorAst) -> Vec<NodeId> {
        let mut out = Vec::new();
        for complex in &sel.selectors {
            self.query_complex_into(complex, &mut out);
        }
        if sel.selectors.len() > 1 {
            out.sort_unstable();
            out.dedup();
        }
        out
    }

    fn query_complex_into(&self, complex: &ComplexSelector, out: &mut Vec<NodeId>) {
        for &id in self.candidates(complex.subject()) {
            if matches_complex(self.doc, id, complex) {
                out.push(id);
            }
        }
    }
}

/// Evaluate `sel` over `doc`. Builds a fresh index; prefer [`DomIndex`] for many queries.
pub fn query(doc: &DomDocument, sel: &SelectorAst) -> Vec<NodeId> {
    DomIndex::new(doc).query(sel)
}

/// Whether element `id` is matched by any selector of the group.
pub fn matches(doc: &DomDocument, id: NodeId, sel: &SelectorAst) -> bool {
    doc.element(id).is_some() && sel.selectors.iter().any(|c| matches_complex(doc, id, c))
}

fn matches_complex(doc: &DomDocument, id: NodeId, complex: &ComplexSelector) -> bool {
    let last = complex.compounds.len() - 1;
    match doc.element(id) {
        Some(e) if matches_compound(e, &complex.compounds[last]) => {
            matches_from(doc, id, complex, last)
        }
        _ => false,
    }
}

/// `id` matched compound `idx`; check the compounds to its left.
fn matches_from(doc: &DomDocument, id: NodeId, complex: &ComplexSelector, idx: usize) -> bool {
    if idx == 0 {
        return true;
    }
    let target = &complex.compounds[idx - 1];
    match complex.combinators[idx - 1] {
        Combinator::Child => match doc.parent_element(id) {
            Some(p) => {
                matches_compound(doc.element(p).expect("element"), target)
                    && matches_from(doc, p, complex, idx - 1)
            }
            None => false,
        },
        Combinator::Descendant => doc.ancestors(id).any(|a| {
            matches_compound(doc.element(a).expect("element"), target)
                && matches_from(doc, a, complex, idx - 1)
        }),
    }
}

pub(crate) fn matches_compound(e: &ElementData, c: &CompoundSelector) -> bool {
    if let Some(tag) = &c.tag {
        if e.name != *tag {
            return false;
        }
    }
    if let Some(id) = &c.id {
        if e.id.as_deref() != Some(id.as_str()) {
            return false;
        }
    }
    c.classes.iter().all(|cl| e.has_class(cl))
        && c.attrs.iter().all(|a| a.matches(e.attr(&a.name)))
        && c.negations.iter().all(|n| !matches_simple(e, n))
}

fn matches_simple(e: &ElementData, s: &SimpleSelector) -> bool {
    match s {
        SimpleSelector::Type(t) => e.name == *t,
        SimpleSelector::Universal => true,
        SimpleSelector::Id(id) => e.id.as_deref() == Some(id.as_str()),
        SimpleSelector::Class(c) => e.has_class(c),
        SimpleSelector::Attr(a) => a.matches(e.attr(&a.name)),
    }
}
