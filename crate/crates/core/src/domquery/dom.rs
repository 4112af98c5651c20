//! Arena DOM built from an error-tolerant HTML5 parse.

use std::fmt::Write as _;

use encoding_rs::Encoding;
use scraper::{Html, Node as HtmlNode};

/// Stable handle of a node; ids increase in document order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementData {
    /// Lowercase local name.
    pub name: String,
    /// Attributes with lowercase names, in source order.
    pub attrs: Vec<(String, String)>,
    pub id: Option<String>,
    pub classes: Vec<String>,
}

impl ElementData {
    fn new(name: String, attrs: Vec<(String, String)>) -> Self {
        let id = attrs
            .iter()
            .find(|(k, _)| k == "id")
            .map(|(_, v)| v.clone());
        let classes = attrs
            .iter()
            .find(|(k, _)| k == "class")
            .map(|(_, v)| v.split_ascii_whitespace().map(str::to_string).collect())
            .unwrap_or_default();
        ElementData {
            name,
            attrs,
            id,
            classes,
        }
    }

    /// Attribute lookup; `name` must already be lowercase.
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.classes.iter().any(|c| c == class)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Document,
    Element(ElementData),
    Text(String),
    Comment(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub kind: NodeKind,
}

impl Node {
    pub fn element(&self) -> Option<&ElementData> {
        match &self.kind {
            NodeKind::Element(e) => Some(e),
            _ => None,
        }
    }
}

/// Parsed document. Node 0 is the document root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomDocument {
    nodes: Vec<Node>,
}

const VOID_ELEMENTS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
    "track", "wbr",
];

const RAW_TEXT_ELEMENTS: &[&str] = &[
    "script",
    "style",
    "xmp",
    "iframe",
    "noembed",
    "noframes",
    "plaintext",
    "noscript",
];

/// Decode `bytes` and build the tree. Never fails.
///
/// `encoding_hint` is a charset label such as `"utf-8"` or `"windows-1252"`;
/// a byte-order mark takes precedence, unknown labels fall back to UTF-8.
pub fn parse_html(bytes: &[u8], encoding_hint: Option<&str>) -> DomDocument {
    let encoding = encoding_hint
        .and_then(|l| Encoding::for_label(l.trim().as_bytes()))
        .unwrap_or(encoding_rs::UTF_8);
    let (text, _, _) = encoding.decode(bytes);
    DomDocument::parse(&text)
}

impl DomDocument {
    /// Parse a complete document (html/head/body are synthesized as needed).
    pub fn parse(html: &str) -> Self {
        Self::from_html(&Html::parse_document(html))
    }

    /// Parse a fragment in body context; the wrapper element is dropped.
    pub fn parse_fragment(html: &str) -> Self {
        let parsed = Html::parse_fragment(html);
        let mut doc = DomDocument {
            nodes: vec![Node {
                parent: None,
                children: Vec::new(),
                kind: NodeKind::Document,
            }],
        };
        // html5ever wraps fragments in a synthetic <html> element.
        for child in parsed.tree.root().children() {
            match child.value() {
                HtmlNode::Element(e) if e.name() == "html" => {
                    for c in child.children() {
                        doc.import(c, NodeId(0));
                    }
                }
                _ => doc.import(child, NodeId(0)),
            }
        }
        doc
    }

    fn from_html(parsed: &Html) -> Self {
        let mut doc = DomDocument {
            nodes: vec![Node {
                parent: None,
                children: Vec::new(),
                kind: NodeKind::Document,
            }],
        };
        for child in parsed.tree.root().children() {
            doc.import(child, NodeId(0));
        }
        doc
    }

    fn import(&mut self, node: ego_tree::NodeRef<'_, HtmlNode>, parent: NodeId) {
        let kind = match node.value() {
            HtmlNode::Element(e) => {
                let attrs = e
                    .attrs()
                    .map(|(k, v)| (k.to_ascii_lowercase(), v.to_string()))
                    .collect();
                NodeKind::Element(ElementData::new(e.name().to_ascii_lowercase(), attrs))
            }
            HtmlNode::Text(t) => {
                // Merge adjacent text so trees compare structurally.
                if let Some(&last) = self.nodes[parent.index()].children.last() {
                    if let NodeKind::Text(prev) = &mut self.nodes[last.index()].kind {
                        prev.push_str(t);
                        return;
                    }
                }
                NodeKind::Text(t.to_string())
            }
            HtmlNode::Comment(c) => NodeKind::Comment(c.to_string()),
            _ => return,
        };
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            parent: Some(parent),
            children: Vec::new(),
            kind,
        });
        self.nodes[parent.index()].children.push(id);
        for child in node.children() {
            self.import(child, id);
        }
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn element(&self, id: NodeId) -> Option<&ElementData> {
        self.nodes.get(id.index()).and_then(Node::element)
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].parent
    }

    /// Parent if it is an element (the document root is not).
    pub fn parent_element(&self, id: NodeId) -> Option<NodeId> {
        self.parent(id).filter(|p| self.element(*p).is_some())
    }

    /// Every node id in document order.
    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// Element ids in document order.
    pub fn elements(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids().filter(|id| self.element(*id).is_some())
    }

    /// First element with the given tag name.
    pub fn find_tag(&self, name: &str) -> Option<NodeId> {
        self.elements()
            .find(|id| self.element(*id).is_some_and(|e| e.name == name))
    }

    /// Serialization of the children of `id`.
    pub fn inner_html(&self, id: NodeId) -> String {
        let mut out = String::new();
        let raw = self.element(id).is_some_and(|e| is_raw_text(&e.name));
        for &c in &self.nodes[id.index()].children {
            self.write_node(c, raw, &mut out);
        }
        out
    }

    /// Serialization of `id` itself including its tags.
    pub fn outer_html(&self, id: NodeId) -> String {
        let mut out = String::new();
        self.write_node(id, false, &mut out);
        out
    }

    /// Serialize the whole document.
    pub fn to_html(&self) -> String {
        self.inner_html(self.root())
    }

    fn write_node(&self, id: NodeId, raw_parent: bool, out: &mut String) {
        match &self.nodes[id.index()].kind {
            NodeKind::Document => {
                for &c in &self.nodes[id.index()].children {
                    self.write_node(c, false, out);
                }
            }
            NodeKind::Text(t) => {
                if raw_parent {
                    out.push_str(t);
                } else {
                    escape_text(t, out);
                }
            }
            NodeKind::Comment(c) => {
                let _ = write!(out, "<!--{c}-->");
            }
            NodeKind::Element(e) => {
                out.push('<');
                out.push_str(&e.name);
                for (k, v) in &e.attrs {
                    out.push(' ');
                    out.push_str(k);
                    out.push_str("=\"");
                    escape_attr(v, out);
                    out.push('"');
                }
                out.push('>');
                if VOID_ELEMENTS.contains(&e.name.as_str()) {
                    return;
                }
                let raw = is_raw_text(&e.name);
                for &c in &self.nodes[id.index()].children {
                    self.write_node(c, raw, out);
                }
                out.push_str("</");
                out.push_str(&e.name);
                out.push('>');
            }
        }
    }

    /// Concatenated descendant text, skipping script and style contents.
    pub fn text_content(&self, id: NodeId) -> String {
        let mut out = String::new();
        self.collect_text(id, &mut out);
        out
    }

    fn collect_text(&self, id: NodeId, out: &mut String) {
        match &self.nodes[id.index()].kind {
            NodeKind::Text(t) => out.push_str(t),
            NodeKind::Element(e) if matches!(e.name.as_str(), "script" | "style" | "template") => {}
            NodeKind::Element(_) | NodeKind::Document => {
                for &c in &self.nodes[id.index()].children {
                    self.collect_text(c, out);
                    // Block boundaries separate words.
                    out.push(' ');
                }
            }
            NodeKind::Comment(_) => {}
        }
    }

    /// Ancestors of `id`, nearest first, excluding the document root.
    pub fn ancestors(&self, id: NodeId) -> Ancestors<'_> {
        Ancestors {
            doc: self,
            next: self.parent_element(id),
        }
    }
}

pub struct Ancestors<'a> {
    doc: &'a DomDocument,
    next: Option<NodeId>,
}

impl Iterator for Ancestors<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let cur = self.next?;
        self.next = self.doc.parent_element(cur);
        Some(cur)
    }
}

fn is_raw_text(name: &str) -> bool {
    RAW_TEXT_ELEMENTS.contains(&name)
}

fn escape_text(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\u{a0}' => out.push_str("&nbsp;"),
            _ => out.push(c),
        }
    }
}

fn escape_attr(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            '\u{a0}' => out.push_str("&nbsp;"),
            _ => out.push(c),
        }
    }
}
