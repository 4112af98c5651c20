use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::dom::{DomDocument, NodeId};
use super::matching::DomIndex;
use super::selector::{parse_selector, SelectorAst, Unsupported};
use crate::filterlist::RuleSet;

/// Rendered box of an element in CSS pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutBox {
    pub x: i64,
    pub y: i64,
    pub width: u32,
    pub height: u32,
}

/// Source of true rendered geometry, e.g. a browser-automation backend.
pub trait LayoutProvider {
    fn layout_box(&self, node: NodeId) -> Option<LayoutBox>;
}

impl<F> LayoutProvider for F
where
    F: Fn(NodeId) -> Option<LayoutBox>,
{
    fn layout_box(&self, node: NodeId) -> Option<LayoutBox> {
        self(node)
    }
}

/// One element matched by a hide rule. `None` geometry means Unknown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BannerMatch {
    pub node_id: NodeId,
    pub selector_text: String,
    pub height_px: Option<u32>,
    pub width_px: Option<u32>,
    pub offset_x: Option<i64>,
    pub offset_y: Option<i64>,
    pub inner_html: String,
    /// Some ancestor (or the element) carries inline `display:none`.
    pub has_hidden_ancestor_hint: bool,
}

/// Counts of list selectors the matcher could not evaluate.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SelectorStats {
    pub compiled: usize,
    pub unsupported: usize,
    pub unsupported_by_reason: BTreeMap<String, usize>,
}

/// A rule set with every selector pre-parsed; immutable and `Sync`.
pub struct BannerDetector<'r> {
    ruleset: &'r RuleSet,
    compiled: HashMap<&'r str, Result<SelectorAst, Unsupported>>,
}

impl<'r> BannerDetector<'r> {
    pub fn new(ruleset: &'r RuleSet) -> Self {
        let mut compiled = HashMap::with_capacity(ruleset.rules.len());
        for rule in &ruleset.rules {
            compiled
                .entry(rule.selector_text.as_str())
                .or_insert_with(|| parse_selector(&rule.selector_text));
        }
        BannerDetector { ruleset, compiled }
    }

    pub fn ruleset(&self) -> &'r RuleSet {
        self.ruleset
    }

    pub fn selector_stats(&self) -> SelectorStats {
        let mut stats = SelectorStats::default();
        for r in self.compiled.values() {
            match r {
                Ok(_) => stats.compiled += 1,
                Err(u) => {
                    stats.unsupported += 1;
                    let key = match u {
                        Unsupported::Syntax(_) => "syntax".to_string(),
                        Unsupported::PseudoClass(_) => "pseudo-class".to_string(),
                        Unsupported::AttributeOperator(_) => "attribute operator".to_string(),
                        other => other.to_string(),
                    };
                    *stats.unsupported_by_reason.entry(key).or_default() += 1;
                }
            }
        }
        stats
    }

    /// All elements matched by the selectors active on `domain`, by node id.
    ///
    /// Nested matches are all reported; consolidation happens downstream.
    pub fn detect(
        &self,
        doc: &DomDocument,
        domain: &str,
        layout: Option<&dyn LayoutProvider>,
    ) -> Vec<BannerMatch> {
        let index = DomIndex::new(doc);
        let mut first_selector: BTreeMap<NodeId, &str> = BTreeMap::new();
        for selector in self.ruleset.rules_for_domain(domain) {
            let Some(Ok(ast)) = self.compiled.get(selector) else {
                continue;
            };
            for node in index.query(ast) {
                first_selector.entry(node).or_insert(selector);
            }
        }
        first_selector
            .into_iter()
            .map(|(node, selector)| build_match(doc, node, selector, layout))
            .collect()
    }
}

/// One-shot form of [`BannerDetector::detect`].
pub fn match_banners(
    doc: &DomDocument,
    ruleset: &RuleSet,
    domain: &str,
    layout: Option<&dyn LayoutProvider>,
) -> Vec<BannerMatch> {
    BannerDetector::new(ruleset).detect(doc, domain, layout)
}

fn build_match(
    doc: &DomDocument,
    node: NodeId,
    selector: &str,
    layout: Option<&dyn LayoutProvider>,
) -> BannerMatch {
    let geometry = layout.and_then(|l| l.layout_box(node));
    let (height_px, width_px, offset_x, offset_y) = match geometry {
        Some(b) => (Some(b.height), Some(b.width), Some(b.x), Some(b.y)),
        None => {
            let style = doc.element(node).and_then(|e| e.attr("style"));
            let height =
                style.and_then(|s| inline_px(s, "height").or_else(|| inline_px(s, "min-height")));
            let width = style.and_then(|s| inline_px(s, "width"));
            (height, width, None, None)
        }
    };
    let hidden = std::iter::once(node)
        .chain(doc.ancestors(node))
        .filter_map(|id| doc.element(id).and_then(|e| e.attr("style")))
        .any(is_display_none);
    BannerMatch {
        node_id: node,
        selector_text: selector.to_string(),
        height_px,
        width_px,
        offset_x,
        offset_y,
        inner_html: doc.inner_html(node),
        has_hidden_ancestor_hint: hidden,
    }
}

fn declarations(style: &str) -> impl Iterator<Item = (String, &str)> {
    style.split(';').filter_map(|decl| {
        let (k, v) = decl.split_once(':')?;
        Some((k.trim().to_ascii_lowercase(), v.trim()))
    })
}

/// `N` from an inline `prop: Npx` declaration; the last declaration wins.
pub fn inline_px(style: &str, property: &str) -> Option<u32> {
    let mut found = None;
    for (k, v) in declarations(style) {
        if k != property {
            continue;
        }
        let v = v.trim_end_matches("!important").trim();
        found = v
            .strip_suffix("px")
            .and_then(|n| n.trim().parse::<f64>().ok())
            .filter(|n| n.is_finite() && *n >= 0.0)
            .map(|n| n.round() as u32);
    }
    found
}

fn is_display_none(style: &str) -> bool {
    declarations(style).any(|(k, v)| {
        k == "display"
            && v.trim_end_matches("!important")
                .trim()
                .eq_ignore_ascii_case("none")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterlist::load_list;

    #[test]
    fn single_generic_rule() {
        let rs = load_list("###cookieNotice");
        let doc =
            DomDocument::parse("<div id=cookieNotice style='height: 86px'>We use cookies</div>");
        let m = match_banners(&doc, &rs, "example.nl", None);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].selector_text, "#cookieNotice");
        assert_eq!(m[0].height_px, Some(86));
        assert_eq!(m[0].width_px, None);
        assert_eq!(m[0].offset_y, None);
        assert_eq!(m[0].inner_html, "We use cookies");
    }

    #[test]
    fn nested_matches_all_reported() {
        let rs = load_list("###cookie-outer\n##.cookie-inner");
        let doc =
            DomDocument::parse("<div id=cookie-outer><div class=cookie-inner>Cookies!</div></div>");
        let m = match_banners(&doc, &rs, "a.nl", None);
        assert_eq!(m.len(), 2);
        assert!(m[0].node_id < m[1].node_id);
    }

    #[test]
    fn dedup_by_node_keeps_first_rule() {
        let rs = load_list("##.bar\n###cookie\n##div");
        let doc = DomDocument::parse("<div id=cookie class=bar></div>");
        let m = match_banners(&doc, &rs, "a.nl", None);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].selector_text, ".bar");
    }

    #[test]
    fn unsupported_selectors_counted_not_matched() {
        let rs = load_list("##div::before\n##.ok\n##a + b");
        let det = BannerDetector::new(&rs);
        let stats = det.selector_stats();
        assert_eq!(stats.compiled, 1);
        assert_eq!(stats.unsupported, 2);
    }

    #[test]
    fn layout_provider_wins_over_inline_style() {
        let rs = load_list("##.c");
        let doc = DomDocument::parse("<div class=c style='height:10px'></div>");
        let layout = |_: NodeId| {
            Some(LayoutBox {
                x: 0,
                y: 614,
                width: 1366,
                height: 86,
            })
        };
        let m = match_banners(&doc, &rs, "a.nl", Some(&layout));
        assert_eq!(m[0].height_px, Some(86));
        assert_eq!(m[0].offset_y, Some(614));
    }

    #[test]
    fn inline_height_parsing() {
        assert_eq!(inline_px("height:120px", "height"), Some(120));
        assert_eq!(
            inline_px("min-height: 40.4px !important", "min-height"),
            Some(40)
        );
        assert_eq!(inline_px("height: 50%", "height"), None);
        assert_eq!(inline_px("max-height: 50px", "height"), None);
        assert_eq!(inline_px("height:1px;height:2px", "height"), Some(2));
    }

    #[test]
    fn hidden_ancestor_hint() {
        let rs = load_list("##.c");
        let doc =
            DomDocument::parse("<div style='display: none'><p class=c></p></div><p class=c></p>");
        let m = match_banners(&doc, &rs, "a.nl", None);
        assert!(m[0].has_hidden_ancestor_hint);
        assert!(!m[1].has_hidden_ancestor_hint);
    }

    #[test]
    fn scoped_rules_follow_domain() {
        let rs = load_list("nu.nl##.c\n##.g");
        let doc = DomDocument::parse("<p class=c></p><p class=g></p>");
        assert_eq!(match_banners(&doc, &rs, "www.nu.nl", None).len(), 2);
        assert_eq!(match_banners(&doc, &rs, "ad.nl", None).len(), 1);
    }
}
