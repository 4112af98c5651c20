//! HTML parsing and CSS-selector evaluation for locating banner candidates.

mod banner;
mod dom;
mod matching;
mod selector;

pub use banner::{
    inline_px, match_banners, BannerDetector, BannerMatch, LayoutBox, LayoutProvider, SelectorStats,
};
pub use dom::{parse_html, Ancestors, DomDocument, ElementData, Node, NodeId, NodeKind};
pub use matching::{matches, query, DomIndex};
pub use selector::{
    parse_selector, AttrOp, AttrSelector, Combinator, ComplexSelector, CompoundSelector,
    SelectorAst, SimpleSelector, Unsupported,
};
