//! Cosmetic filter-list parsing and per-domain selector resolution.
//!
//! Supported grammar is the content-blocker cosmetic subset:
//!
//! ```text
//! ##selector                 generic hide
//! a.com,b.org##selector      scoped hide
//! ~a.com##selector           hide everywhere except a.com
//! a.com#@#selector           exception (unhide) for a.com
//! ! comment
//! ```
//!
//! Everything else (network rules, scriptlets, procedural and extended CSS
//! rules) is counted and skipped, never guessed at.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// A single domain entry of a scoped rule, e.g. `nu.nl` or `~ad.nu.nl`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DomainPattern {
    pub domain: String,
    pub negated: bool,
}

impl DomainPattern {
    /// Label-suffix match: `www.nu.nl` matches `nu.nl`, `u.nl` does not.
    pub fn matches(&self, host: &str) -> bool {
        domain_matches(&self.domain, host)
    }
}

/// True when `host` equals `pattern` or is a subdomain of it.
pub fn domain_matches(pattern: &str, host: &str) -> bool {
    if host.len() == pattern.len() {
        return host == pattern;
    }
    host.len() > pattern.len()
        && host.ends_with(pattern)
        && host.as_bytes()[host.len() - pattern.len() - 1] == b'.'
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scope {
    Generic,
    DomainScoped(Vec<DomainPattern>),
}

impl Scope {
    /// Whether a rule with this scope is active on `host`.
    ///
    /// A scoped rule with only negated entries applies everywhere except the
    /// negated domains; otherwise it needs a positive match and no negated one.
    pub fn applies_to(&self, host: &str) -> bool {
        match self {
            Scope::Generic => true,
            Scope::DomainScoped(patterns) => {
                let mut has_positive = false;
                let mut positive_hit = false;
                for p in patterns {
                    if p.negated {
                        if p.matches(host) {
                            return false;
                        }
                    } else {
                        has_positive = true;
                        positive_hit |= p.matches(host);
                    }
                }
                !has_positive || positive_hit
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    Hide,
    Exception,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterRule {
    pub scope: Scope,
    pub selector_text: String,
    pub kind: RuleKind,
}

impl fmt::Display for FilterRule {
    /// Canonical list syntax; reparsing the output yields an identical rule.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Scope::DomainScoped(patterns) = &self.scope {
            for (i, p) in patterns.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                if p.negated {
                    f.write_str("~")?;
                }
                f.write_str(&p.domain)?;
            }
        }
        let sep = match self.kind {
            RuleKind::Hide => "##",
            RuleKind::Exception => "#@#",
        };
        write!(f, "{sep}{}", self.selector_text)
    }
}

/// Why a line was not turned into a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// Request-blocking rule without a cosmetic separator.
    NetworkRule,
    /// `#?#`, `#@?#` extended CSS rules.
    ExtendedCss,
    /// `#$#` style injection or `:style(...)`.
    StyleInjection,
    /// `##+js(...)`, `#%#` and other script actions.
    Scriptlet,
    /// `##^...` HTML filtering.
    HtmlFilter,
    /// Procedural operators such as `:has-text()` or `:-abp-has()`.
    ProceduralSelector,
    /// Entity domains (`google.*`).
    EntityDomain,
    /// Empty selector, empty or invalid domain entry.
    Malformed,
}

impl SkipReason {
    pub fn is_malformed(self) -> bool {
        self == SkipReason::Malformed
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedLine {
    Rule(FilterRule),
    Skip(SkipReason),
    Comment,
}

const PROCEDURAL_MARKERS: &[&str] = &[
    ":has-text(",
    ":contains(",
    ":-abp-",
    ":xpath(",
    ":matches-css",
    ":upward(",
    ":remove(",
    ":min-text-length(",
    ":watch-attr(",
    ":matches-path(",
    ":if(",
    ":if-not(",
    ":nth-ancestor(",
    ":others(",
];

/// Classify one list line (without trailing newline; a trailing `\r` is tolerated).
pub fn parse_rule(line: &str) -> ParsedLine {
    let line = line.trim();
    if line.is_empty() || line.starts_with('!') || (line.starts_with('[') && line.ends_with(']')) {
        return ParsedLine::Comment;
    }

    let Some(hash) = line.find('#') else {
        return ParsedLine::Skip(SkipReason::NetworkRule);
    };
    let (domains, rest) = line.split_at(hash);

    let (kind, selector) = if let Some(s) = rest.strip_prefix("#@#") {
        (RuleKind::Exception, s)
    } else if let Some(s) = rest.strip_prefix("##") {
        (RuleKind::Hide, s)
    } else if rest.starts_with("#?#") || rest.starts_with("#@?#") {
        return ParsedLine::Skip(SkipReason::ExtendedCss);
    } else if rest.starts_with("#$#") || rest.starts_with("#@$#") {
        return ParsedLine::Skip(SkipReason::StyleInjection);
    } else if rest.starts_with("#%#") || rest.starts_with("#@%#") {
        return ParsedLine::Skip(SkipReason::Scriptlet);
    } else {
        // A '#' inside a network rule (URL fragment) or an unknown marker.
        return ParsedLine::Skip(SkipReason::NetworkRule);
    };

    let selector = selector.trim();
    if selector.is_empty() {
        return ParsedLine::Skip(SkipReason::Malformed);
    }
    if selector.starts_with("+js(") || selector.starts_with("script:") {
        return ParsedLine::Skip(SkipReason::Scriptlet);
    }
    if selector.starts_with('^') {
        return ParsedLine::Skip(SkipReason::HtmlFilter);
    }
    if selector.contains(":style(") {
        return ParsedLine::Skip(SkipReason::StyleInjection);
    }
    if PROCEDURAL_MARKERS.iter().any(|m| selector.contains(m)) {
        return ParsedLine::Skip(SkipReason::ProceduralSelector);
    }

    let scope = if domains.is_empty() {
        Scope::Generic
    } else {
        match parse_domains(domains) {
            Ok(patterns) => Scope::DomainScoped(patterns),
            Err(reason) => return ParsedLine::Skip(reason),
        }
    };

    ParsedLine::Rule(FilterRule {
        scope,
        selector_text: selector.to_string(),
        kind,
    })
}

fn parse_domains(list: &str) -> Result<Vec<DomainPattern>, SkipReason> {
    let mut out = Vec::new();
    for entry in list.split(',') {
        let entry = entry.trim();
        let (negated, name) = match entry.strip_prefix('~') {
            Some(n) => (true, n),
            None => (false, entry),
        };
        if name.ends_with(".*") {
            return Err(SkipReason::EntityDomain);
        }
        if name.is_empty()
            || name.starts_with('.')
            || name.ends_with('.')
            || name.contains("..")
            || !name
                .chars()
                .all(|c| c.is_alphanumeric() || c == '-' || c == '.' || c == '_')
        {
            return Err(SkipReason::Malformed);
        }
        out.push(DomainPattern {
            domain: name.to_lowercase(),
            negated,
        });
    }
    Ok(out)
}

/// Per-list line accounting. `parsed + skipped + malformed + comments`
/// always equals the number of input lines.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListStats {
    pub parsed: usize,
    pub skipped: usize,
    pub malformed: usize,
    pub comments: usize,
    #[serde(skip)]
    pub skipped_by_reason: BTreeMap<SkipReason, usize>,
}

impl ListStats {
    pub fn total_lines(&self) -> usize {
        self.parsed + self.skipped + self.malformed + self.comments
    }
}

/// The immutable result of loading a list; shareable across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<FilterRule>,
    pub stats: ListStats,
    pub source_version: String,
}

/// Parse a whole list. Never fails; bad lines are counted.
pub fn load_list(text: &str) -> RuleSet {
    let mut rules = Vec::new();
    let mut stats = ListStats::default();
    let mut version = None;

    for line in text.lines() {
        match parse_rule(line) {
            ParsedLine::Rule(rule) => {
                stats.parsed += 1;
                rules.push(rule);
            }
            ParsedLine::Skip(reason) => {
                if reason.is_malformed() {
                    stats.malformed += 1;
                } else {
                    stats.skipped += 1;
                }
                *stats.skipped_by_reason.entry(reason).or_default() += 1;
            }
            ParsedLine::Comment => {
                stats.comments += 1;
                if version.is_none() {
                    version = header_version(line);
                }
            }
        }
    }

    RuleSet {
        rules,
        stats,
        source_version: version.unwrap_or_else(|| "unversioned".to_string()),
    }
}

fn header_version(line: &str) -> Option<String> {
    let body = line.trim().strip_prefix('!')?.trim();
    for key in ["Version:", "Last modified:"] {
        if let Some(v) = body.strip_prefix(key) {
            let v = v.trim();
            if !v.is_empty() {
                return Some(v.to_string());
            }
        }
    }
    None
}

impl RuleSet {
    /// Selectors active on `domain`, in list order, first occurrence kept.
    ///
    /// `domain` must be lowercase without scheme or port.
    pub fn rules_for_domain(&self, domain: &str) -> Vec<&str> {
        let cancelled: HashSet<&str> = self
            .rules
            .iter()
            .filter(|r| r.kind == RuleKind::Exception && r.scope.applies_to(domain))
            .map(|r| r.selector_text.as_str())
            .collect();

        let mut seen = HashSet::new();
        self.rules
            .iter()
            .filter(|r| r.kind == RuleKind::Hide)
            .filter(|r| !cancelled.contains(r.selector_text.as_str()))
            .filter(|r| r.scope.applies_to(domain))
            .map(|r| r.selector_text.as_str())
            .filter(|s| seen.insert(*s))
            .collect()
    }

    pub fn hide_rule_count(&self) -> usize {
        self.rules
            .iter()
            .filter(|r| r.kind == RuleKind::Hide)
            .count()
    }
}

/// Free-function form of [`RuleSet::rules_for_domain`].
pub fn rules_for_domain<'a>(ruleset: &'a RuleSet, domain: &str) -> Vec<&'a str> {
    ruleset.rules_for_domain(domain)
}
