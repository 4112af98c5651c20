//! A hand-picked slice of the public suffix list and the longest-match rule.

/// Plain rules only; no wildcards or exceptions.
pub const SUFFIXES: [&str; 22] = [
    "com", "net", "org", "nl", "de", "fr", "be", "at", "it", "es", "ca", "uk", "co.uk", "org.uk",
    "ac.uk", "au", "com.au", "jp", "co.jp", "ch", "se", "dk",
];

/// Longest matching listed suffix plus one label; unknown suffixes give the last two labels.
pub fn registrable(host: &str) -> String {
    let labels: Vec<&str> = host.split('.').collect();
    for take in (1..labels.len()).rev() {
        let suffix = labels[labels.len() - take..].join(".");
        if SUFFIXES.contains(&suffix.as_str()) {
            return labels[labels.len() - take - 1..].join(".");
        }
    }
    labels[labels.len().saturating_sub(2)..].join(".")
}
