use serde::{Deserialize, Serialize};

/// The fifteen EU member states whose sites and vantage points carry `VPN_EU = 1`.
pub const EU_MEMBERS: [&str; 15] = [
    "AT", "BE", "CZ", "DE", "ES", "FR", "GR", "HU", "IT", "NL", "PL", "PT", "RO", "SE", "UK",
];

/// Whether an ISO country label belongs to [`EU_MEMBERS`]; `GB` is read as `UK`.
pub fn is_eu_member(label: &str) -> bool {
    let up = label.to_ascii_uppercase();
    let up = if up == "GB" { "UK".to_string() } else { up };
    EU_MEMBERS.contains(&up.as_str())
}

/// A country egress: requests go through `proxy_url` with `accept_language`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VantagePoint {
    pub label: String,
    pub proxy_url: Option<String>,
    pub accept_language: String,
    pub eu_member: bool,
}

impl VantagePoint {
    pub fn new(label: &str, proxy_url: Option<String>, accept_language: &str) -> Self {
        VantagePoint {
            label: label.to_ascii_uppercase(),
            proxy_url,
            accept_language: accept_language.to_string(),
            eu_member: is_eu_member(label),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership() {
        assert!(is_eu_member("nl"));
        assert!(is_eu_member("GB"));
        assert!(!is_eu_member("CH"));
        assert!(!is_eu_member("US"));
        assert!(!is_eu_member("CA"));
        assert!(VantagePoint::new("de", None, "de-DE").eu_member);
    }
}
