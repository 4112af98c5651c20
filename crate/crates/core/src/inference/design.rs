use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::InferenceError;
use crate::noticemetrics::BannerObservation;

/// Model-ready view of one observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationRow {
    pub banner_exists: bool,
    /// Without the leading dot.
    pub tld: String,
    pub vpn: String,
    pub vpn_eu: bool,
    pub height: Option<f64>,
    pub words: Option<f64>,
    pub links: Option<f64>,
}

impl From<&BannerObservation> for ObservationRow {
    fn from(o: &BannerObservation) -> Self {
        ObservationRow {
            banner_exists: o.banner_exists,
            tld: o.tld.clone(),
            vpn: o.vantage_label.clone(),
            vpn_eu: o.vpn_eu,
            height: o.height_px.map(f64::from),
            words: o.word_count.map(f64::from),
            links: o.link_count.map(f64::from),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variable {
    Tld,
    Vpn,
}

impl Variable {
    fn name(self) -> &'static str {
        match self {
            Variable::Tld => "TLD",
            Variable::Vpn => "VPN",
        }
    }

    fn level(self, row: &ObservationRow) -> &str {
        match self {
            Variable::Tld => &row.tld,
            Variable::Vpn => &row.vpn,
        }
    }

    fn display_level(self, level: &str) -> String {
        match self {
            Variable::Tld => format!(".{level}"),
            Variable::Vpn => level.to_string(),
        }
    }

    fn normalize(self, level: &str) -> String {
        match self {
            Variable::Tld => level.trim_start_matches('.').to_ascii_lowercase(),
            Variable::Vpn => level.to_ascii_uppercase(),
        }
    }
}

/// Reference level of a categorical expansion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Baseline {
    Level(String),
    /// `.be` for TLD when present, otherwise the first level in sort order.
    Default,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Term {
    Categorical {
        variable: Variable,
        baseline: Baseline,
    },
    /// The vantage-inside-EU flag.
    VpnEu,
    /// 0/1 indicator of a single level, e.g. `TLD_com`.
    LevelIndicator {
        variable: Variable,
        level: String,
    },
    Interaction(Box<Term>, Box<Term>),
}

impl Term {
    fn class(&self) -> u8 {
        match self {
            Term::Categorical { .. } => 0,
            Term::VpnEu | Term::LevelIndicator { .. } => 1,
            Term::Interaction(..) => 2,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Categorical { variable, baseline } => match baseline {
                Baseline::Default => write!(f, "{}", variable.name()),
                Baseline::Level(l) => write!(f, "{}[{}]", variable.name(), l),
            },
            Term::VpnEu => write!(f, "VPN_EU"),
            Term::LevelIndicator { variable, level } => write!(f, "{}_{}", variable.name(), level),
            Term::Interaction(a, b) => write!(f, "{a}:{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub response: String,
    pub terms: Vec<Term>,
    pub intercept: bool,
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ~ ", self.response)?;
        if self.terms.is_empty() {
            return write!(f, "1");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

pub const RESPONSE: &str = "banner_exists";

fn parse_term(text: &str) -> Result<Term, InferenceError> {
    let t = text.trim();
    if t.is_empty() {
        return Err(InferenceError::FormulaSyntax("empty term".into()));
    }
    if let Some((a, b)) = t.split_once(':') {
        return Ok(Term::Interaction(
            Box::new(parse_term(a)?),
            Box::new(parse_term(b)?),
        ));
    }
    let (head, baseline) = match t.split_once('[') {
        Some((h, rest)) => {
            let level = rest
                .strip_suffix(']')
                .ok_or_else(|| InferenceError::FormulaSyntax(format!("unclosed '[' in {t:?}")))?;
            (h.trim(), Some(level.trim()))
        }
        None => (t, None),
    };
    let variable = match head {
        "TLD" | "TLDs" => Some(Variable::Tld),
        "VPN" | "VPNs" => Some(Variable::Vpn),
        _ => None,
    };
    if let Some(v) = variable {
        let baseline = match baseline {
            Some(l) => Baseline::Level(v.normalize(l)),
            None => Baseline::Default,
        };
        return Ok(Term::Categorical {
            variable: v,
            baseline,
        });
    }
    if baseline.is_some() {
        return Err(InferenceError::UnknownTerm(t.to_string()));
    }
    if head == "VPN_EU" {
        return Ok(Term::VpnEu);
    }
    for v in [Variable::Tld, Variable::Vpn] {
        if let Some(level) = head.strip_prefix(&format!("{}_", v.name())) {
            if !level.is_empty() {
                return Ok(Term::LevelIndicator {
                    variable: v,
                    level: v.normalize(level),
                });
            }
        }
    }
    Err(InferenceError::UnknownTerm(t.to_string()))
}

/// Parse `response ~ term (+ term)*`.
///
/// Terms: `TLD`, `VPN` (optionally `TLD[be]` to pick the baseline), `VPN_EU`,
/// level indicators such as `TLD_com`, and `A:B` interactions. `1` alone means
/// intercept only.
pub fn parse_formula(text: &str) -> Result<ModelSpec, InferenceError> {
    let (lhs, rhs) = text
        .split_once('~')
        .ok_or_else(|| InferenceError::FormulaSyntax(format!("missing '~' in {text:?}")))?;
    let response = lhs.trim().to_string();
    if response != RESPONSE {
        return Err(InferenceError::FormulaSyntax(format!(
            "unsupported response {response:?}; only {RESPONSE} is modelled"
        )));
    }
    let rhs = rhs.trim();
    let terms = if rhs == "1" {
        Vec::new()
    } else {
        rhs.split('+')
            .map(parse_term)
            .collect::<Result<Vec<_>, _>>()?
    };
    Ok(ModelSpec {
        response,
        terms,
        intercept: true,
    })
}

/// The five candidate models of the location-effect comparison, simplest first.
pub fn table3() -> Vec<ModelSpec> {
    [
        "banner_exists ~ VPN",
        "banner_exists ~ TLD",
        "banner_exists ~ TLD + VPN",
        "banner_exists ~ TLD + VPN_EU",
        "banner_exists ~ TLD + VPN_EU + VPN_EU:TLD_com",
    ]
    .iter()
    .map(|f| parse_formula(f).expect("preset formula parses"))
    .collect()
}

/// Named preset, or `None` when `name` is not one.
pub fn preset(name: &str) -> Option<Vec<ModelSpec>> {
    (name == "table3").then(table3)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub names: Vec<String>,
}

struct Column {
    name: String,
    values: Vec<f64>,
}

fn levels(rows: &[ObservationRow], v: Variable) -> Vec<String> {
    rows.iter()
        .map(|r| v.level(r).to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn resolve_baseline(
    rows: &[ObservationRow],
    v: Variable,
    baseline: &Baseline,
) -> Result<(String, Vec<String>), InferenceError> {
    let lv = levels(rows, v);
    let base = match baseline {
        Baseline::Level(l) => {
            if !lv.contains(l) {
                return Err(InferenceError::UnknownBaseline {
                    variable: v.name().to_string(),
                    level: l.clone(),
                });
            }
            l.clone()
        }
        Baseline::Default => {
            if v == Variable::Tld && lv.iter().any(|l| l == "be") {
                "be".to_string()
            } else {
                lv[0].clone()
            }
        }
    };
    Ok((base, lv))
}

fn term_columns(rows: &[ObservationRow], term: &Term) -> Result<Vec<Column>, InferenceError> {
    Ok(match term {
        Term::Categorical { variable, baseline } => {
            let (base, lv) = resolve_baseline(rows, *variable, baseline)?;
            lv.into_iter()
                .filter(|l| *l != base)
                .map(|l| Column {
                    name: format!("{}[{}]", variable.name(), variable.display_level(&l)),
                    values: rows
                        .iter()
                        .map(|r| f64::from(u8::from(variable.level(r) == l)))
                        .collect(),
                })
                .collect()
        }
        Term::VpnEu => vec![Column {
            name: "VPN_EU".into(),
            values: rows.iter().map(|r| f64::from(u8::from(r.vpn_eu))).collect(),
        }],
        Term::LevelIndicator { variable, level } => vec![Column {
            name: term.to_string(),
            values: rows
                .iter()
                .map(|r| f64::from(u8::from(variable.level(r) == level)))
                .collect(),
        }],
        Term::Interaction(a, b) => {
            let ca = term_columns(rows, a)?;
            let cb = term_columns(rows, b)?;
            let mut out = Vec::new();
            for x in &ca {
                for y in &cb {
                    out.push(Column {
                        name: format!("{}:{}", x.name, y.name),
                        values: x.values.iter().zip(&y.values).map(|(p, q)| p * q).collect(),
                    });
                }
            }
            out
        }
    })
}

/// X with intercept first, then categorical expansions, indicators and interactions.
pub fn build_design_matrix(
    rows: &[ObservationRow],
    spec: &ModelSpec,
) -> Result<DesignMatrix, InferenceError> {
    if rows.is_empty() {
        return Err(InferenceError::EmptyData);
    }
    let mut terms: Vec<&Term> = spec.terms.iter().collect();
    terms.sort_by_key(|t| t.class());
    let mut cols = Vec::new();
    if spec.intercept {
        cols.push(Column {
            name: "Intercept".into(),
            values: vec![1.0; rows.len()],
        });
    }
    for t in terms {
        cols.extend(term_columns(rows, t)?);
    }
    let n = rows.len();
    let x = DMatrix::from_fn(n, cols.len(), |i, j| cols[j].values[i]);
    let y = DVector::from_iterator(n, rows.iter().map(|r| f64::from(u8::from(r.banner_exists))));
    Ok(DesignMatrix {
        x,
        y,
        names: cols.into_iter().map(|c| c.name).collect(),
    })
}
