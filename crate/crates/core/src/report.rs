//! Check reports shared by every predicate.

use std::fmt;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    HorizonLimited,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::HorizonLimited => "horizon_limited",
        })
    }
}

/// Named integer indices, kept in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Witness(Vec<(String, i64)>);

impl Witness {
    pub fn new() -> Self {
        Witness(Vec::new())
    }

    pub fn with(mut self, key: &str, value: impl TryInto<i64>) -> Self {
        let v = value.try_into().unwrap_or(i64::MAX);
        self.0.push((key.to_string(), v));
        self
    }

    pub fn get(&self, key: &str) -> Option<i64> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn entries(&self) -> &[(String, i64)] {
        &self.0
    }
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub verdict: Verdict,
    pub horizon: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Parameters located by search-type checks (for example a threshold K).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub found: Option<Witness>,
    /// Smallest certified gap, as an exact decimal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckReport {
    fn base(name: &str, verdict: Verdict, horizon: usize) -> Self {
        CheckReport {
            name: name.to_string(),
            verdict,
            horizon,
            witness: None,
            found: None,
            margin: None,
            precision_bits: None,
            detail: None,
        }
    }

    pub fn holds(name: &str, horizon: usize) -> Self {
        Self::base(name, Verdict::Holds, horizon)
    }

    pub fn fails(name: &str, horizon: usize, witness: Witness) -> Self {
        let mut r = Self::base(name, Verdict::Fails, horizon);
        r.witness = Some(witness);
        r
    }

    pub fn limited(name: &str, horizon: usize, detail: impl Into<String>) -> Self {
        let mut r = Self::base(name, Verdict::HorizonLimited, horizon);
        r.detail = Some(detail.into());
        r
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn with_found(mut self, found: Witness) -> Self {
        self.found = Some(found);
        self
    }

    pub fn with_margin(mut self, margin: Option<String>, bits: u32) -> Self {
        self.margin = margin;
        self.precision_bits = Some(bits);
        self
    }

    pub fn is_holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub fn is_fails(&self) -> bool {
        self.verdict == Verdict::Fails
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} (horizon {})", self.name, self.verdict, self.horizon)?;
        if let Some(w) = &self.witness {
            write!(f, " witness: {w}")?;
        }
        if let Some(w) = &self.found {
            write!(f, " found: {w}")?;
        }
        if let Some(m) = &self.margin {
            write!(f, " margin: {}", short_decimal(m))?;
        }
        if let Some(b) = self.precision_bits {
            write!(f, " bits: {b}")?;
        }
        if let Some(d) = &self.detail {
            write!(f, " ({d})")?;
        }
        Ok(())
    }
}

/// First significant digits of a long decimal string, for text output.
pub fn short_decimal(s: &str) -> String {
    if s.len() <= 24 {
        return s.to_string();
    }
    let digits_start = s.find(|c: char| c.is_ascii_digit() && c != '0' && c != '.');
    match digits_start {
        Some(i) => format!("{}...", &s[..(i + 12).min(s.len())]),
        None => s[..24].to_string(),
    }
}
