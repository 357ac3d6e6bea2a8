//! Property values and their hashable index keys.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

/// A value stored on a node or edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum PropertyValue {
    Text(String),
    Integer(i64),
    Real(f64),
    Flag(bool),
    TextList(Vec<String>),
}

impl PropertyValue {
    pub fn type_name(&self) -> &'static str {
        match self {
            PropertyValue::Text(_) => "text",
            PropertyValue::Integer(_) => "integer",
            PropertyValue::Real(_) => "real",
            PropertyValue::Flag(_) => "flag",
            PropertyValue::TextList(_) => "text-list",
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            PropertyValue::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Rejects values the store refuses to hold: non-finite reals and empty
    /// text-list elements.
    pub fn validate(&self) -> Result<(), &'static str> {
        match self {
            PropertyValue::Real(r) if !r.is_finite() => Err("real values must be finite"),
            PropertyValue::TextList(items) if items.iter().any(String::is_empty) => {
                Err("text-list elements must be non-empty")
            }
            _ => Ok(()),
        }
    }

    /// Hashable key for scalar values; `None` for lists.
    pub fn scalar_key(&self) -> Option<ValueKey> {
        match self {
            PropertyValue::Text(s) => Some(ValueKey::Text(s.clone())),
            PropertyValue::Integer(i) => Some(ValueKey::Int(*i)),
            PropertyValue::Real(r) => ValueKey::from_real(*r),
            PropertyValue::Flag(b) => Some(ValueKey::Flag(*b)),
            PropertyValue::TextList(_) => None,
        }
    }

    /// Keys under which this value is indexed: one for scalars, one per
    /// element for text-lists.
    pub fn index_keys(&self) -> Vec<ValueKey> {
        match self {
            PropertyValue::TextList(items) => {
                items.iter().map(|s| ValueKey::Text(s.clone())).collect()
            }
            other => other.scalar_key().into_iter().collect(),
        }
    }

    /// Store-level match used by `nodes_by_label_prop`: scalar equality with
    /// numeric int/real comparison, and list membership when the stored value
    /// is a text-list and the probe is text.
    pub fn matches_probe(&self, probe: &PropertyValue) -> bool {
        match (self, probe) {
            (PropertyValue::TextList(items), PropertyValue::Text(p)) => items.iter().any(|s| s == p),
            (PropertyValue::TextList(a), PropertyValue::TextList(b)) => a == b,
            (PropertyValue::TextList(_), _) | (_, PropertyValue::TextList(_)) => false,
            (a, b) => match (a.scalar_key(), b.scalar_key()) {
                (Some(x), Some(y)) => x == y,
                _ => false,
            },
        }
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Text(s) => write!(f, "{s}"),
            PropertyValue::Integer(i) => write!(f, "{i}"),
            PropertyValue::Real(r) => write!(f, "{r:?}"),
            PropertyValue::Flag(b) => write!(f, "{b}"),
            PropertyValue::TextList(items) => write!(f, "[{}]", items.join(", ")),
        }
    }
}

impl From<&str> for PropertyValue {
    fn from(s: &str) -> Self {
        PropertyValue::Text(s.to_string())
    }
}

impl From<String> for PropertyValue {
    fn from(s: String) -> Self {
        PropertyValue::Text(s)
    }
}

impl From<i64> for PropertyValue {
    fn from(i: i64) -> Self {
        PropertyValue::Integer(i)
    }
}

impl From<f64> for PropertyValue {
    fn from(r: f64) -> Self {
        PropertyValue::Real(r)
    }
}

impl From<bool> for PropertyValue {
    fn from(b: bool) -> Self {
        PropertyValue::Flag(b)
    }
}

impl From<Vec<String>> for PropertyValue {
    fn from(items: Vec<String>) -> Self {
        PropertyValue::TextList(items)
    }
}

impl<'de> Deserialize<'de> for PropertyValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(PropertyValueVisitor)
    }
}

struct PropertyValueVisitor;

impl<'de> Visitor<'de> for PropertyValueVisitor {
    type Value = PropertyValue;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a string, 64-bit integer, finite number, boolean or list of strings")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<PropertyValue, E> {
        Ok(PropertyValue::Text(v.to_string()))
    }

    fn visit_string<E: de::Error>(self, v: String) -> Result<PropertyValue, E> {
        Ok(PropertyValue::Text(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<PropertyValue, E> {
        Ok(PropertyValue::Integer(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<PropertyValue, E> {
        i64::try_from(v)
            .map(PropertyValue::Integer)
            .map_err(|_| E::custom(format!("integer {v} does not fit in 64 signed bits")))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<PropertyValue, E> {
        Ok(PropertyValue::Real(v))
    }

    fn visit_bool<E: de::Error>(self, v: bool) -> Result<PropertyValue, E> {
        Ok(PropertyValue::Flag(v))
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<PropertyValue, A::Error> {
        let mut items = Vec::with_capacity(seq.size_hint().unwrap_or(0));
        while let Some(item) = seq.next_element::<String>()? {
            items.push(item);
        }
        Ok(PropertyValue::TextList(items))
    }
}

/// Normalized, hashable form of a scalar value.
///
/// Integral reals inside the i64 range collapse onto `Int`, so that two keys
/// are equal exactly when the values compare equal under `=`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueKey {
    Flag(bool),
    Int(i64),
    Real(u64),
    Text(String),
}

impl ValueKey {
    pub fn from_real(r: f64) -> Option<ValueKey> {
        if r.is_nan() {
            return None;
        }
        if r.fract() == 0.0 && (-9.223_372_036_854_776e18..9.223_372_036_854_776e18).contains(&r) {
            return Some(ValueKey::Int(r as i64));
        }
        Some(ValueKey::Real(r.to_bits()))
    }
}

/// Numeric comparison of an integer with a real, exact for integral reals.
pub(crate) fn cmp_int_real(i: i64, r: f64) -> Option<Ordering> {
    if r.is_nan() {
        return None;
    }
    if r.fract() == 0.0 && (-9.223_372_036_854_776e18..9.223_372_036_854_776e18).contains(&r) {
        return Some(i.cmp(&(r as i64)));
    }
    (i as f64).partial_cmp(&r)
}
