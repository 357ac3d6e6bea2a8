//! Runtime values and the comparison rules shared by the executor and the
//! reference interpreter.

use std::cmp::Ordering;
use std::fmt;

use serde_json::json;

use super::ast::CmpOp;
use crate::graph::{cmp_int_real, Node, NodeId, Properties, PropertyValue, ValueKey};

/// A node projected into a result row.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeValue {
    pub id: NodeId,
    pub labels: Vec<String>,
    pub properties: Properties,
}

impl NodeValue {
    pub fn from_node(node: &Node) -> Self {
        NodeValue {
            id: node.id,
            labels: node.labels.iter().map(|l| l.to_string()).collect(),
            properties: node.properties.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Real(f64),
    Text(String),
    List(Vec<String>),
    Node(NodeValue),
}

impl Value {
    pub fn from_property(p: &PropertyValue) -> Value {
        match p {
            PropertyValue::Text(s) => Value::Text(s.clone()),
            PropertyValue::Integer(i) => Value::Int(*i),
            PropertyValue::Real(r) => Value::Real(*r),
            PropertyValue::Flag(b) => Value::Bool(*b),
            PropertyValue::TextList(items) => Value::List(items.clone()),
        }
    }

    /// Storable form; `None` for null and nodes.
    pub fn to_property(&self) -> Option<PropertyValue> {
        match self {
            Value::Text(s) => Some(PropertyValue::Text(s.clone())),
            Value::Int(i) => Some(PropertyValue::Integer(*i)),
            Value::Real(r) => Some(PropertyValue::Real(*r)),
            Value::Bool(b) => Some(PropertyValue::Flag(*b)),
            Value::List(items) => Some(PropertyValue::TextList(items.clone())),
            Value::Null | Value::Node(_) => None,
        }
    }

    /// Decodes a query parameter from JSON.
    pub fn from_json(v: &serde_json::Value) -> Result<Value, String> {
        Ok(match v {
            serde_json::Value::Null => Value::Null,
            serde_json::Value::Bool(b) => Value::Bool(*b),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Value::Int(i)
                } else if n.is_u64() {
                    return Err(format!("integer {n} does not fit in 64 signed bits"));
                } else {
                    Value::Real(n.as_f64().ok_or_else(|| format!("unsupported number {n}"))?)
                }
            }
            serde_json::Value::String(s) => Value::Text(s.clone()),
            serde_json::Value::Array(items) => Value::List(
                items
                    .iter()
                    .map(|i| i.as_str().map(str::to_string).ok_or("list parameters must hold strings only"))
                    .collect::<Result<_, _>>()?,
            ),
            serde_json::Value::Object(_) => return Err("map parameters are not supported".into()),
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Null => serde_json::Value::Null,
            Value::Bool(b) => json!(b),
            Value::Int(i) => json!(i),
            Value::Real(r) => serde_json::Number::from_f64(*r).map_or(serde_json::Value::Null, Into::into),
            Value::Text(s) => json!(s),
            Value::List(items) => json!(items),
            Value::Node(n) => json!({
                "id": n.id,
                "labels": n.labels,
                "properties": n.properties,
            }),
        }
    }

    /// Query-text rendering, as used in plan descriptions.
    pub fn to_literal(&self) -> String {
        match self {
            Value::Text(s) => format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'")),
            Value::Real(r) => format!("{r:?}"),
            other => other.to_string(),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Null => 0,
            Value::Bool(_) => 1,
            Value::Int(_) | Value::Real(_) => 2,
            Value::Text(_) => 3,
            Value::List(_) => 4,
            Value::Node(_) => 5,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("null"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r:?}"),
            Value::Text(s) => f.write_str(s),
            Value::List(items) => write!(f, "[{}]", items.join(", ")),
            Value::Node(n) => {
                write!(f, "(#{}", n.id)?;
                for l in &n.labels {
                    write!(f, ":{l}")?;
                }
                if !n.properties.is_empty() {
                    let props: Vec<String> = n.properties.iter().map(|(k, v)| format!("{k}: {v}")).collect();
                    write!(f, " {{{}}}", props.join(", "))?;
                }
                f.write_str(")")
            }
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<f64> for Value {
    fn from(r: f64) -> Self {
        Value::Real(r)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

// ── Comparison semantics ────────────────────────────────────────────────────

fn numeric_cmp(a: &Value, b: &Value) -> Option<Ordering> {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => Some(x.cmp(y)),
        (Value::Real(x), Value::Real(y)) => x.partial_cmp(y),
        (Value::Int(x), Value::Real(y)) => cmp_int_real(*x, *y),
        (Value::Real(x), Value::Int(y)) => cmp_int_real(*y, *x).map(Ordering::reverse),
        _ => None,
    }
}

/// `=` with the simplified null rules: `None` when the operands are not
/// comparable (null, mismatched types, NaN).
pub fn equals(a: &Value, b: &Value) -> Option<bool> {
    match (a, b) {
        (Value::Bool(x), Value::Bool(y)) => Some(x == y),
        (Value::Text(x), Value::Text(y)) => Some(x == y),
        (Value::List(x), Value::List(y)) => Some(x == y),
        _ => numeric_cmp(a, b).map(|o| o == Ordering::Equal),
    }
}

/// Ordering for `<`, `<=`, `>`, `>=`. Lists, nulls and nodes are unordered.
pub fn order(a: &Value, b: &Value) -> Option<Ordering> {
    match (a, b) {
        (Value::Bool(x), Value::Bool(y)) => Some(x.cmp(y)),
        (Value::Text(x), Value::Text(y)) => Some(x.cmp(y)),
        _ => numeric_cmp(a, b),
    }
}

/// Evaluates one comparison. Anything not comparable is false.
pub fn compare(op: CmpOp, a: &Value, b: &Value) -> bool {
    match op {
        CmpOp::Eq => equals(a, b) == Some(true),
        CmpOp::Ne => equals(a, b) == Some(false),
        CmpOp::Lt => order(a, b) == Some(Ordering::Less),
        CmpOp::Le => matches!(order(a, b), Some(Ordering::Less | Ordering::Equal)),
        CmpOp::Gt => order(a, b) == Some(Ordering::Greater),
        CmpOp::Ge => matches!(order(a, b), Some(Ordering::Greater | Ordering::Equal)),
        CmpOp::Contains => match (a, b) {
            (Value::Text(x), Value::Text(y)) => x.contains(y.as_str()),
            _ => false,
        },
        CmpOp::StartsWith => match (a, b) {
            (Value::Text(x), Value::Text(y)) => x.starts_with(y.as_str()),
            _ => false,
        },
    }
}

/// Total order used for ORDER BY, grouping and row sorting:
/// null < booleans < numbers < text < lists < nodes. Numerically equal
/// integers sort before reals; NaN sorts after every other number.
pub fn total_cmp(a: &Value, b: &Value) -> Ordering {
    let by_rank = a.rank().cmp(&b.rank());
    if by_rank != Ordering::Equal {
        return by_rank;
    }
    match (a, b) {
        (Value::Null, Value::Null) => Ordering::Equal,
        (Value::Bool(x), Value::Bool(y)) => x.cmp(y),
        (Value::Text(x), Value::Text(y)) => x.cmp(y),
        (Value::List(x), Value::List(y)) => x.cmp(y),
        (Value::Node(x), Value::Node(y)) => x.id.cmp(&y.id),
        _ => {
            let a_nan = matches!(a, Value::Real(r) if r.is_nan());
            let b_nan = matches!(b, Value::Real(r) if r.is_nan());
            match (a_nan, b_nan) {
                (true, true) => Ordering::Equal,
                (true, false) => Ordering::Greater,
                (false, true) => Ordering::Less,
                (false, false) => numeric_cmp(a, b)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| matches!(a, Value::Real(_)).cmp(&matches!(b, Value::Real(_)))),
            }
        }
    }
}

/// Lexicographic row comparison under [`total_cmp`].
pub fn row_cmp(a: &[Value], b: &[Value]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = total_cmp(x, y);
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// Hash key such that two values share a key exactly when `=` holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum JoinKey {
    Scalar(ValueKey),
    List(Vec<String>),
}

pub fn join_key(v: &Value) -> Option<JoinKey> {
    match v {
        Value::Bool(b) => Some(JoinKey::Scalar(ValueKey::Flag(*b))),
        Value::Int(i) => Some(JoinKey::Scalar(ValueKey::Int(*i))),
        Value::Real(r) => ValueKey::from_real(*r).map(JoinKey::Scalar),
        Value::Text(s) => Some(JoinKey::Scalar(ValueKey::Text(s.clone()))),
        Value::List(items) => Some(JoinKey::List(items.clone())),
        Value::Null | Value::Node(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mismatched_types_compare_false() {
        for op in [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Ge, CmpOp::Contains] {
            assert!(!compare(op, &Value::Text("1".into()), &Value::Int(1)), "{op}");
            assert!(!compare(op, &Value::Null, &Value::Null), "{op}");
        }
        assert!(!compare(CmpOp::Eq, &Value::List(vec!["a".into()]), &Value::Text("a".into())));
    }

    #[test]
    fn numbers_compare_across_int_and_real() {
        assert!(compare(CmpOp::Eq, &Value::Int(3), &Value::Real(3.0)));
        assert!(compare(CmpOp::Lt, &Value::Int(3), &Value::Real(3.5)));
        assert!(compare(CmpOp::Ne, &Value::Real(2.5), &Value::Int(2)));
        assert_eq!(join_key(&Value::Int(3)), join_key(&Value::Real(3.0)));
        assert_ne!(join_key(&Value::Int(3)), join_key(&Value::Real(3.5)));
    }

    #[test]
    fn total_order_ranks_types() {
        let mut vals = vec![
            Value::List(vec!["x".into()]),
            Value::Text("a".into()),
            Value::Real(1.0),
            Value::Int(1),
            Value::Bool(true),
            Value::Null,
            Value::Int(-4),
        ];
        vals.sort_by(total_cmp);
        assert_eq!(
            vals,
            vec![
                Value::Null,
                Value::Bool(true),
                Value::Int(-4),
                Value::Int(1),
                Value::Real(1.0),
                Value::Text("a".into()),
                Value::List(vec!["x".into()]),
            ]
        );
    }

    #[test]
    fn json_parameters() {
        assert_eq!(Value::from_json(&json!(5)).unwrap(), Value::Int(5));
        assert_eq!(Value::from_json(&json!(5.5)).unwrap(), Value::Real(5.5));
        assert_eq!(Value::from_json(&json!(["a"])).unwrap(), Value::List(vec!["a".into()]));
        assert!(Value::from_json(&json!({"a": 1})).is_err());
        assert!(Value::from_json(&json!([1])).is_err());
    }
}
