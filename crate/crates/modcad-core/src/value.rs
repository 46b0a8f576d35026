//! Field values stored in parameter-set records and general parameters.

use crate::error::{Error, Result};
use crate::geom::fmt_mm;
use crate::schema::FieldKind;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    UInt(u64),
    Int(i64),
    /// Fixed-point decimal; stored quantized to the field's scale.
    Fixed(f64),
    Text(String),
    Flag(bool),
    /// Index into the target list, `None` only for optional references.
    Ref(Option<u32>),
    /// Index into the enum's label table.
    Enum(u32),
}

impl Value {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::UInt(_) => "uint",
            Value::Int(_) => "int",
            Value::Fixed(_) => "fixed",
            Value::Text(_) => "text",
            Value::Flag(_) => "flag",
            Value::Ref(_) => "ref",
            Value::Enum(_) => "enum",
        }
    }

    pub fn matches(&self, kind: &FieldKind) -> bool {
        matches!(
            (self, kind),
            (Value::UInt(_), FieldKind::UInt { .. })
                | (Value::Int(_), FieldKind::Int { .. })
                | (Value::Fixed(_), FieldKind::Fixed { .. })
                | (Value::Text(_), FieldKind::Text)
                | (Value::Flag(_), FieldKind::Flag)
                | (Value::Ref(_), FieldKind::Ref { .. })
                | (Value::Enum(_), FieldKind::Enum { .. })
        )
    }

    /// Store-normalized copy: fixed-point values snap to the field scale so
    /// the stored value always equals its serialized image.
    pub fn normalized(&self, kind: &FieldKind) -> Value {
        match (self, kind) {
            (Value::Fixed(v), FieldKind::Fixed { scale, .. }) => {
                Value::Fixed((v / scale).round() * scale)
            }
            _ => self.clone(),
        }
    }

    pub fn as_uint(&self) -> Option<u64> {
        match self {
            Value::UInt(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_fixed(&self) -> Option<f64> {
        match self {
            Value::Fixed(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_flag(&self) -> Option<bool> {
        match self {
            Value::Flag(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_ref_index(&self) -> Option<Option<u32>> {
        match self {
            Value::Ref(r) => Some(*r),
            _ => None,
        }
    }

    pub fn as_enum(&self) -> Option<u32> {
        match self {
            Value::Enum(v) => Some(*v),
            _ => None,
        }
    }

    /// Parse a script token into a value of the given kind. Enums accept
    /// labels or numeric indices; optional refs accept "-" for null.
    pub fn parse(token: &str, kind: &FieldKind) -> Result<Value> {
        let bad = |msg: &str| Error::BadArgument(format!("\"{token}\": {msg}"));
        match kind {
            FieldKind::UInt { .. } => token
                .parse::<u64>()
                .map(Value::UInt)
                .map_err(|_| bad("expected unsigned integer")),
            FieldKind::Int { .. } => token
                .parse::<i64>()
                .map(Value::Int)
                .map_err(|_| bad("expected integer")),
            FieldKind::Fixed { .. } => token
                .parse::<f64>()
                .map(Value::Fixed)
                .map_err(|_| bad("expected decimal number")),
            FieldKind::Text => Ok(Value::Text(token.to_string())),
            FieldKind::Flag => match token {
                "true" | "1" | "on" => Ok(Value::Flag(true)),
                "false" | "0" | "off" => Ok(Value::Flag(false)),
                _ => Err(bad("expected flag (true/false)")),
            },
            FieldKind::Ref { optional, .. } => {
                if token == "-" || token.eq_ignore_ascii_case("null") {
                    if *optional {
                        Ok(Value::Ref(None))
                    } else {
                        Err(bad("reference is not optional"))
                    }
                } else {
                    token
                        .parse::<u32>()
                        .map(|i| Value::Ref(Some(i)))
                        .map_err(|_| bad("expected record index"))
                }
            }
            FieldKind::Enum { labels, .. } => {
                if let Some(idx) = labels.iter().position(|l| l == token) {
                    return Ok(Value::Enum(idx as u32));
                }
                token
                    .parse::<u32>()
                    .ok()
                    .filter(|i| (*i as usize) < labels.len())
                    .map(Value::Enum)
                    .ok_or_else(|| bad("expected enum label"))
            }
        }
    }

    /// Stable display used by dumps; `kind` resolves enum labels.
    pub fn display(&self, kind: &FieldKind) -> String {
        match (self, kind) {
            (Value::Enum(i), FieldKind::Enum { labels, .. }) => labels
                .get(*i as usize)
                .cloned()
                .unwrap_or_else(|| i.to_string()),
            _ => self.to_string(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::UInt(v) => write!(f, "{v}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Fixed(v) => write!(f, "{}", fmt_mm(*v)),
            Value::Text(s) => write!(f, "\"{s}\""),
            Value::Flag(b) => write!(f, "{b}"),
            Value::Ref(Some(i)) => write!(f, "{i}"),
            Value::Ref(None) => write!(f, "-"),
            Value::Enum(i) => write!(f, "{i}"),
        }
    }
}
