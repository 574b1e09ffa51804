use std::collections::BTreeMap;
use std::fmt;

use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::frontend::{Literal, TypeExpr};
use crate::mtir::MtIrStar;

/// A typed runtime value: call arguments and parsed model responses.
#[derive(Debug, Clone, PartialEq)]
pub enum RuntimeValue {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    None,
    List(Vec<RuntimeValue>),
    Dict(BTreeMap<String, RuntimeValue>),
    EnumVariant {
        enum_name: String,
        variant: String,
    },
    /// Fields in the class's declaration order once type-checked.
    Object {
        class: String,
        fields: Vec<(String, RuntimeValue)>,
    },
}

impl RuntimeValue {
    pub fn object(class: &str, fields: Vec<(&str, RuntimeValue)>) -> RuntimeValue {
        RuntimeValue::Object {
            class: class.to_string(),
            fields: fields
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        }
    }

    pub fn str(s: impl Into<String>) -> RuntimeValue {
        RuntimeValue::Str(s.into())
    }

    fn describe(&self) -> String {
        match self {
            RuntimeValue::Str(_) => "str".into(),
            RuntimeValue::Int(_) => "int".into(),
            RuntimeValue::Float(_) => "float".into(),
            RuntimeValue::Bool(_) => "bool".into(),
            RuntimeValue::None => "None".into(),
            RuntimeValue::List(_) => "list".into(),
            RuntimeValue::Dict(_) => "dict".into(),
            RuntimeValue::EnumVariant { enum_name, variant } => format!("{enum_name}.{variant}"),
            RuntimeValue::Object { class, .. } => class.clone(),
        }
    }

    pub fn from_literal(lit: &Literal) -> RuntimeValue {
        match lit {
            Literal::Str(s) => RuntimeValue::Str(s.clone()),
            Literal::Int(i) => RuntimeValue::Int(*i),
            Literal::Float(x) => RuntimeValue::Float(*x),
            Literal::Bool(b) => RuntimeValue::Bool(*b),
            Literal::None => RuntimeValue::None,
            Literal::EmptyList => RuntimeValue::List(Vec::new()),
        }
    }

    /// Decodes the argument-file JSON encoding: objects tagged with `$type`,
    /// enum variants as `{"$enum": .., "variant": ..}`, `null` as `None`.
    pub fn from_json(value: &Value) -> Result<RuntimeValue, String> {
        Ok(match value {
            Value::Null => RuntimeValue::None,
            Value::Bool(b) => RuntimeValue::Bool(*b),
            Value::Number(n) => match n.as_i64() {
                Some(i) => RuntimeValue::Int(i),
                None => RuntimeValue::Float(
                    n.as_f64()
                        .ok_or_else(|| format!("number {n} out of range"))?,
                ),
            },
            Value::String(s) => RuntimeValue::Str(s.clone()),
            Value::Array(items) => RuntimeValue::List(
                items
                    .iter()
                    .map(RuntimeValue::from_json)
                    .collect::<Result<_, _>>()?,
            ),
            Value::Object(map) => {
                if let Some(e) = map.get("$enum") {
                    let (Some(enum_name), Some(variant)) =
                        (e.as_str(), map.get("variant").and_then(Value::as_str))
                    else {
                        return Err("`$enum` objects need string `$enum` and `variant`".into());
                    };
                    if map.len() != 2 {
                        return Err(format!("unexpected keys in `$enum` object for {enum_name}"));
                    }
                    RuntimeValue::EnumVariant {
                        enum_name: enum_name.to_string(),
                        variant: variant.to_string(),
                    }
                } else if let Some(t) = map.get("$type") {
                    let class = t.as_str().ok_or("`$type` must be a string")?;
                    let fields = map
                        .iter()
                        .filter(|(k, _)| k.as_str() != "$type")
                        .map(|(k, v)| Ok((k.clone(), RuntimeValue::from_json(v)?)))
                        .collect::<Result<_, String>>()?;
                    RuntimeValue::Object {
                        class: class.to_string(),
                        fields,
                    }
                } else {
                    RuntimeValue::Dict(
                        map.iter()
                            .map(|(k, v)| Ok((k.clone(), RuntimeValue::from_json(v)?)))
                            .collect::<Result<_, String>>()?,
                    )
                }
            }
        })
    }

    /// Encodes into the same tagged JSON form [`from_json`](Self::from_json) reads.
    pub fn to_json(&self) -> Value {
        match self {
            RuntimeValue::Str(s) => Value::String(s.clone()),
            RuntimeValue::Int(i) => Value::Number((*i).into()),
            RuntimeValue::Float(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
            RuntimeValue::Bool(b) => Value::Bool(*b),
            RuntimeValue::None => Value::Null,
            RuntimeValue::List(items) => Value::Array(items.iter().map(|v| v.to_json()).collect()),
            RuntimeValue::Dict(map) => Value::Object(
                map.iter()
                    .map(|(k, v)| (k.clone(), v.to_json()))
                    .collect::<Map<_, _>>(),
            ),
            RuntimeValue::EnumVariant { enum_name, variant } => {
                let mut m = Map::new();
                m.insert("$enum".into(), Value::String(enum_name.clone()));
                m.insert("variant".into(), Value::String(variant.clone()));
                Value::Object(m)
            }
            RuntimeValue::Object { class, fields } => {
                let mut m = Map::new();
                m.insert("$type".into(), Value::String(class.clone()));
                for (k, v) in fields {
                    m.insert(k.clone(), v.to_json());
                }
                Value::Object(m)
            }
        }
    }
}

/// Constructor-syntax rendering, the same grammar [`parse_response`](super::parse_response) accepts.
impl fmt::Display for RuntimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuntimeValue::Str(s) => f.write_str(&quote_single(s)),
            RuntimeValue::Int(i) => write!(f, "{i}"),
            RuntimeValue::Float(x) => {
                if x.is_nan() {
                    f.write_str("nan")
                } else if x.is_infinite() {
                    f.write_str(if *x > 0.0 { "inf" } else { "-inf" })
                } else {
                    write!(f, "{x:?}")
                }
            }
            RuntimeValue::Bool(true) => f.write_str("True"),
            RuntimeValue::Bool(false) => f.write_str("False"),
            RuntimeValue::None => f.write_str("None"),
            RuntimeValue::List(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            RuntimeValue::Dict(map) => {
                f.write_str("{")?;
                for (i, (k, v)) in map.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}: {v}", quote_single(k))?;
                }
                f.write_str("}")
            }
            RuntimeValue::EnumVariant { enum_name, variant } => write!(f, "{enum_name}.{variant}"),
            RuntimeValue::Object { class, fields } => {
                write!(f, "{class}(")?;
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k} = {v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

pub fn render_value(v: &RuntimeValue) -> String {
    v.to_string()
}

fn quote_single(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                out.push_str(&format!("\\x{:02x}", c as u32))
            }
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

/// A well-formed value of the wrong shape, located by a path such as
/// `repo_state.files[2]`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct TypeError {
    pub path: String,
    pub message: String,
}

fn mismatch(path: &str, expected: &dyn fmt::Display, found: &RuntimeValue) -> TypeError {
    TypeError {
        path: display_path(path),
        message: format!("expected {expected}, found {}", found.describe()),
    }
}

fn display_path(path: &str) -> String {
    if path.is_empty() {
        "<result>".to_string()
    } else {
        path.to_string()
    }
}

/// Checks `value` against `ty`, returning the normalized value: object fields
/// reordered to declaration order with defaults filled, ints widened where a
/// float is expected. Class and enum definitions come from the IR's hierarchy.
pub fn conform(
    value: RuntimeValue,
    ty: &TypeExpr,
    ir: &MtIrStar,
    path: &str,
) -> Result<RuntimeValue, TypeError> {
    match ty {
        TypeExpr::Named(name) => match (name.as_str(), value) {
            ("str", v @ RuntimeValue::Str(_)) => Ok(v),
            ("int", v @ RuntimeValue::Int(_)) => Ok(v),
            ("float", v @ RuntimeValue::Float(_)) => Ok(v),
            ("float", RuntimeValue::Int(i)) => Ok(RuntimeValue::Float(i as f64)),
            ("bool", v @ RuntimeValue::Bool(_)) => Ok(v),
            ("str" | "int" | "float" | "bool", v) => Err(mismatch(path, ty, &v)),
            (_, v) => conform_user_type(v, name, ty, ir, path),
        },
        TypeExpr::Generic(head, args) => match (head.as_str(), value) {
            ("Optional", RuntimeValue::None) => Ok(RuntimeValue::None),
            ("Optional", v) => conform(v, &args[0], ir, path),
            ("list", RuntimeValue::List(items)) => items
                .into_iter()
                .enumerate()
                .map(|(i, v)| conform(v, &args[0], ir, &format!("{path}[{i}]")))
                .collect::<Result<_, _>>()
                .map(RuntimeValue::List),
            ("dict", RuntimeValue::Dict(map)) => map
                .into_iter()
                .map(|(k, v)| {
                    let p = format!("{path}[{}]", quote_single(&k));
                    conform(v, &args[1], ir, &p).map(|v| (k, v))
                })
                .collect::<Result<_, _>>()
                .map(RuntimeValue::Dict),
            (_, v) => Err(mismatch(path, ty, &v)),
        },
    }
}

fn conform_user_type(
    value: RuntimeValue,
    name: &str,
    ty: &TypeExpr,
    ir: &MtIrStar,
    path: &str,
) -> Result<RuntimeValue, TypeError> {
    if let Some(variants) = ir.enum_variants(name) {
        return match value {
            RuntimeValue::EnumVariant { enum_name, variant } if enum_name == name => {
                if variants.iter().any(|v| v.item == variant) {
                    Ok(RuntimeValue::EnumVariant { enum_name, variant })
                } else {
                    Err(TypeError {
                        path: display_path(path),
                        message: format!("`{variant}` is not a variant of {name}"),
                    })
                }
            }
            v => Err(mismatch(path, ty, &v)),
        };
    }
    let Some(attrs) = ir.class_fields(name) else {
        return Err(TypeError {
            path: display_path(path),
            message: format!("type {name} is not known to this call-site"),
        });
    };
    let (class, mut given) = match value {
        RuntimeValue::Object { class, fields } if class == name => (class, fields),
        v => return Err(mismatch(path, ty, &v)),
    };
    let field_path = |field: &str| {
        if path.is_empty() {
            format!("{class}.{field}")
        } else {
            format!("{path}.{field}")
        }
    };
    let mut fields = Vec::with_capacity(attrs.len());
    for attr in attrs {
        let attr = &attr.item;
        let p = field_path(&attr.name);
        let v = match given.iter().position(|(k, _)| *k == attr.name) {
            Some(i) => given.remove(i).1,
            None => match &attr.default {
                Some(d) => RuntimeValue::from_literal(d),
                None => {
                    return Err(TypeError {
                        path: p,
                        message: format!("missing field of type {}", attr.ty),
                    })
                }
            },
        };
        fields.push((attr.name.clone(), conform(v, &attr.ty, ir, &p)?));
    }
    if let Some((extra, _)) = given.first() {
        return Err(TypeError {
            path: field_path(extra),
            message: format!("unknown field of {class}"),
        });
    }
    Ok(RuntimeValue::Object { class, fields })
}
