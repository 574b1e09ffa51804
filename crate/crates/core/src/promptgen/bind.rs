use serde_json::Value;
use thiserror::Error;

use super::value::{conform, RuntimeValue, TypeError};
use crate::mtir::MtIrStar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindError {
    #[error("missing argument `{0}`")]
    Missing(String),
    #[error("unknown argument `{name}` (parameters: {})", .params.join(", "))]
    Unknown { name: String, params: Vec<String> },
    #[error("argument type mismatch at {0}")]
    Type(#[from] TypeError),
    #[error("invalid argument file: {0}")]
    Json(String),
}

/// Arguments in parameter order, type-checked and with defaults filled.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundArguments {
    pub values: Vec<(String, RuntimeValue)>,
}

impl BoundArguments {
    pub fn get(&self, name: &str) -> Option<&RuntimeValue> {
        self.values.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn bind_arguments(
    ir: &MtIrStar,
    args: Vec<(String, RuntimeValue)>,
) -> Result<BoundArguments, BindError> {
    let params: Vec<&str> = ir.inputs.iter().map(|i| i.item.name.as_str()).collect();
    if let Some((name, _)) = args.iter().find(|(k, _)| !params.contains(&k.as_str())) {
        return Err(BindError::Unknown {
            name: name.clone(),
            params: params.iter().map(|p| p.to_string()).collect(),
        });
    }
    let mut args = args;
    let mut values = Vec::with_capacity(params.len());
    for slot in &ir.inputs {
        let field = &slot.item;
        let value = match args.iter().position(|(k, _)| *k == field.name) {
            Some(i) => args.swap_remove(i).1,
            None => match &field.default {
                Some(d) => RuntimeValue::from_literal(d),
                None => return Err(BindError::Missing(field.name.clone())),
            },
        };
        values.push((
            field.name.clone(),
            conform(value, &field.ty, ir, &field.name)?,
        ));
    }
    Ok(BoundArguments { values })
}

/// Decodes an argument file: a JSON object mapping parameter names to values.
pub fn args_from_json(json: &Value) -> Result<Vec<(String, RuntimeValue)>, BindError> {
    let Value::Object(map) = json else {
        return Err(BindError::Json(
            "expected a JSON object of arguments".into(),
        ));
    };
    map.iter()
        .map(|(k, v)| {
            RuntimeValue::from_json(v)
                .map(|v| (k.clone(), v))
                .map_err(|e| BindError::Json(format!("{k}: {e}")))
        })
        .collect()
}
