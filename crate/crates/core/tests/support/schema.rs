//! Checks a JSON value against the subset of JSON Schema used by the published
//! schemas: `type`, `const`, `enum`, `minimum`, `properties`, `required`,
//! `additionalProperties: false`, `oneOf` and local `$ref`s into `$defs`.

use serde_json::Value;

pub fn validate(schema: &Value, doc: &Value) -> Result<(), String> {
    check(schema, schema, doc, "$")
}

fn resolve<'a>(root: &'a Value, node: &'a Value) -> Result<&'a Value, String> {
    match node.get("$ref").and_then(Value::as_str) {
        Some(r) => {
            let name = r
                .strip_prefix("#/$defs/")
                .ok_or_else(|| format!("unsupported $ref {r}"))?;
            root["$defs"]
                .get(name)
                .ok_or_else(|| format!("missing definition {name}"))
        }
        None => Ok(node),
    }
}

fn type_matches(name: &str, v: &Value) -> bool {
    match name {
        "null" => v.is_null(),
        "boolean" => v.is_boolean(),
        "string" => v.is_string(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64(),
        "object" => v.is_object(),
        "array" => v.is_array(),
        _ => false,
    }
}

fn check(root: &Value, node: &Value, v: &Value, at: &str) -> Result<(), String> {
    let node = resolve(root, node)?;
    if let Some(t) = node.get("type") {
        let names: Vec<&str> = match t {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => return Err(format!("{at}: bad type keyword")),
        };
        if !names.iter().any(|n| type_matches(n, v)) {
            return Err(format!("{at}: {v} is not of type {t}"));
        }
    }
    if let Some(c) = node.get("const") {
        if c != v {
            return Err(format!("{at}: expected {c}, got {v}"));
        }
    }
    if let Some(Value::Array(options)) = node.get("enum") {
        if !options.contains(v) {
            return Err(format!("{at}: {v} not in {options:?}"));
        }
    }
    if let (Some(min), Some(x)) = (node.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if x < min {
            return Err(format!("{at}: {x} below minimum {min}"));
        }
    }
    if let Some(Value::Array(options)) = node.get("oneOf") {
        let matched = options
            .iter()
            .filter(|o| check(root, o, v, at).is_ok())
            .count();
        if matched != 1 {
            return Err(format!("{at}: {v} matches {matched} oneOf branches"));
        }
    }
    if let Some(obj) = v.as_object() {
        let props = node.get("properties").and_then(Value::as_object);
        if let Some(Value::Array(req)) = node.get("required") {
            for key in req.iter().filter_map(Value::as_str) {
                if !obj.contains_key(key) {
                    return Err(format!("{at}: missing required key {key}"));
                }
            }
        }
        for (key, val) in obj {
            match props.and_then(|p| p.get(key)) {
                Some(sub) => check(root, sub, val, &format!("{at}.{key}"))?,
                None if node.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    return Err(format!("{at}: unexpected key {key}"));
                }
                None => {}
            }
        }
    }
    Ok(())
}
