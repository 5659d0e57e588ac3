//! Shared helpers for CLI tests: running the binary and checking JSON
//! outputs against the schemas shipped in `schemas/`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gamevar"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .canonicalize()
        .expect("schemas directory exists")
}

/// Minimal JSON Schema checker covering the subset the shipped schemas use:
/// `type` (including `"null"` unions), `properties`, `required`, `items`,
/// and `additionalProperties: false`.
pub fn check_schema(value: &serde_json::Value, schema: &serde_json::Value) -> Result<(), String> {
    use serde_json::Value;

    fn type_matches(value: &Value, ty: &str) -> bool {
        match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            _ => false,
        }
    }

    if let Some(ty) = schema.get("type") {
        let ok = match ty {
            Value::String(t) => type_matches(value, t),
            Value::Array(ts) => ts
                .iter()
                .filter_map(Value::as_str)
                .any(|t| type_matches(value, t)),
            _ => return Err("schema `type` must be string or array".into()),
        };
        if !ok {
            return Err(format!("value {value} does not match type {ty}"));
        }
    }
    if let Some(required) = schema.get("required").and_then(|r| r.as_array()) {
        let obj = value.as_object().ok_or("required on non-object")?;
        for key in required.iter().filter_map(|k| k.as_str()) {
            if !obj.contains_key(key) {
                return Err(format!("missing required key `{key}`"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(|p| p.as_object()) {
        if let Some(obj) = value.as_object() {
            for (key, sub) in obj {
                match props.get(key) {
                    Some(subschema) => {
                        check_schema(sub, subschema).map_err(|e| format!("{key}: {e}"))?
                    }
                    None => {
                        if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
                            return Err(format!("unexpected key `{key}`"));
                        }
                    }
                }
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, item) in arr.iter().enumerate() {
                check_schema(item, items).map_err(|e| format!("[{i}]: {e}"))?;
            }
        }
    }
    Ok(())
}

pub fn assert_schema(json_text: &str, schema_file: &str) {
    let value: serde_json::Value = serde_json::from_str(json_text).expect("valid JSON output");
    let schema_text =
        std::fs::read_to_string(schema_dir().join(schema_file)).expect("schema file readable");
    let schema: serde_json::Value = serde_json::from_str(&schema_text).expect("valid schema JSON");
    if let Err(e) = check_schema(&value, &schema) {
        panic!("output violates {schema_file}: {e}\n{json_text}");
    }
}
