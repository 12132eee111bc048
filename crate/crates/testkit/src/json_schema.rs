//! Checker for the draft-07 keywords used by the shipped export schema:
//! `type`, `enum`, `const`, `properties`, `required`, `additionalProperties`,
//! `items`, `pattern`, `minLength`, `minimum`, `maximum` and local `$ref`.
//! Unknown keywords fail loudly so the schema cannot silently outgrow it.

use serde_json::Value;

const KNOWN: &[&str] = &[
    "$schema",
    "$id",
    "title",
    "description",
    "type",
    "enum",
    "const",
    "properties",
    "required",
    "additionalProperties",
    "items",
    "pattern",
    "minLength",
    "minimum",
    "maximum",
    "$ref",
    "definitions",
];

pub struct Checker<'a> {
    root: &'a Value,
}

impl<'a> Checker<'a> {
    pub fn new(root: &'a Value) -> Self {
        Self { root }
    }

    /// Violations as `path: message`; empty when `instance` conforms.
    pub fn check(&self, instance: &Value) -> Vec<String> {
        let mut errs = Vec::new();
        self.walk(self.root, instance, "$", &mut errs);
        errs
    }

    fn resolve(&self, r: &str) -> &'a Value {
        let path = r
            .strip_prefix("#/")
            .unwrap_or_else(|| panic!("only local refs supported: {r}"));
        path.split('/').fold(self.root, |v, key| {
            v.get(key).unwrap_or_else(|| panic!("dangling ref {r}"))
        })
    }

    fn walk(&self, schema: &'a Value, v: &Value, path: &str, errs: &mut Vec<String>) {
        let obj = schema.as_object().expect("schema nodes are objects");
        for key in obj.keys() {
            assert!(KNOWN.contains(&key.as_str()), "unsupported schema keyword {key}");
        }
        if let Some(r) = obj.get("$ref").and_then(Value::as_str) {
            self.walk(self.resolve(r), v, path, errs);
            return;
        }
        if let Some(t) = obj.get("type") {
            let types: Vec<&str> = match t {
                Value::String(s) => vec![s],
                Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
                _ => panic!("bad type keyword"),
            };
            if !types.iter().any(|t| type_ok(t, v)) {
                errs.push(format!("{path}: expected {types:?}, got {v}"));
                return;
            }
        }
        if let Some(e) = obj.get("enum").and_then(Value::as_array) {
            if !e.contains(v) {
                errs.push(format!("{path}: {v} not in enum"));
            }
        }
        if let Some(c) = obj.get("const") {
            if c != v {
                errs.push(format!("{path}: expected const {c}, got {v}"));
            }
        }
        if let (Some(p), Some(s)) = (obj.get("pattern").and_then(Value::as_str), v.as_str()) {
            if !regex::Regex::new(p).expect("schema pattern compiles").is_match(s) {
                errs.push(format!("{path}: {s:?} does not match {p}"));
            }
        }
        if let (Some(min), Some(s)) = (obj.get("minLength").and_then(Value::as_u64), v.as_str()) {
            if (s.chars().count() as u64) < min {
                errs.push(format!("{path}: shorter than {min}"));
            }
        }
        if let (Some(min), Some(n)) = (obj.get("minimum").and_then(Value::as_f64), v.as_f64()) {
            if n < min {
                errs.push(format!("{path}: {n} < {min}"));
            }
        }
        if let (Some(max), Some(n)) = (obj.get("maximum").and_then(Value::as_f64), v.as_f64()) {
            if n > max {
                errs.push(format!("{path}: {n} > {max}"));
            }
        }
        if let Some(map) = v.as_object() {
            let props = obj.get("properties").and_then(Value::as_object);
            for req in obj.get("required").and_then(Value::as_array).into_iter().flatten() {
                let req = req.as_str().unwrap();
                if !map.contains_key(req) {
                    errs.push(format!("{path}: missing required {req}"));
                }
            }
            for (k, child) in map {
                match props.and_then(|p| p.get(k)) {
                    Some(s) => self.walk(s, child, &format!("{path}.{k}"), errs),
                    None if obj.get("additionalProperties") == Some(&Value::Bool(false)) => {
                        errs.push(format!("{path}: unexpected property {k}"))
                    }
                    None => {}
                }
            }
        }
        if let (Some(items), Some(arr)) = (obj.get("items"), v.as_array()) {
            for (i, child) in arr.iter().enumerate() {
                self.walk(items, child, &format!("{path}[{i}]"), errs);
            }
        }
    }
}

fn type_ok(t: &str, v: &Value) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64(),
        other => panic!("unknown type {other}"),
    }
}
