use serde_json::{Map, Value};
use std::io::Write;

pub const SCHEMA_VERSION: &str = "tsl/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Wraps a result object with the schema version and subcommand name.
pub fn payload(subcommand: &str, params: Value, result: Value) -> Value {
    let mut m = Map::new();
    m.insert("schema_version".into(), SCHEMA_VERSION.into());
    m.insert("subcommand".into(), subcommand.into());
    m.insert("params".into(), params);
    m.insert("result".into(), result);
    Value::Object(m)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&key(k), x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&key(&i.to_string()), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_line(fields: impl Iterator<Item = String>) -> String {
    fields.map(|f| csv_field(&f)).collect::<Vec<_>>().join(",")
}

/// CSV projection: a `rows` array of objects in the result becomes a table,
/// anything else a single flattened header/value pair.
pub fn to_csv(p: &Value) -> String {
    let result = &p["result"];
    if let Some(rows) = result.get("rows").and_then(Value::as_array) {
        let flat: Vec<Vec<(String, String)>> = rows
            .iter()
            .map(|r| {
                let mut out = Vec::new();
                flatten("", r, &mut out);
                out
            })
            .collect();
        let mut header: Vec<String> = Vec::new();
        for r in &flat {
            for (k, _) in r {
                if !header.contains(k) {
                    header.push(k.clone());
                }
            }
        }
        let mut s = csv_line(header.iter().cloned()) + "\n";
        for r in flat {
            let cell = |h: &String| r.iter().find(|(k, _)| k == h).map(|(_, v)| v.clone()).unwrap_or_default();
            s += &(csv_line(header.iter().map(cell)) + "\n");
        }
        return s;
    }
    let mut res = Vec::new();
    flatten("", result, &mut res);
    let mut params = Vec::new();
    flatten("", &p["params"], &mut params);
    let mut out = vec![("schema_version".to_string(), SCHEMA_VERSION.to_string())];
    out.extend(params.into_iter().filter(|(k, _)| !res.iter().any(|(r, _)| r == k)));
    out.extend(res);
    format!("{}\n{}\n", csv_line(out.iter().map(|(k, _)| k.clone())), csv_line(out.into_iter().map(|(_, v)| v)))
}

pub fn emit(p: &Value, format: Format) -> std::io::Result<()> {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(p).expect("serialisable") + "\n",
        Format::Csv => to_csv(p),
    };
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_rows_and_flat() {
        let p = payload("seq", json!({"n": 5}), json!({"rows": [{"n": 1, "b": 1}, {"n": 2, "b": 0}]}));
        assert_eq!(to_csv(&p), "n,b\n1,1\n2,0\n");
        let p = payload("v", json!({}), json!({"rows": [{"a": 1}, {"a": 2, "b": 3}]}));
        assert_eq!(to_csv(&p), "a,b\n1,\n2,3\n");
        let p = payload("x", json!({"n": 5}), json!({"v": {"re": 1.5, "im": -2.0}, "s": "a,b"}));
        assert_eq!(to_csv(&p), "schema_version,n,v.re,v.im,s\ntsl/1,5,1.5,-2.0,\"a,b\"\n");
    }
}
