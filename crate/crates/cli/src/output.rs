//! Rendering of command results as JSON or CSV.
//!
//! Reals are printed with 17 significant digits (C's `%.17g`), so every
//! value reads back to the same `f64`. Non-finite values are the strings
//! `inf`, `-inf` and `nan`.

use serde_json::{Map, Value};

pub const CONFIG_PREFIX: &str = "# config: ";

/// `%.17g` formatting.
pub fn fmt_real(x: f64) -> String {
    if let Some(name) = kbc_core::real::non_finite_name(x) {
        return name.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs())
    } else {
        let digits = (16 - exp) as usize;
        strip_zeros(&format!("{x:.digits$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn fmt_number(n: &serde_json::Number) -> String {
    if let Some(u) = n.as_u64() {
        u.to_string()
    } else if let Some(i) = n.as_i64() {
        i.to_string()
    } else {
        fmt_real(n.as_f64().expect("finite number"))
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("string serializes"));
}

fn write_json(out: &mut String, v: &Value, indent: Option<usize>) {
    let newline = |out: &mut String, level: usize| {
        if indent.is_some() {
            out.push('\n');
            out.push_str(&"  ".repeat(level));
        }
    };
    let level = indent.unwrap_or(0);
    let child = indent.map(|l| l + 1);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&fmt_number(n)),
        Value::String(s) => write_string(out, s),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, level + 1);
                write_json(out, item, child);
            }
            newline(out, level);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, level + 1);
                write_string(out, k);
                out.push_str(if indent.is_some() { ": " } else { ":" });
                write_json(out, item, child);
            }
            newline(out, level);
            out.push('}');
        }
    }
}

pub fn to_json_pretty(v: &Value) -> String {
    let mut out = String::new();
    write_json(&mut out, v, Some(0));
    out.push('\n');
    out
}

pub fn to_json_compact(v: &Value) -> String {
    let mut out = String::new();
    write_json(&mut out, v, None);
    out
}

fn csv_cell(v: &Value) -> String {
    let text = match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(_) | Value::Bool(_) => to_json_compact(v),
        _ => to_json_compact(v),
    };
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(map) => {
            for (k, item) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, item, rows);
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), item, rows);
            }
        }
        _ => rows.push((prefix.to_string(), v.clone())),
    }
}

/// Fixed-column result table.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Debug, Clone)]
pub enum Body {
    Record(Value),
    Table(Table),
}

/// A command result with the metadata needed to reproduce it.
#[derive(Debug, Clone)]
pub struct Document {
    pub command: &'static str,
    pub config: Value,
    pub notes: Vec<String>,
    pub body: Body,
}

impl Document {
    fn meta(&self) -> Value {
        let mut m = Map::new();
        m.insert("tool".into(), "kbc".into());
        m.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        m.insert("command".into(), self.command.into());
        m.insert("notes".into(), self.notes.clone().into());
        m.insert("config".into(), self.config.clone());
        Value::Object(m)
    }

    pub fn to_json(&self) -> String {
        let result = match &self.body {
            Body::Record(v) => v.clone(),
            Body::Table(t) => {
                let rows = t
                    .rows
                    .iter()
                    .map(|r| Value::Object(t.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect()))
                    .collect();
                let mut m = Map::new();
                m.insert("columns".into(), t.columns.clone().into());
                m.insert("rows".into(), Value::Array(rows));
                Value::Object(m)
            }
        };
        let mut doc = Map::new();
        doc.insert("meta".into(), self.meta());
        doc.insert("result".into(), result);
        to_json_pretty(&Value::Object(doc))
    }

    /// Header row first, data rows, then `#` comment lines with the
    /// version, command, notes and the full config.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut line = |cells: Vec<String>| {
            out.push_str(&cells.join(","));
            out.push('\n');
        };
        match &self.body {
            Body::Record(v) => {
                let mut rows = Vec::new();
                flatten("", v, &mut rows);
                line(vec!["key".into(), "value".into()]);
                for (k, v) in rows {
                    line(vec![csv_cell(&Value::String(k)), csv_cell(&v)]);
                }
            }
            Body::Table(t) => {
                line(t.columns.iter().map(|c| c.to_string()).collect());
                for r in &t.rows {
                    line(r.iter().map(csv_cell).collect());
                }
            }
        }
        out.push_str(&format!("# kbc {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("# command: {}\n", self.command));
        for note in &self.notes {
            out.push_str(&format!("# note: {note}\n"));
        }
        out.push_str(CONFIG_PREFIX);
        out.push_str(&to_json_compact(&self.config));
        out.push('\n');
        out
    }
}

/// JSON value of a real, with the string sentinels for non-finite values.
pub fn real(x: f64) -> Value {
    match kbc_core::real::non_finite_name(x) {
        Some(name) => Value::String(name.into()),
        None => serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn g17_formatting() {
        assert_eq!(fmt_real(1.0), "1");
        assert_eq!(fmt_real(0.1), "0.10000000000000001");
        assert_eq!(fmt_real(-0.5), "-0.5");
        assert_eq!(fmt_real(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(fmt_real(1e-5), "1.0000000000000001e-05");
        assert_eq!(fmt_real(1e20), "1e+20");
        assert_eq!(fmt_real(123456.0), "123456");
        assert_eq!(fmt_real(0.0001), "0.0001");
        assert_eq!(fmt_real(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_real(f64::NAN), "nan");
        assert_eq!(fmt_real(0.0), "0");
    }

    #[test]
    fn g17_round_trips() {
        let mut x = 0.123_456_789_012_345_67_f64;
        for _ in 0..200 {
            assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
            x = x * 7.3 + 1e-3;
            if x > 1e30 {
                x = 1.0 / x;
            }
        }
        for x in [f64::MIN_POSITIVE, f64::MAX, 5e-324, 2.0f64.sqrt()] {
            assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_layout() {
        let v = json!({"a": 1, "b": [0.5, "x"], "c": {}, "d": null});
        assert_eq!(to_json_compact(&v), r#"{"a":1,"b":[0.5,"x"],"c":{},"d":null}"#);
        assert_eq!(to_json_pretty(&json!({"a": [1]})), "{\n  \"a\": [\n    1\n  ]\n}\n");
        assert_eq!(real(f64::NEG_INFINITY), json!("-inf"));
    }

    #[test]
    fn csv_layout() {
        let doc = Document {
            command: "sweep",
            config: json!({"alpha": 0.5}),
            notes: vec!["n".into()],
            body: Body::Table(Table {
                columns: vec!["a", "b"],
                rows: vec![vec![json!(0.25), json!("x,y")]],
            }),
        };
        let csv = doc.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "a,b");
        assert_eq!(lines[1], "0.25,\"x,y\"");
        assert_eq!(lines.last().unwrap(), &"# config: {\"alpha\":0.5}");
    }
}
