//! JSON and CSV emitters with fixed float formatting.

use std::io::Write;

use num_complex::Complex64;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// A report value. Objects keep insertion order so output is reproducible.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Complex(Complex64),
    Str(String),
    List(Vec<Node>),
    Object(Vec<(String, Node)>),
}

/// 17 significant digits; non-finite values have no JSON spelling.
pub fn format_float(v: f64) -> Option<String> {
    v.is_finite().then(|| format!("{v:.16e}"))
}

impl Node {
    pub fn obj() -> Self {
        Node::Object(Vec::new())
    }

    /// Appends a field; panics when called on a non-object.
    pub fn with(mut self, key: &str, value: impl Into<Node>) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl Into<Node>) {
        match self {
            Node::Object(fields) => fields.push((key.to_string(), value.into())),
            _ => panic!("push on a non-object node"),
        }
    }

    pub fn get(&self, key: &str) -> Option<&Node> {
        match self {
            Node::Object(fields) => fields.iter().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }
}

impl From<bool> for Node {
    fn from(v: bool) -> Self {
        Node::Bool(v)
    }
}
impl From<usize> for Node {
    fn from(v: usize) -> Self {
        Node::Int(v as i64)
    }
}
impl From<i64> for Node {
    fn from(v: i64) -> Self {
        Node::Int(v)
    }
}
impl From<f64> for Node {
    fn from(v: f64) -> Self {
        Node::Float(v)
    }
}
impl From<Complex64> for Node {
    fn from(v: Complex64) -> Self {
        Node::Complex(v)
    }
}
impl From<&str> for Node {
    fn from(v: &str) -> Self {
        Node::Str(v.to_string())
    }
}
impl From<String> for Node {
    fn from(v: String) -> Self {
        Node::Str(v)
    }
}
impl<T: Into<Node>> From<Option<T>> for Node {
    fn from(v: Option<T>) -> Self {
        v.map_or(Node::Null, Into::into)
    }
}
impl<T: Into<Node>> From<Vec<T>> for Node {
    fn from(v: Vec<T>) -> Self {
        Node::List(v.into_iter().map(Into::into).collect())
    }
}

fn raw_float<S: Serializer>(v: f64, s: S) -> Result<S::Ok, S::Error> {
    match format_float(v) {
        Some(txt) => RawValue::from_string(txt)
            .map_err(serde::ser::Error::custom)?
            .serialize(s),
        None => s.serialize_none(),
    }
}

struct F(f64);

impl Serialize for F {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        raw_float(self.0, s)
    }
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Node::Null => s.serialize_none(),
            Node::Bool(b) => s.serialize_bool(*b),
            Node::Int(i) => s.serialize_i64(*i),
            Node::Float(v) => raw_float(*v, s),
            Node::Complex(z) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("re", &F(z.re))?;
                m.serialize_entry("im", &F(z.im))?;
                m.end()
            }
            Node::Str(t) => s.serialize_str(t),
            Node::List(items) => {
                let mut q = s.serialize_seq(Some(items.len()))?;
                for it in items {
                    q.serialize_element(it)?;
                }
                q.end()
            }
            Node::Object(fields) => {
                let mut m = s.serialize_map(Some(fields.len()))?;
                for (k, v) in fields {
                    m.serialize_entry(k, v)?;
                }
                m.end()
            }
        }
    }
}

/// Top-level `{config, results, diagnostics}` record.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub config: Node,
    pub results: Vec<Node>,
    pub diagnostics: Node,
}

impl Report {
    pub fn to_node(&self) -> Node {
        Node::obj()
            .with("config", self.config.clone())
            .with("results", Node::List(self.results.clone()))
            .with("diagnostics", self.diagnostics.clone())
    }

    pub fn write_json<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut *w, &self.to_node())?;
        writeln!(w)
    }

    /// One header row from the first result, complex columns split into
    /// `_re`/`_im`, nested values flattened with `.`.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let Some(first) = self.results.first() else {
            out.flush()?;
            return Ok(());
        };
        let mut header = Vec::new();
        flatten("", first, &mut header);
        out.write_record(header.iter().map(|(k, _)| k.as_str()))?;
        for row in &self.results {
            let mut cells = Vec::new();
            flatten("", row, &mut cells);
            let line: Vec<String> = header
                .iter()
                .map(|(k, _)| {
                    cells
                        .iter()
                        .find(|(ck, _)| ck == k)
                        .map(|(_, v)| v.clone())
                        .unwrap_or_default()
                })
                .collect();
            out.write_record(&line)?;
        }
        out.flush()
    }
}

fn flatten(prefix: &str, node: &Node, out: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match node {
        Node::Object(fields) => {
            for (k, v) in fields {
                flatten(&join(k), v, out);
            }
        }
        Node::Complex(z) => {
            out.push((
                format!("{prefix}_re"),
                format_float(z.re).unwrap_or_default(),
            ));
            out.push((
                format!("{prefix}_im"),
                format_float(z.im).unwrap_or_default(),
            ));
        }
        Node::List(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, out);
            }
        }
        Node::Null => out.push((prefix.to_string(), String::new())),
        Node::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Node::Int(i) => out.push((prefix.to_string(), i.to_string())),
        Node::Float(v) => out.push((prefix.to_string(), format_float(*v).unwrap_or_default())),
        Node::Str(s) => out.push((prefix.to_string(), s.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            config: Node::obj().with("family", "sho"),
            results: vec![
                Node::obj()
                    .with("level", 0usize)
                    .with("energy", Complex64::new(0.5, 0.0)),
                Node::obj()
                    .with("level", 1usize)
                    .with("energy", Complex64::new(1.5, -0.0)),
            ],
            diagnostics: Node::obj().with("max", f64::NAN).with("ok", true),
        }
    }

    #[test]
    fn json_layout() {
        let mut buf = Vec::new();
        sample().write_json(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["results"][1]["energy"]["re"], 1.5);
        assert!(v["diagnostics"]["max"].is_null());
        assert!(text.contains("5.0000000000000000e-1"));
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 3);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("level,energy_re,energy_im"));
        assert_eq!(
            lines.next(),
            Some("0,5.0000000000000000e-1,0.0000000000000000e0")
        );
    }

    #[test]
    fn seventeen_digits() {
        let s = format_float(0.1).unwrap();
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(format_float(f64::INFINITY), None);
    }
}
