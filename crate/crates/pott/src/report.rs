//! JSON-lines (or plain text) reports on standard output.

use std::io::Write;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

pub struct Report<'a> {
    format: Format,
    out: &'a mut dyn Write,
}

impl<'a> Report<'a> {
    pub fn new(format: Format, out: &'a mut dyn Write) -> Self {
        Report { format, out }
    }

    /// Writes one event. In text mode a `text` field, when present, is
    /// printed verbatim; otherwise the fields are listed as `key=value`.
    pub fn emit(&mut self, event: &str, fields: Value) {
        let mut obj = Map::new();
        obj.insert("event".into(), Value::String(event.into()));
        if let Value::Object(m) = fields {
            obj.extend(m);
        }
        let line = match self.format {
            Format::Json => Value::Object(obj).to_string(),
            Format::Text => match obj.get("text") {
                Some(Value::String(t)) => t.clone(),
                _ => text_line(event, &obj),
            },
        };
        // A closed stdout is not worth a second error.
        let _ = writeln!(self.out, "{line}");
    }

    /// Raw text, used for CSV tables written to stdout.
    pub fn raw(&mut self, s: &str) {
        let _ = self.out.write_all(s.as_bytes());
    }
}

fn text_line(event: &str, obj: &Map<String, Value>) -> String {
    let mut s = String::from(event);
    for (k, v) in obj.iter().filter(|(k, _)| *k != "event") {
        s.push(' ');
        s.push_str(k);
        s.push('=');
        match v {
            Value::String(t) => s.push_str(t),
            other => s.push_str(&other.to_string()),
        }
    }
    s
}
