use std::io::Write;

use anyhow::Result;
use pbphase::check::InvariantOutcome;
use pbphase::experiment::{format_f64, write_figure_csv, write_figure_json, Column};
use pbphase::FigureTable;
use serde_json::{Map, Value};

use crate::args::Format;

/// Named scalar results, emitted in insertion order.
#[derive(Debug, Default)]
pub struct Report {
    entries: Vec<(String, Value)>,
}

impl Report {
    pub fn num(mut self, key: &str, value: f64) -> Self {
        self.entries.push((key.into(), Value::from(value)));
        self
    }

    pub fn int(mut self, key: &str, value: usize) -> Self {
        self.entries.push((key.into(), Value::from(value)));
        self
    }

    pub fn text(mut self, key: &str, value: impl Into<String>) -> Self {
        self.entries.push((key.into(), Value::String(value.into())));
        self
    }

    pub fn flag(mut self, key: &str, value: bool) -> Self {
        self.entries.push((key.into(), Value::Bool(value)));
        self
    }

    pub fn maybe_text(self, key: &str, value: Option<impl Into<String>>) -> Self {
        match value {
            Some(v) => self.text(key, v),
            None => self,
        }
    }
}

pub enum Output {
    Report(Report),
    Columns {
        columns: Vec<Column>,
        metadata: Map<String, Value>,
    },
    Figure(FigureTable),
    Invariants(Vec<InvariantOutcome>),
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) => n.as_f64().map_or_else(
            || n.to_string(),
            |x| {
                if n.is_f64() {
                    format_f64(x)
                } else {
                    n.to_string()
                }
            },
        ),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn write(output: &Output, format: Format, out: &mut dyn Write) -> Result<()> {
    match (output, format) {
        (Output::Figure(t), Format::Csv) => write_figure_csv(t, out)?,
        (Output::Figure(t), Format::Json) => write_figure_json(t, out)?,
        (Output::Report(r), Format::Csv) => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["quantity", "value"])?;
            for (k, v) in &r.entries {
                w.write_record([k.as_str(), cell(v).as_str()])?;
            }
            w.flush()?;
        }
        (Output::Report(r), Format::Json) => {
            let map: Map<String, Value> = r.entries.iter().cloned().collect();
            serde_json::to_writer_pretty(&mut *out, &map)?;
            writeln!(out)?;
        }
        (Output::Columns { columns, metadata }, Format::Csv) => {
            writeln!(out, "# meta: {}", serde_json::to_string(metadata)?)?;
            let mut w = csv::Writer::from_writer(out);
            w.write_record(columns.iter().map(|c| c.name.as_str()))?;
            let rows = columns.first().map_or(0, |c| c.values.len());
            for i in 0..rows {
                w.write_record(columns.iter().map(|c| format_f64(c.values[i])))?;
            }
            w.flush()?;
        }
        (Output::Invariants(list), Format::Csv) => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["module", "name", "status", "margin", "detail"])?;
            for o in list {
                let status = serde_json::to_value(o.status)?;
                w.write_record([
                    o.module,
                    o.name,
                    status.as_str().unwrap_or_default(),
                    &format_f64(o.margin),
                    &o.detail,
                ])?;
            }
            w.flush()?;
        }
        (Output::Invariants(list), Format::Json) => {
            serde_json::to_writer_pretty(&mut *out, list)?;
            writeln!(out)?;
        }
        (Output::Columns { columns, metadata }, Format::Json) => {
            let cols: Map<String, Value> = columns
                .iter()
                .map(|c| (c.name.clone(), Value::from(c.values.clone())))
                .collect();
            let mut root = Map::new();
            root.insert("metadata".into(), Value::Object(metadata.clone()));
            root.insert("columns".into(), Value::Object(cols));
            serde_json::to_writer_pretty(&mut *out, &root)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
