use std::io::{BufRead, BufReader, Read, Write};

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::experiment::figure::{Column, FigureId, FigureTable};
use crate::experiment::table::ExperimentTable;

const FIGURE_TAG: &str = "# figure: ";
const META_TAG: &str = "# meta: ";
const OVERLAY_TAG: &str = "# overlay: ";

/// 17 significant digits, enough to reproduce any f64 exactly.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with the figure id, metadata and overlays in leading `#` lines.
pub fn write_figure_csv<W: Write>(table: &FigureTable, mut out: W) -> Result<()> {
    writeln!(out, "{FIGURE_TAG}{}", table.figure_id)?;
    writeln!(out, "{META_TAG}{}", serde_json::to_string(&table.metadata)?)?;
    for o in &table.overlays {
        writeln!(out, "{OVERLAY_TAG}{}", serde_json::to_string(o)?)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(table.columns.iter().map(|c| c.name.as_str()))?;
    for row in 0..table.rows() {
        w.write_record(table.columns.iter().map(|c| format_f64(c.values[row])))?;
    }
    w.flush()?;
    Ok(())
}

/// Parse what [`write_figure_csv`] produced.
pub fn read_figure_csv<R: Read>(input: R) -> Result<FigureTable> {
    let mut reader = BufReader::new(input);
    let mut figure_id = None;
    let mut metadata = Map::new();
    let mut overlays: Vec<ExperimentTable> = Vec::new();
    let mut body = String::new();
    let mut line = String::new();
    let mut line_no = 0u64;
    let bad = |line: u64, message: String| Error::Parse {
        path: "<figure csv>".into(),
        line,
        message,
    };
    while reader.read_line(&mut line)? > 0 {
        line_no += 1;
        let l = line.trim_end();
        if let Some(id) = l.strip_prefix(FIGURE_TAG) {
            figure_id = Some(id.parse::<FigureId>()?);
        } else if let Some(m) = l.strip_prefix(META_TAG) {
            metadata = serde_json::from_str(m).map_err(|e| bad(line_no, e.to_string()))?;
        } else if let Some(o) = l.strip_prefix(OVERLAY_TAG) {
            overlays.push(serde_json::from_str(o).map_err(|e| bad(line_no, e.to_string()))?);
        } else if !l.starts_with('#') {
            body.push_str(&line);
        }
        line.clear();
    }
    let figure_id = figure_id.ok_or_else(|| bad(1, "missing `# figure:` line".into()))?;

    let mut csv = csv::Reader::from_reader(body.as_bytes());
    let mut columns: Vec<Column> = csv
        .headers()?
        .iter()
        .map(|name| Column {
            name: name.to_string(),
            values: Vec::new(),
        })
        .collect();
    for record in csv.records() {
        let record = record?;
        for (col, raw) in columns.iter_mut().zip(record.iter()) {
            let v = raw
                .parse()
                .map_err(|_| bad(0, format!("`{raw}` in column {} is not a number", col.name)))?;
            col.values.push(v);
        }
    }
    Ok(FigureTable {
        figure_id,
        columns,
        metadata,
        overlays,
    })
}

/// The figure as one JSON object; keys keep insertion order.
pub fn figure_json(table: &FigureTable) -> Result<Value> {
    let mut columns = Map::new();
    for c in &table.columns {
        columns.insert(c.name.clone(), serde_json::to_value(&c.values)?);
    }
    let mut root = Map::new();
    root.insert(
        "figure_id".into(),
        Value::String(table.figure_id.to_string()),
    );
    root.insert("metadata".into(), Value::Object(table.metadata.clone()));
    root.insert("columns".into(), Value::Object(columns));
    root.insert("overlays".into(), serde_json::to_value(&table.overlays)?);
    Ok(Value::Object(root))
}

pub fn write_figure_json<W: Write>(table: &FigureTable, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &figure_json(table)?)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::figure::{emit_figure, FigureParams};
    use crate::experiment::table::{gbl_adjust, ExperimentPoint};

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        for x in [std::f64::consts::PI, 1.0 / 3.0, 5e-324, f64::MAX, -0.0] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_round_trip() {
        let gbl = gbl_adjust(ExperimentTable::new(
            "GBL",
            vec![ExperimentPoint {
                n_bar: 2.0,
                value: 0.3,
                value_err: None,
                n_bar_err: 2f64.sqrt(),
            }],
        ))
        .unwrap();
        let params = FigureParams {
            grid: Some(9),
            ..FigureParams::default()
        };
        let table = emit_figure(FigureId::Fig6, &params, vec![gbl]).unwrap();
        let mut buf = Vec::new();
        write_figure_csv(&table, &mut buf).unwrap();
        let back = read_figure_csv(buf.as_slice()).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn json_shape() {
        let params = FigureParams {
            grid: Some(5),
            ..FigureParams::default()
        };
        let table = emit_figure(FigureId::Fig7, &params, vec![]).unwrap();
        let v = figure_json(&table).unwrap();
        let keys: Vec<&String> = v["columns"].as_object().unwrap().keys().collect();
        assert_eq!(keys, ["n_bar", "cos2", "cos4", "c12_sq"]);
        assert_eq!(v["figure_id"], "fig7");
    }
}
