use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name recorded in [`ExperimentTable::adjustments`] by [`gbl_adjust`].
pub const GBL_ADJUST: &str = "gbl_adjust";

const COLUMNS: [&str; 4] = ["n_bar", "value", "value_err", "n_bar_err"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPoint {
    pub n_bar: f64,
    pub value: f64,
    pub value_err: Option<f64>,
    /// Horizontal error bar; √n̄ unless the file supplies one.
    pub n_bar_err: f64,
}

/// Overlay data as loaded from disk, plus the transforms applied since.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTable {
    pub label: String,
    pub points: Vec<ExperimentPoint>,
    pub adjustments: Vec<String>,
}

impl ExperimentTable {
    pub fn new(label: impl Into<String>, points: Vec<ExperimentPoint>) -> Self {
        Self {
            label: label.into(),
            points,
            adjustments: Vec::new(),
        }
    }

    pub fn is_gbl(&self) -> bool {
        label_is(&self.label, "GBL")
    }

    pub fn is_nfm(&self) -> bool {
        label_is(&self.label, "NFM")
    }

    pub fn is_adjusted(&self) -> bool {
        self.adjustments.iter().any(|a| a == GBL_ADJUST)
    }
}

fn label_is(label: &str, family: &str) -> bool {
    label
        .get(..family.len())
        .is_some_and(|head| head.eq_ignore_ascii_case(family))
}

/// Read an overlay CSV.
///
/// The label is `label` if given, else a `# label: <name>` comment in the
/// file, else the file stem.
pub fn load_experiment(path: &Path, label: Option<&str>) -> Result<ExperimentTable> {
    let text = fs::read_to_string(path)?;
    let label = match label {
        Some(l) => l.to_string(),
        None => text
            .lines()
            .filter_map(|l| l.trim().strip_prefix('#'))
            .find_map(|l| l.trim().strip_prefix("label:"))
            .map(|l| l.trim().to_string())
            .unwrap_or_else(|| {
                path.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default()
            }),
    };

    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let invalid = |line: u64, message: String| Error::Validation {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| parse_err(csv_line(&e), e.to_string()))?
        .clone();
    let header_line = headers.position().map_or(1, |p| p.line());
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(parse_err(header_line, "missing header".into()));
    }
    let width = headers.len();
    if !(2..=4).contains(&width) || headers.iter().zip(COLUMNS).any(|(h, c)| h != c) {
        return Err(parse_err(
            header_line,
            format!(
                "header must be `n_bar,value[,value_err[,n_bar_err]]`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(csv_line(&e), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let mut fields = [None; 4];
        for (i, raw) in record.iter().enumerate() {
            if raw.is_empty() {
                continue;
            }
            let v: f64 = raw
                .parse()
                .map_err(|_| invalid(line, format!("{} = `{raw}` is not a number", COLUMNS[i])))?;
            if !v.is_finite() {
                return Err(invalid(
                    line,
                    format!("{} = {raw} is not finite", COLUMNS[i]),
                ));
            }
            fields[i] = Some(v);
        }
        let [n_bar, value, value_err, n_bar_err] = fields;
        let n_bar = n_bar.ok_or_else(|| invalid(line, "n_bar is empty".into()))?;
        let value = value.ok_or_else(|| invalid(line, "value is empty".into()))?;
        if n_bar <= 0.0 {
            return Err(invalid(line, format!("n_bar = {n_bar} must be positive")));
        }
        if let Some(prev) = points.last().map(|p: &ExperimentPoint| p.n_bar) {
            if n_bar < prev {
                return Err(invalid(
                    line,
                    format!("n_bar = {n_bar} decreases from the previous row ({prev})"),
                ));
            }
        }
        for (name, err) in [("value_err", value_err), ("n_bar_err", n_bar_err)] {
            if err.is_some_and(|e| e < 0.0) {
                return Err(invalid(line, format!("{name} must be >= 0")));
            }
        }
        points.push(ExperimentPoint {
            n_bar,
            value,
            value_err,
            n_bar_err: n_bar_err.unwrap_or_else(|| n_bar.sqrt()),
        });
    }
    Ok(ExperimentTable::new(label, points))
}

fn csv_line(e: &csv::Error) -> u64 {
    e.position().map_or(0, |p| p.line())
}

/// Halve GBL values and divide their quoted errors by √2, turning two
/// independent measurements into the single-measurement setting.
pub fn gbl_adjust(mut table: ExperimentTable) -> Result<ExperimentTable> {
    if !table.is_gbl() {
        return Err(Error::NotGbl { label: table.label });
    }
    if table.is_adjusted() {
        return Err(Error::DoubleAdjust(GBL_ADJUST));
    }
    for p in &mut table.points {
        p.value /= 2.0;
        p.value_err = p.value_err.map(|e| e / std::f64::consts::SQRT_2);
    }
    table.adjustments.push(GBL_ADJUST.to_string());
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn three_rows() {
        let f = file("n_bar,value,value_err\n1,0.8,0.1\n4,0.5,0.05\n9,0.3,\n");
        let t = load_experiment(f.path(), Some("GBL")).unwrap();
        assert_eq!(t.points.len(), 3);
        assert_eq!(t.points[1].n_bar_err, 2.0);
        assert_eq!(t.points[2].value_err, None);
        assert!(t.adjustments.is_empty());
    }

    #[test]
    fn label_from_comment_or_stem() {
        let f = file("# label: NFM data\nn_bar,value\n1,0.5\n");
        assert_eq!(load_experiment(f.path(), None).unwrap().label, "NFM data");
        let f = file("n_bar,value\n1,0.5\n");
        let stem = f.path().file_stem().unwrap().to_string_lossy().into_owned();
        assert_eq!(load_experiment(f.path(), None).unwrap().label, stem);
    }

    #[test]
    fn negative_n_bar_reports_line() {
        let f = file("# comment\nn_bar,value\n1,0.5\n-1,0.4\n");
        match load_experiment(f.path(), None) {
            Err(Error::Validation { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_numeric_and_ragged_rows() {
        let f = file("n_bar,value\n1,abc\n");
        assert!(matches!(
            load_experiment(f.path(), None),
            Err(Error::Validation { line: 2, .. })
        ));
        let f = file("n_bar,value\n1,0.5,0.1\n");
        assert!(matches!(
            load_experiment(f.path(), None),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn header_is_required() {
        let f = file("1,0.5\n2,0.4\n");
        assert!(matches!(
            load_experiment(f.path(), None),
            Err(Error::Parse { .. })
        ));
        let f = file("value,n_bar\n0.5,1\n");
        assert!(matches!(
            load_experiment(f.path(), None),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn decreasing_n_bar_rejected() {
        let f = file("n_bar,value\n4,0.5\n1,0.4\n");
        assert!(matches!(
            load_experiment(f.path(), None),
            Err(Error::Validation { line: 3, .. })
        ));
    }

    #[test]
    fn gbl_adjustment() {
        let t = ExperimentTable::new(
            "GBL",
            vec![ExperimentPoint {
                n_bar: 1.0,
                value: 1.0,
                value_err: Some(0.2),
                n_bar_err: 1.0,
            }],
        );
        let a = gbl_adjust(t).unwrap();
        assert_eq!(a.points[0].value, 0.5);
        assert_eq!(a.points[0].value_err, Some(0.2 / std::f64::consts::SQRT_2));
        assert_eq!(a.adjustments, vec![GBL_ADJUST.to_string()]);
        assert!(matches!(gbl_adjust(a), Err(Error::DoubleAdjust(_))));

        let empty = gbl_adjust(ExperimentTable::new("gbl", vec![])).unwrap();
        assert!(empty.points.is_empty());

        assert!(matches!(
            gbl_adjust(ExperimentTable::new("NFM", vec![])),
            Err(Error::NotGbl { .. })
        ));
    }

    #[test]
    fn adjustment_leaves_file_alone() {
        let body = "n_bar,value,value_err\n1,0.8,0.1\n";
        let f = file(body);
        let t = load_experiment(f.path(), Some("GBL")).unwrap();
        gbl_adjust(t).unwrap();
        assert_eq!(fs::read_to_string(f.path()).unwrap(), body);
    }
}
