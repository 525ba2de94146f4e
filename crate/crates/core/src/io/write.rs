//! Plain-text writers: CSV rows and JSON lines with floats at 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{IfflError, Result};

/// 17 significant digits in scientific notation, enough to round-trip any `f64`.
/// Non-finite values become an empty string.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

/// Builder for one JSON object on a single line.
#[derive(Debug, Default, Clone)]
pub struct JsonLine {
    body: String,
}

impl JsonLine {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(&mut self, key: &str) {
        if !self.body.is_empty() {
            self.body.push(',');
        }
        self.body.push_str(&json_string(key));
        self.body.push(':');
    }

    pub fn str(mut self, key: &str, value: &str) -> Self {
        self.key(key);
        self.body.push_str(&json_string(value));
        self
    }

    /// Float at 17 significant digits; `null` when not finite.
    pub fn num(mut self, key: &str, value: f64) -> Self {
        self.key(key);
        self.body.push_str(&json_number(value));
        self
    }

    pub fn opt_num(self, key: &str, value: Option<f64>) -> Self {
        match value {
            Some(v) => self.num(key, v),
            None => self.null(key),
        }
    }

    pub fn int(mut self, key: &str, value: usize) -> Self {
        self.key(key);
        let _ = write!(self.body, "{value}");
        self
    }

    pub fn boolean(mut self, key: &str, value: bool) -> Self {
        self.key(key);
        self.body.push_str(if value { "true" } else { "false" });
        self
    }

    pub fn null(mut self, key: &str) -> Self {
        self.key(key);
        self.body.push_str("null");
        self
    }

    pub fn nums(mut self, key: &str, values: &[f64]) -> Self {
        self.key(key);
        let items: Vec<String> = values.iter().map(|&v| json_number(v)).collect();
        let _ = write!(self.body, "[{}]", items.join(","));
        self
    }

    pub fn opt_str(self, key: &str, value: Option<&str>) -> Self {
        match value {
            Some(v) => self.str(key, v),
            None => self.null(key),
        }
    }

    pub fn finish(self) -> String {
        format!("{{{}}}", self.body)
    }
}

fn json_number(v: f64) -> String {
    if v.is_finite() {
        fmt_float(v)
    } else {
        "null".into()
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialise")
}

/// CSV table with a fixed column count.
#[derive(Debug, Clone)]
pub struct Table {
    preamble: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            preamble: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// A `# ...` line written before the header.
    pub fn comment(&mut self, line: String) {
        self.preamble.push(line);
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in &self.preamble {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// One object per row; empty fields become `null`, numeric-looking fields
    /// stay numbers.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let mut line = JsonLine::new();
            for (key, field) in self.header.iter().zip(row) {
                line = if field.is_empty() {
                    line.null(key)
                } else if field.parse::<f64>().is_ok() {
                    line.key(key);
                    line.body.push_str(field);
                    line
                } else {
                    line.str(key, field)
                };
            }
            let _ = writeln!(out, "{}", line.finish());
        }
        out
    }
}

/// Creates `dir` if needed and writes `name` inside it.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| IfflError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| IfflError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_with_17_digits() {
        for v in [1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.1, 0.0] {
            let s = fmt_float(v);
            let digits: String = s.split('e').next().unwrap().chars().filter(char::is_ascii_digit).collect();
            assert_eq!(digits.len(), 17, "{s}");
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_float(f64::INFINITY), "");
    }

    #[test]
    fn json_line_is_valid_json() {
        let line = JsonLine::new()
            .str("name", "a \"quoted\" value")
            .num("x", 1.0 / 3.0)
            .num("bad", f64::NAN)
            .int("n", 3)
            .boolean("ok", true)
            .nums("v", &[1.0, -2.0])
            .finish();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["name"], "a \"quoted\" value");
        assert_eq!(v["x"].as_f64().unwrap(), 1.0 / 3.0);
        assert!(v["bad"].is_null());
        assert_eq!(v["v"][1].as_f64().unwrap(), -2.0);
    }

    #[test]
    fn table_formats() {
        let mut t = Table::new(&["a", "b"]);
        t.comment("axis1,lambda".into());
        t.push(vec![fmt_float(1.0), String::new()]);
        t.push(vec![fmt_float(2.0), "label".into()]);
        let csv = t.to_csv();
        assert!(csv.starts_with("# axis1,lambda\na,b\n"));
        assert!(csv.lines().skip(1).all(|l| l.split(',').count() == 2));
        let jl = t.to_jsonl();
        let rows: Vec<serde_json::Value> = jl.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert!(rows[0]["b"].is_null());
        assert_eq!(rows[1]["b"], "label");
    }
}
