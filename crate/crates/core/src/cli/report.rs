//! Report rendering: aligned tables, structured JSON, CSV.
//!
//! Rational quantities appear twice everywhere: exactly (`p/q`) and as a
//! decimal rounded to the configured number of significant digits. Output
//! is deterministic: identical inputs render byte-identically.

use serde_json::{json, Value};

use super::document::{decimal_string, render_rational};
use crate::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Structured,
    Csv,
}

/// One titled table of string cells.
#[derive(Debug, Clone)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }
}

/// A rendered report: human tables plus one structured JSON body.
#[derive(Debug, Clone)]
pub struct Report {
    pub kind: String,
    pub tables: Vec<Table>,
    pub structured: Value,
}

impl Report {
    pub fn new(kind: impl Into<String>) -> Self {
        Report { kind: kind.into(), tables: Vec::new(), structured: Value::Null }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.render_table(),
            Format::Structured => {
                let mut s = serde_json::to_string_pretty(&self.structured).expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => self.render_csv(),
        }
    }

    fn render_table(&self) -> String {
        let mut out = String::new();
        for table in &self.tables {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&table.title);
            out.push('\n');
            let mut widths: Vec<usize> = table.columns.iter().map(|c| c.len()).collect();
            for row in &table.rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.len());
                }
            }
            let line = |cells: &[String]| -> String {
                let mut s = String::new();
                for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
                    if i > 0 {
                        s.push_str("  ");
                    }
                    s.push_str(cell);
                    if i + 1 < cells.len() {
                        s.push_str(&" ".repeat(w - cell.len()));
                    }
                }
                s.push('\n');
                s
            };
            out.push_str(&line(&table.columns));
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len().max(1) - 1)));
            out.push('\n');
            for row in &table.rows {
                out.push_str(&line(row));
            }
        }
        out
    }

    fn render_csv(&self) -> String {
        fn escape(cell: &str) -> String {
            if cell.contains([',', '"', '\n']) {
                format!("\"{}\"", cell.replace('"', "\"\""))
            } else {
                cell.to_string()
            }
        }
        let mut out = String::new();
        for table in &self.tables {
            out.push_str(&format!("# {}\n", table.title));
            out.push_str(&table.columns.iter().map(|c| escape(c)).collect::<Vec<_>>().join(","));
            out.push('\n');
            for row in &table.rows {
                out.push_str(&row.iter().map(|c| escape(c)).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
        }
        out
    }
}

/// Structured JSON value for a rational: exact string plus decimal column.
pub fn rat_json(r: &Rat, precision: u32) -> Value {
    json!({ "exact": render_rational(r), "decimal": decimal_string(r, precision) })
}

/// Table cells for a rational: exact and decimal.
pub fn rat_cells(r: &Rat, precision: u32) -> [String; 2] {
    [render_rational(r), decimal_string(r, precision)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    #[test]
    fn renders_all_formats_deterministically() {
        let mut report = Report::new("demo");
        let mut t = Table::new("numbers", &["name", "exact", "decimal"]);
        let [e, d] = rat_cells(&Rat::from_ratio(81, 4), 6);
        t.row(vec!["welfare, targeted".into(), e, d]);
        report.tables.push(t);
        report.structured = json!({ "welfare": rat_json(&Rat::from_ratio(81, 4), 6) });

        let table = report.render(Format::Table);
        assert!(table.contains("81/4"));
        assert!(table.contains("20.25"));
        let csv = report.render(Format::Csv);
        assert!(csv.contains("\"welfare, targeted\",81/4,20.25"));
        let js = report.render(Format::Structured);
        assert_eq!(js, report.render(Format::Structured));
        assert!(js.contains("\"exact\": \"81/4\""));
    }
}
