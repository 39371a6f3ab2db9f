//! Report emission helpers: CSV files and aligned text tables, both
//! published atomically.

use std::path::Path;

use crate::jsonl::{atomic_write, JsonlError};

/// Render a fraction as a percentage with one decimal, the way the
/// benchmark tables print consistency and accuracy.
pub fn percent1(fraction: f64) -> String {
    format!("{:.1}", fraction * 100.0)
}

/// A plain aligned-text table.
#[derive(Debug, Clone)]
pub struct TextTable {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn new<S: Into<String>>(headers: Vec<S>) -> Self {
        Self { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push_row<S: Into<String>>(&mut self, row: Vec<S>) {
        let mut row: Vec<String> = row.into_iter().map(Into::into).collect();
        row.resize(self.headers.len(), String::new());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let render_row = |cells: &[String]| -> String {
            let mut line = String::new();
            for (i, (cell, width)) in cells.iter().zip(&widths).enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                line.push_str(cell);
                for _ in cell.chars().count()..*width {
                    line.push(' ');
                }
            }
            line.trim_end().to_string()
        };
        let mut out = render_row(&self.headers);
        out.push('\n');
        let rule_len = widths.iter().sum::<usize>() + 2 * (widths.len().saturating_sub(1));
        out.push_str(&"-".repeat(rule_len));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&render_row(row));
            out.push('\n');
        }
        out
    }
}

/// Write a CSV file atomically.
pub fn write_csv(
    path: &Path,
    headers: &[&str],
    rows: &[Vec<String>],
) -> Result<(), JsonlError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(headers).expect("in-memory csv");
    for row in rows {
        writer.write_record(row).expect("in-memory csv");
    }
    let bytes = writer.into_inner().expect("in-memory csv");
    atomic_write(path, &bytes)
}

/// Write an already-rendered text report atomically.
pub fn write_text(path: &Path, text: &str) -> Result<(), JsonlError> {
    atomic_write(path, text.as_bytes())
}
