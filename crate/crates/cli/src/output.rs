//! Output plumbing shared by every subcommand: 15-significant-digit number
//! formatting, CSV assembly, JSON rendering, and the stdout-or-file
//! destination.
//!
//! CSV uses a `.` decimal separator, `\n` line endings, and a header row;
//! cells containing a delimiter, quote, or newline are quoted. Floats are
//! rendered in scientific notation so the digit count is the same at every
//! magnitude and independent of locale.

use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

/// Wire format selected with `--format`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// A float with 15 significant digits: one leading digit plus 14 fractional.
pub fn sig15(x: f64) -> String {
    format!("{x:.14e}")
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json(value: &impl Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    text
}

/// A fixed-header table of pre-rendered cells.
pub struct Table {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    /// Appends a row, which must match the header width.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width mismatch");
        self.rows.push(row);
    }

    /// Renders the table as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|cell| quote(cell)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Quotes a cell when its content would break the row apart.
fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Compacts an ascending candidate list: runs of four or more consecutive
/// values collapse to `lo..hi`, so a full brute-force scan range stays one
/// readable cell while short closed-form sets keep their explicit members.
pub fn candidate_list(values: &[u64]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let mut j = i;
        while j + 1 < values.len() && values[j + 1] == values[j] + 1 {
            j += 1;
        }
        if j - i >= 3 {
            parts.push(format!("{}..{}", values[i], values[j]));
        } else {
            for value in &values[i..=j] {
                parts.push(value.to_string());
            }
        }
        i = j + 1;
    }
    parts.join(",")
}

/// Writes the payload to the given file, or to stdout when there is none.
pub fn emit(output: Option<&Path>, payload: &str) -> io::Result<()> {
    match output {
        Some(path) => std::fs::write(path, payload),
        None => io::stdout().write_all(payload.as_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig15_keeps_fifteen_digits() {
        assert_eq!(sig15(0.645), "6.45000000000000e-1");
        assert_eq!(sig15(1.0), "1.00000000000000e0");
        assert_eq!(sig15(-0.5), "-5.00000000000000e-1");
    }

    #[test]
    fn candidate_lists_collapse_long_runs_only() {
        assert_eq!(candidate_list(&[10, 11]), "10,11");
        assert_eq!(candidate_list(&[14, 15, 16]), "14,15,16");
        assert_eq!(candidate_list(&[1, 2, 3, 4, 5]), "1..5");
        assert_eq!(candidate_list(&[1, 2, 3, 4, 9]), "1..4,9");
        assert_eq!(candidate_list(&[7]), "7");
    }

    #[test]
    fn quoting_protects_commas_and_quotes() {
        let mut table = Table::new(&["a", "b"]);
        table.push(vec!["10,11".into(), "plain".into()]);
        table.push(vec!["say \"hi\"".into(), "x".into()]);
        assert_eq!(
            table.to_csv(),
            "a,b\n\"10,11\",plain\n\"say \"\"hi\"\"\",x\n"
        );
    }
}
