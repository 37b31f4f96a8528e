//! CSV emission: fixed column sets, 17-significant-digit numbers, and
//! `#`-prefixed footer comments (config hash, convergence diagnostics) so the
//! files stay loadable by standard plotting tools.

use std::path::Path;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CsvReport {
    columns: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
    footer: Vec<String>,
}

impl CsvReport {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new(), footer: Vec::new() }
    }

    /// Appends a data row; `None` renders as an empty cell.
    pub fn push_row(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(row.len(), self.columns.len(), "column count is fixed per report");
        self.rows.push(row);
    }

    pub fn push_footer<S: Into<String>>(&mut self, line: S) {
        self.footer.push(line.into());
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|cell| match cell {
                    Some(v) => format!("{v:.16e}"),
                    None => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for line in &self.footer {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}
