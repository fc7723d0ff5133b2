use std::path::Path;

use crate::error::{domain, CliResult};

/// A labeled numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl PlotTable {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// CSV with a header row, columns in the order given.
pub fn emit_plot_data(table: &PlotTable, path: &Path) -> CliResult<()> {
    if table.headers.is_empty() || table.rows.is_empty() {
        return Err(domain("plot table is empty"));
    }
    if table.rows.iter().any(|r| r.len() != table.headers.len()) {
        return Err(domain("plot table rows do not match the header"));
    }
    let io = |e: csv::Error| domain(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(&table.headers).map_err(io)?;
    for r in &table.rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush()
        .map_err(|e| domain(format!("cannot write {}: {e}", path.display())))
}
