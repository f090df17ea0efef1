//! Tabular input for the CLI: comma- or tab-separated text, with or
//! without a header row.
//!
//! Paired statistics read two numeric columns per row. Grouped
//! statistics read long format, one `(value, group)` row per
//! observation, with groups ordered by first appearance.

use std::fmt;
use std::fs;
use std::path::Path;

/// A cell- or file-level ingestion error with 1-based coordinates
/// where they apply.
#[derive(Debug)]
pub struct InputError {
    pub message: String,
    pub row: Option<usize>,
    pub column: Option<usize>,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.row, self.column) {
            (Some(r), Some(c)) => write!(f, "{} (row {}, column {})", self.message, r, c),
            (Some(r), None) => write!(f, "{} (row {})", self.message, r),
            _ => write!(f, "{}", self.message),
        }
    }
}

impl InputError {
    fn file(message: impl Into<String>) -> Self {
        InputError {
            message: message.into(),
            row: None,
            column: None,
        }
    }

    fn cell(message: impl Into<String>, row: usize, column: usize) -> Self {
        InputError {
            message: message.into(),
            row: Some(row),
            column: Some(column),
        }
    }
}

/// Two numeric columns, row-aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedColumns {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Long-format data: values with group labels in first-appearance order.
#[derive(Debug, Clone, PartialEq)]
pub struct LongColumns {
    pub group_names: Vec<String>,
    pub groups: Vec<Vec<f64>>,
}

fn sniff_delimiter(text: &str) -> u8 {
    match text.lines().next() {
        Some(line) if line.contains('\t') => b'\t',
        _ => b',',
    }
}

fn read_rows(path: &Path) -> Result<Vec<Vec<String>>, InputError> {
    let text = fs::read_to_string(path)
        .map_err(|e| InputError::file(format!("cannot read {}: {}", path.display(), e)))?;
    let delimiter = sniff_delimiter(&text);
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| InputError::file(format!("malformed row {}: {}", i + 1, e)))?;
        let cells: Vec<String> = record.iter().map(|s| s.trim().to_string()).collect();
        if cells.iter().all(|c| c.is_empty()) {
            continue;
        }
        rows.push(cells);
    }
    if rows.is_empty() {
        return Err(InputError::file(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

fn cell<'a>(
    rows: &'a [Vec<String>],
    row_idx: usize,
    col_idx: usize,
) -> Result<&'a str, InputError> {
    rows[row_idx].get(col_idx).map(|s| s.as_str()).ok_or_else(|| {
        InputError::cell(
            format!(
                "row has {} columns, need column {}",
                rows[row_idx].len(),
                col_idx + 1
            ),
            row_idx + 1,
            col_idx + 1,
        )
    })
}

fn parse_value(raw: &str, row_idx: usize, col_idx: usize) -> Result<f64, InputError> {
    let value: f64 = raw.parse().map_err(|_| {
        InputError::cell(
            format!("expected a number, got {:?}", raw),
            row_idx + 1,
            col_idx + 1,
        )
    })?;
    if !value.is_finite() {
        return Err(InputError::cell(
            format!("non-finite value {:?}", raw),
            row_idx + 1,
            col_idx + 1,
        ));
    }
    Ok(value)
}

/// A row counts as a header when the cells that must hold numbers do not
/// parse as numbers.
fn is_header(rows: &[Vec<String>], numeric_cols: &[usize]) -> bool {
    numeric_cols.iter().any(|&c| {
        rows[0]
            .get(c)
            .map_or(false, |raw| raw.parse::<f64>().is_err())
    })
}

/// Reads two numeric columns (`cols`, 0-based) from `path`.
pub fn read_paired(path: &Path, cols: (usize, usize)) -> Result<PairedColumns, InputError> {
    let rows = read_rows(path)?;
    let start = if is_header(&rows, &[cols.0, cols.1]) { 1 } else { 0 };
    if start >= rows.len() {
        return Err(InputError::file(format!(
            "{}: header only, no data rows",
            path.display()
        )));
    }
    let mut x = Vec::with_capacity(rows.len() - start);
    let mut y = Vec::with_capacity(rows.len() - start);
    for i in start..rows.len() {
        x.push(parse_value(cell(&rows, i, cols.0)?, i, cols.0)?);
        y.push(parse_value(cell(&rows, i, cols.1)?, i, cols.1)?);
    }
    Ok(PairedColumns { x, y })
}

/// Reads long-format `(value, group)` rows from `path`; `cols` gives the
/// 0-based (value, group) column indices.
pub fn read_long(path: &Path, cols: (usize, usize)) -> Result<LongColumns, InputError> {
    let rows = read_rows(path)?;
    let start = if is_header(&rows, &[cols.0]) { 1 } else { 0 };
    if start >= rows.len() {
        return Err(InputError::file(format!(
            "{}: header only, no data rows",
            path.display()
        )));
    }
    let mut group_names: Vec<String> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for i in start..rows.len() {
        let value = parse_value(cell(&rows, i, cols.0)?, i, cols.0)?;
        let label = cell(&rows, i, cols.1)?;
        if label.is_empty() {
            return Err(InputError::cell(
                "empty group label".to_string(),
                i + 1,
                cols.1 + 1,
            ));
        }
        let slot = match group_names.iter().position(|g| g == label) {
            Some(j) => j,
            None => {
                group_names.push(label.to_string());
                groups.push(Vec::new());
                group_names.len() - 1
            }
        };
        groups[slot].push(value);
    }
    Ok(LongColumns {
        group_names,
        groups,
    })
}
