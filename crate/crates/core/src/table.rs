//! Shared CSV helpers: `# key=value` header comments followed by a headed
//! numeric table.

use std::io::Write;

use crate::error::{Error, Result};

/// Read a headed CSV (with optional `#` comment lines) whose columns must be
/// exactly `columns`, parsing every cell as a finite `f64`.
pub fn read_numeric_table(input: &[u8], columns: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.len() != columns.len() || headers.iter().zip(columns).any(|(h, c)| h != *c) {
        return Err(Error::Parse(format!(
            "expected columns {:?}, found {:?}",
            columns,
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|cell| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => Err(Error::Parse(format!("row {i}: non-finite value {cell:?}"))),
                Err(e) => Err(Error::Parse(format!("row {i}: {cell:?}: {e}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}


/// Parse `# key=value` lines at the top of a CSV text.
pub fn read_header_comments(text: &str) -> Vec<(String, String)> {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| {
            let (k, v) = l.trim_start_matches('#').trim().split_once('=')?;
            Some((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Write `# key=value` lines, a header row and rows of preformatted cells.
pub fn write_table<W: Write>(
    out: W,
    comments: &[(String, String)],
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut out = out;
    for (k, v) in comments {
        writeln!(out, "# {k}={v}").map_err(|e| Error::io("<csv>", e))?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// [`write_table`] for all-numeric rows. `f64` formatting is the shortest
/// representation that round-trips, so output is stable across runs.
pub fn write_numeric_table<W: Write>(
    out: W,
    comments: &[(String, String)],
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<()> {
    write_table(
        out,
        comments,
        columns,
        rows.into_iter().map(|r| r.iter().map(|v| v.to_string()).collect()),
    )
}
