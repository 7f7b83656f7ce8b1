//! Reading and writing tables as labelled CSV or JSON.
//!
//! CSV layout: a header row with the R category labels (an optional empty
//! leading cell is allowed), then R rows each holding a label followed by R
//! non-negative integer counts. Row labels must repeat the header in order.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::table::ContingencyTable;

fn malformed(line: usize, message: impl Into<String>) -> Error {
    Error::MalformedCsv {
        line,
        message: message.into(),
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        _ => malformed(line, e.to_string()),
    }
}

pub fn parse_table_csv<R: Read>(reader: R) -> Result<ContingencyTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(r) => r.map_err(csv_error)?,
        None => return Err(malformed(1, "empty input, expected a header of labels")),
    };
    let header_line = header.position().map_or(1, |p| p.line() as usize);
    let mut labels: Vec<String> = header.iter().map(str::to_owned).collect();
    if labels.len() > 1 && labels[0].is_empty() {
        labels.remove(0);
    }
    if let Some(k) = labels.iter().position(String::is_empty) {
        return Err(malformed(header_line, format!("empty label in header column {}", k + 1)));
    }
    let size = labels.len();

    let mut counts = Vec::with_capacity(size);
    let mut last_line = header_line;
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        last_line = line;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let position = counts.len();
        if position == size {
            return Err(malformed(line, format!("more than {size} data rows")));
        }
        if record.len() != size + 1 {
            return Err(malformed(
                line,
                format!("expected a label and {size} counts, found {} fields", record.len()),
            ));
        }
        let label = &record[0];
        if label != labels[position] {
            return Err(Error::LabelOrderMismatch {
                position: position + 1,
                expected: labels[position].clone(),
                found: label.to_owned(),
            });
        }
        let row = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(col, field)| {
                field.parse::<i64>().map_err(|_| {
                    malformed(
                        line,
                        format!("cell ({label}, {}) is not an integer: {field:?}", labels[col]),
                    )
                })
            })
            .collect::<Result<Vec<i64>>>()?;
        counts.push(row);
    }
    if counts.len() != size {
        return Err(malformed(
            last_line + 1,
            format!("expected {size} data rows, found {}", counts.len()),
        ));
    }
    ContingencyTable::new(labels, counts)
}

pub fn write_table_csv<W: Write>(t: &ContingencyTable, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    w.write_record(t.labels()).map_err(csv_error)?;
    for (label, row) in t.labels().iter().zip(t.counts()) {
        let mut record = vec![label.clone()];
        record.extend(row.iter().map(u64::to_string));
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn table_to_csv_string(t: &ContingencyTable) -> String {
    let mut buf = Vec::new();
    write_table_csv(t, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("labels are UTF-8")
}

/// Parses a table from text, accepting JSON (`{"labels": ..., "counts": ...}`)
/// when the body starts with `{` and CSV otherwise.
pub fn parse_table_str(text: &str) -> Result<ContingencyTable> {
    if text.trim_start().starts_with('{') {
        // table validation errors arrive here as serde custom messages
        serde_json::from_str(text)
            .map_err(|e| malformed(e.line(), format!("invalid JSON table: {e}")))
    } else {
        parse_table_csv(text.as_bytes())
    }
}

pub fn read_table(path: &Path) -> Result<ContingencyTable> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_table_str(&text)
}
