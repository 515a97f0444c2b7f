//! CSV artifacts. Every file starts with a schema line `# epw-csv v1 <scenario>`
//! followed by a header row.

use crate::error::Result;
use std::io::Write;

pub const CSV_VERSION: &str = "v1";

pub fn schema_line(scenario: &str) -> String {
    format!("# epw-csv {CSV_VERSION} {scenario}")
}

/// CSV writer positioned after the schema line; the caller writes the header row.
pub fn csv_writer<W: Write>(mut w: W, scenario: &str) -> Result<csv::Writer<W>> {
    writeln!(w, "{}", schema_line(scenario))?;
    Ok(csv::WriterBuilder::new().has_headers(false).from_writer(w))
}

/// Writes a whole table: schema line, header and rows.
pub fn write_table<W, R>(w: W, scenario: &str, header: &[&str], rows: &[R]) -> Result<()>
where
    W: Write,
    R: serde::Serialize,
{
    let mut out = csv_writer(w, scenario)?;
    out.write_record(header).map_err(std::io::Error::from)?;
    for r in rows {
        out.serialize(r).map_err(std::io::Error::from)?;
    }
    out.flush()?;
    Ok(())
}
