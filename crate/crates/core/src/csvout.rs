use std::io::Write;

use crate::error::{Error, Result};

/// Writes a header row followed by one row per record, quoting as needed.
pub(crate) fn write_matrix<W: Write>(
    w: W,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for row in rows {
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        }
    } else {
        let line = e.position().map(|p| format!("line {}: ", p.line())).unwrap_or_default();
        Error::Format(format!("{line}{e}"))
    }
}
