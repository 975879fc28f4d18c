use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::CliError;

fn io_err(path: Option<&Path>, e: impl std::fmt::Display) -> CliError {
    match path {
        Some(p) => CliError::Io(format!("{}: {e}", p.display())),
        None => CliError::Io(format!("stdout: {e}")),
    }
}

/// Opens `path`, or stdout when `None`.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => Ok(Box::new(BufWriter::new(File::create(p).map_err(|e| io_err(Some(p), e))?))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(path, e))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

/// Writes one or more CSV tables, separated by a blank line.
pub fn write_csv_tables(path: Option<&Path>, tables: &[(Vec<String>, Vec<Vec<String>>)]) -> Result<(), CliError> {
    let mut w = sink(path)?;
    for (k, (header, rows)) in tables.iter().enumerate() {
        if k > 0 {
            writeln!(w).map_err(|e| io_err(path, e))?;
        }
        let mut csv = csv::Writer::from_writer(&mut w);
        csv.write_record(header).map_err(|e| io_err(path, e))?;
        for row in rows {
            csv.write_record(row).map_err(|e| io_err(path, e))?;
        }
        csv.flush().map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Human summary: stdout when the artifact goes to a file, stderr otherwise.
pub fn summary(artifact_path: Option<&Path>, line: &str) {
    if artifact_path.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}
