use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Destination and encoding of a command's main output.
pub struct Sink {
    path: Option<PathBuf>,
    format: Format,
}

impl Sink {
    pub fn new(path: Option<PathBuf>, format: Format) -> Self {
        Self { path, format }
    }

    fn open(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    /// Writes a table: CSV with a header row, or a JSON array.
    pub fn rows<T: Serialize>(&self, rows: &[T]) -> Result<()> {
        let mut w = self.open()?;
        match self.format {
            Format::Csv => {
                let mut csv = csv::Writer::from_writer(&mut w);
                for row in rows {
                    csv.serialize(row)?;
                }
                csv.flush()?;
            }
            Format::Json => {
                serde_json::to_writer(&mut w, rows)?;
                writeln!(w)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&self, value: &T) -> Result<()> {
        let mut w = self.open()?;
        serde_json::to_writer(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// `value` as JSON, or `rows` as CSV.
    pub fn emit<T: Serialize, R: Serialize>(&self, value: &T, rows: &[R]) -> Result<()> {
        match self.format {
            Format::Csv => self.rows(rows),
            Format::Json => self.json(value),
        }
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, format!("{text}\n")).with_context(|| format!("cannot write {}", path.display()))
}
