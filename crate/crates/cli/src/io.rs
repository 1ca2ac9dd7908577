//! CSV tables and atomic file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

/// A numeric table read from a headed CSV.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column_index(&self, name: &str, path: &Path) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("{}: no column named '{name}'", path.display()))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

fn open(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(file))
}

fn location(path: &Path, rec: &csv::StringRecord) -> String {
    match rec.position() {
        Some(p) => format!("{}: line {}", path.display(), p.line()),
        None => path.display().to_string(),
    }
}

/// Reads raw string records, checking every row has the header's width.
pub fn read_records(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut rdr = open(path)?;
    let header: Vec<String> = rdr
        .headers()
        .with_context(|| format!("{}: malformed header", path.display()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        bail!("{}: empty header", path.display());
    }
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.with_context(|| format!("{}: malformed CSV", path.display()))?;
        if rec.len() != header.len() {
            bail!(
                "{}: expected {} columns, found {}",
                location(path, &rec),
                header.len(),
                rec.len()
            );
        }
        records.push(rec);
    }
    Ok((header, records))
}

pub fn parse_cell(path: &Path, rec: &csv::StringRecord, col: usize, name: &str) -> Result<f64> {
    let cell = &rec[col];
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => bail!("{}, column {} ({name}): '{cell}' is not a finite number", location(path, rec), col + 1),
    }
}

/// Reads a CSV whose cells are all numbers.
pub fn read_table(path: &Path) -> Result<Table> {
    let (header, records) = read_records(path)?;
    let mut rows = Vec::with_capacity(records.len());
    for rec in &records {
        let row = (0..header.len()).map(|j| parse_cell(path, rec, j, &header[j])).collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    Ok(Table { header, rows })
}

/// Shortest text that parses back to the same value.
pub fn num<T: std::fmt::Display>(v: T) -> String {
    v.to_string()
}

/// Collects CSV text in memory; written out in one atomic step.
pub struct CsvOut {
    wtr: csv::Writer<Vec<u8>>,
}

impl CsvOut {
    pub fn new() -> Self {
        Self { wtr: csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new()) }
    }

    pub fn row<I, S>(&mut self, fields: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        // writing into a Vec cannot fail
        self.wtr.write_record(fields).expect("in-memory CSV write");
        self
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.wtr.into_inner().expect("in-memory CSV flush")
    }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).with_context(|| format!("cannot write in {}", dir.display()))?;
    tmp.write_all(bytes).with_context(|| format!("cannot write {}", path.display()))?;
    tmp.as_file().sync_all().ok();
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            std::io::stdout().write_all(bytes).context("cannot write to stdout")?;
            Ok(())
        }
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}
