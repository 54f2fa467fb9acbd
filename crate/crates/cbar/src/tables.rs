//! Comma-separated tables: error tables in, result tables out.
//!
//! Error tables have the header `corruption,severity,error` with errors
//! in percent. An optional leading comment `# baseline=<name>` names the
//! model that produced them; other `#` lines are ignored.
//!
//! Per-scheme error tables, used for correlation, have the header
//! `scheme,corruption,error`, where `corruption` is `<name>/<severity>`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use cbar_core::benchmark::ErrorTable;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Serialize, Deserialize)]
struct ErrorRow {
    corruption: String,
    severity: u8,
    error: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SchemeErrorRow {
    scheme: String,
    corruption: String,
    error: f64,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, want: &[&str], what: &str) -> Result<()> {
    let h = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("{what}: {e}")))?;
    if !h.iter().eq(want.iter().copied()) {
        return Err(CliError::Data(format!(
            "{what}: header must be `{}`, found `{}`",
            want.join(","),
            h.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

pub fn parse_error_table(text: &str) -> Result<ErrorTable> {
    let baseline = text
        .lines()
        .take_while(|l| l.trim_start().starts_with('#') || l.trim().is_empty())
        .find_map(|l| {
            l.trim_start()
                .trim_start_matches('#')
                .trim()
                .strip_prefix("baseline=")
        })
        .map(|b| b.trim().to_string());
    let mut table = ErrorTable::new(baseline);
    let mut rdr = csv_reader(text);
    check_header(
        &mut rdr,
        &["corruption", "severity", "error"],
        "error table",
    )?;
    for (i, row) in rdr.deserialize::<ErrorRow>().enumerate() {
        let row = row.map_err(|e| CliError::Data(format!("error table row {}: {e}", i + 1)))?;
        if table.get(&row.corruption, row.severity).is_ok() {
            return Err(CliError::Data(format!(
                "error table lists {}/{} twice",
                row.corruption, row.severity
            )));
        }
        table
            .insert(&row.corruption, row.severity, row.error)
            .map_err(|e| CliError::Data(e.to_string()))?;
    }
    Ok(table)
}

pub fn read_error_table(path: &Path) -> Result<ErrorTable> {
    parse_error_table(&read_text(path)?).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_error_table(w: &mut impl Write, table: &ErrorTable) -> Result<()> {
    let mut out = Vec::new();
    if let Some(b) = &table.baseline {
        writeln!(out, "# baseline={b}").expect("in-memory write");
    }
    let mut wtr = csv::Writer::from_writer(&mut out);
    for (c, s, e) in table.iter() {
        wtr.serialize(ErrorRow {
            corruption: c.to_string(),
            severity: s,
            error: e,
        })
        .map_err(|e| CliError::Data(e.to_string()))?;
    }
    wtr.flush().expect("in-memory write");
    drop(wtr);
    w.write_all(&out).map_err(|e| CliError::Data(e.to_string()))
}

/// `(scheme, corruption) -> error`.
pub fn read_scheme_errors(path: &Path) -> Result<BTreeMap<(String, String), f64>> {
    let text = read_text(path)?;
    let mut rdr = csv_reader(&text);
    let what = path.display().to_string();
    check_header(&mut rdr, &["scheme", "corruption", "error"], &what)?;
    let mut out = BTreeMap::new();
    for (i, row) in rdr.deserialize::<SchemeErrorRow>().enumerate() {
        let row = row.map_err(|e| CliError::Data(format!("{what} row {}: {e}", i + 1)))?;
        if !row.error.is_finite() {
            return Err(CliError::Data(format!(
                "{what} row {}: non-finite error",
                i + 1
            )));
        }
        if out
            .insert((row.scheme, row.corruption), row.error)
            .is_some()
        {
            return Err(CliError::Data(format!(
                "{what} row {}: duplicate entry",
                i + 1
            )));
        }
    }
    Ok(out)
}

/// CSV output with a fixed header.
pub struct TableWriter {
    inner: csv::Writer<Box<dyn Write>>,
    target: PathBuf,
}

impl TableWriter {
    /// Writes to `path`, or stdout when `path` is `None`.
    pub fn create(path: Option<&Path>, header: &[&str]) -> Result<Self> {
        let target = path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf);
        let sink: Box<dyn Write> = match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                }
                Box::new(std::io::BufWriter::new(
                    std::fs::File::create(p).map_err(|e| CliError::io(p, e))?,
                ))
            }
            None => Box::new(std::io::stdout().lock()),
        };
        let mut w = Self {
            inner: csv::Writer::from_writer(sink),
            target,
        };
        w.row(header)?;
        Ok(w)
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields).map_err(|e| {
            if !e.is_io_error() {
                return CliError::Data(e.to_string());
            }
            match e.into_kind() {
                csv::ErrorKind::Io(io) => CliError::io(&self.target, io),
                _ => unreachable!("checked is_io_error"),
            }
        })
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| CliError::io(&self.target, e))
    }
}

/// Shortest round-trip decimal form; `nan` for undefined values.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}
