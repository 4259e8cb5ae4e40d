//! CSV tables written into run directories.
//!
//! Floats are printed with 17 significant digits so they parse back to the
//! same bits; booleans as `true`/`false`.

use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schema {
    pub file: &'static str,
    pub columns: &'static [&'static str],
}

pub const FRAMES: Schema = Schema {
    file: "frames.csv",
    columns: &[
        "t",
        "energy",
        "enstrophy",
        "palinstrophy",
        "energy_L",
        "energy_S",
        "cross_energy",
        "asym",
        "sup_u",
        "dt",
    ],
};

pub const IMEASURE: Schema = Schema {
    file: "imeasure.csv",
    columns: &["t", "r0", "measure", "dtheta"],
};

pub const ZLATOS: Schema = Schema {
    file: "zlatos.csv",
    columns: &["t", "x1", "x2", "i", "u_over_x", "Q", "B", "bound", "exponent"],
};

pub const TRANSFER: Schema = Schema {
    file: "transfer.csv",
    columns: &["t", "energy_L", "energy_S", "cross", "lhs", "rhs", "pass"],
};

pub const PRESCRIBED: Schema = Schema {
    file: "prescribed.csv",
    columns: &["M", "t", "energy", "bound", "pass"],
};

pub const TRACERS: Schema = Schema {
    file: "tracers.csv",
    columns: &[
        "t", "label", "x0_1", "x0_2", "x_1", "x_2", "J11", "J12", "J21", "J22",
    ],
};

pub const EVENTS: Schema = Schema {
    file: "events.csv",
    columns: &["t", "label", "x0_1", "x0_2", "T_1", "T_2", "value", "M"],
};

pub const CLASSIFY: Schema = Schema {
    file: "classify.csv",
    columns: &["t", "fraction_low", "uncertainty", "case", "cumulative"],
};

pub const STABILITY: Schema = Schema {
    file: "stability.csv",
    columns: &["eps", "t", "stretch_diff", "jacobian_diff", "bound", "within_bound"],
};

pub const GLUING: Schema = Schema {
    file: "gluing.csv",
    columns: &["R", "t", "distance_s1", "distance_s2", "chi_distance_s1", "support_gap", "disjoint"],
};

pub const ALL: [Schema; 10] = [
    FRAMES, IMEASURE, ZLATOS, TRANSFER, PRESCRIBED, TRACERS, EVENTS, CLASSIFY, STABILITY, GLUING,
];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => fmt_f64(*v),
            Cell::I(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }
}

/// Append-only CSV table.
pub struct CsvSink {
    path: PathBuf,
    schema: Schema,
    writer: csv::Writer<File>,
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            reason: format!("{other:?}"),
        },
    }
}

impl CsvSink {
    /// Creates the table with its header; fails if the file exists.
    pub fn create(dir: &Path, schema: Schema) -> Result<Self> {
        let path = dir.join(schema.file);
        let file = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        let mut sink = Self::wrap(path, schema, file);
        sink.writer
            .write_record(schema.columns)
            .map_err(|e| csv_err(&sink.path, e))?;
        sink.flush()?;
        Ok(sink)
    }

    /// Opens an existing table for appending.
    pub fn append(dir: &Path, schema: Schema) -> Result<Self> {
        let path = dir.join(schema.file);
        let file = OpenOptions::new()
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(Self::wrap(path, schema, file))
    }

    fn wrap(path: PathBuf, schema: Schema, file: File) -> Self {
        let writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        Self {
            path,
            schema,
            writer,
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write_row(&mut self, row: &[Cell]) -> Result<()> {
        if row.len() != self.schema.columns.len() {
            return Err(Error::invalid(format!(
                "{} expects {} columns, got {}",
                self.schema.file,
                self.schema.columns.len(),
                row.len()
            )));
        }
        let rendered: Vec<String> = row.iter().map(Cell::render).collect();
        self.writer
            .write_record(&rendered)
            .map_err(|e| csv_err(&self.path, e))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.writer
            .flush()
            .map_err(|e| Error::io(&self.path, e))
    }
}

/// Header and rows of a CSV table, as strings.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = rdr
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_exact_floats() {
        let dir = tempfile::tempdir().unwrap();
        let mut sink = CsvSink::create(dir.path(), PRESCRIBED).unwrap();
        let e = 0.1f64 + 0.2;
        sink.write_row(&[2.0.into(), 1.0.into(), e.into(), 1e-300.into(), true.into()])
            .unwrap();
        assert!(sink.write_row(&[1.0.into()]).is_err());
        sink.flush().unwrap();
        let (h, rows) = read_table(&dir.path().join("prescribed.csv")).unwrap();
        assert_eq!(h, vec!["M", "t", "energy", "bound", "pass"]);
        assert_eq!(rows[0][2].parse::<f64>().unwrap().to_bits(), e.to_bits());
        assert_eq!(rows[0][2], "3.0000000000000004e-1");
        assert_eq!(rows[0][4], "true");
        assert!(CsvSink::create(dir.path(), PRESCRIBED).is_err());
    }

    #[test]
    fn append_continues_a_table() {
        let dir = tempfile::tempdir().unwrap();
        CsvSink::create(dir.path(), IMEASURE).unwrap();
        let mut s = CsvSink::append(dir.path(), IMEASURE).unwrap();
        s.write_row(&[0.0.into(), 0.2.into(), 0.5.into(), 0.01.into()]).unwrap();
        s.flush().unwrap();
        let (_, rows) = read_table(&dir.path().join("imeasure.csv")).unwrap();
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn documented_columns() {
        assert_eq!(
            TRACERS.columns,
            &["t", "label", "x0_1", "x0_2", "x_1", "x_2", "J11", "J12", "J21", "J22"]
        );
        assert_eq!(EVENTS.columns, &["t", "label", "x0_1", "x0_2", "T_1", "T_2", "value", "M"]);
        assert_eq!(
            ZLATOS.columns,
            &["t", "x1", "x2", "i", "u_over_x", "Q", "B", "bound", "exponent"]
        );
        assert_eq!(TRANSFER.columns, &["t", "energy_L", "energy_S", "cross", "lhs", "rhs", "pass"]);
        assert_eq!(
            FRAMES.columns,
            &crate::evolution::DiagnosticsFrame::COLUMNS[..]
        );
    }
}
