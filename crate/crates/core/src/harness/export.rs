//! Line-delimited JSON and CSV output.
//!
//! Floating-point numbers are written with 17 significant digits, enough to
//! round-trip every `f64`. Non-finite numbers become JSON `null`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::dioph::ExponentWitness;
use crate::error::{Error, Result};
use crate::lognum::{FieldValue, LogScalar};
use crate::tuples::ExponentVector;
use crate::witness::{OrbitPoint, WitnessRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(Error::invalid(format!("unknown format {other:?}, expected json or csv"))),
        }
    }
}

struct Fmt17;

impl serde_json::ser::Formatter for Fmt17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if v.is_finite() {
            write!(w, "{v:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }
}

/// One JSON document on a single line, without the newline.
pub fn to_json_line<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fmt17);
    value.serialize(&mut ser).map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

/// A record with a CSV row representation.
pub trait CsvRecord {
    fn csv_row(&self) -> Vec<String>;
}

fn join<V: FieldValue>(v: &[V]) -> String {
    v.iter().map(|x| x.fmt17()).collect::<Vec<_>>().join(";")
}

fn join_exponents(k: &ExponentVector) -> String {
    k.exps().iter().map(|e| e.to_string()).collect::<Vec<_>>().join(";")
}

fn fmt_f64(x: f64) -> String {
    crate::lognum::fmt_f64(x)
}

pub const WITNESS_HEADER: [&str; 6] = ["i", "x_i", "K_i", "image", "image_error", "base_error"];
pub const EXPONENT_WITNESS_HEADER: [&str; 5] = ["exponents", "value", "target", "abs_error", "exhausted"];

impl<S: LogScalar> CsvRecord for WitnessRecord<S> {
    fn csv_row(&self) -> Vec<String> {
        vec![
            self.index.to_string(),
            join(&self.point_values()),
            join_exponents(&self.exponents),
            join(&self.image_values()),
            fmt_f64(self.image_error),
            fmt_f64(self.base_error),
        ]
    }
}

impl<S: LogScalar> CsvRecord for ExponentWitness<S> {
    fn csv_row(&self) -> Vec<String> {
        vec![
            join_exponents(&self.exponents),
            join(&self.values()),
            join(&self.target),
            fmt_f64(self.abs_error),
            self.exhausted.to_string(),
        ]
    }
}

impl<V: FieldValue> CsvRecord for OrbitPoint<V> {
    fn csv_row(&self) -> Vec<String> {
        let mut coords = Vec::new();
        for v in &self.point {
            v.push_real_coords(&mut coords);
        }
        let mut row = vec![join_exponents(&self.exponents)];
        row.extend(coords.into_iter().map(fmt_f64));
        row
    }
}

/// Header of an orbit CSV: `K` followed by one column per real coordinate.
pub fn orbit_header(dim: usize, complex: bool) -> Vec<String> {
    let mut h = vec!["K".to_string()];
    for j in 1..=dim {
        if complex {
            h.push(format!("re{j}"));
            h.push(format!("im{j}"));
        } else {
            h.push(format!("x{j}"));
        }
    }
    h
}

pub fn write_json_lines<T: Serialize, W: Write>(records: &[T], mut out: W) -> Result<()> {
    for r in records {
        let line = to_json_line(r)?;
        writeln!(out, "{line}").map_err(stream_error)?;
    }
    out.flush().map_err(stream_error)
}

pub fn write_csv<R: CsvRecord, W: Write, H: AsRef<str>>(records: &[R], header: &[H], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(header.iter().map(|h| h.as_ref())).map_err(fail)?;
    for r in records {
        w.write_record(r.csv_row()).map_err(fail)?;
    }
    w.flush().map_err(stream_error)
}

fn stream_error(source: io::Error) -> Error {
    Error::Io {
        path: "<stream>".into(),
        source,
    }
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    }
}

/// Write `records` to `destination`: one JSON document per line, or a CSV
/// with `header`. An empty list gives an empty JSON file or a header-only CSV.
pub fn export_records<R, H>(records: &[R], header: &[H], format: ExportFormat, destination: &Path) -> Result<()>
where
    R: Serialize + CsvRecord,
    H: AsRef<str>,
{
    let file = File::create(destination).map_err(|source| Error::Io {
        path: destination.to_path_buf(),
        source,
    })?;
    let out = BufWriter::new(file);
    match format {
        ExportFormat::Json => write_json_lines(records, out),
        ExportFormat::Csv => write_csv(records, header, out),
    }
    .map_err(|e| with_path(destination, e))
}

/// Real coordinates from a CSV with a header row. A leading `K` column is
/// skipped. Returns the points and their dimension.
pub fn read_points_csv(path: &Path) -> Result<(Vec<Vec<f64>>, usize)> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rdr = csv::Reader::from_reader(file);
    let header = rdr
        .headers()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
        .clone();
    let skip = usize::from(header.get(0) == Some("K"));
    let dim = header.len() - skip;
    if dim == 0 {
        return Err(Error::invalid(format!("{}: no coordinate columns", path.display())));
    }
    let mut points = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let p = rec
            .iter()
            .skip(skip)
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format(format!("{}: row {}: {e}", path.display(), line + 1)))?;
        points.push(p);
    }
    Ok((points, dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dioph::{two_gen_solve, SearchConfig};
    use crate::lognum::LogSignScalar;
    use crate::tuples::{MatrixTuple, TupleRecipe};
    use crate::witness::{jset_witness, orbit_points};
    use crate::Execution;

    #[test]
    fn floats_round_trip() {
        let xs = [0.1, 1.0 / 3.0, -2.5e-300, f64::MAX, 5e-324];
        let line = to_json_line(&xs).unwrap();
        let back: Vec<f64> = serde_json::from_str(&line).unwrap();
        assert_eq!(back, xs);
        assert_eq!(to_json_line(&[f64::NAN, f64::INFINITY]).unwrap(), "[null,null]");
        assert_eq!(to_json_line(&1.0).unwrap(), "1.0000000000000000e0");
    }

    #[test]
    fn exponent_witness_line() {
        let w = two_gen_solve(-0.5, 3.0, 1.0, &SearchConfig::with_epsilon(0.05)).unwrap();
        let line = to_json_line(&w).unwrap();
        assert!(!line.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 5);
        for k in EXPONENT_WITNESS_HEADER {
            assert!(keys.contains(&k), "{k}");
        }
    }

    #[test]
    fn witness_csv_shape() {
        let t = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::diag_real(2, -0.5, 3.0)).unwrap();
        let seq = jset_witness(&t, 1.0, &[1.0, 2.0], &[0.1, 0.01, 0.001]).unwrap();
        let mut buf = Vec::new();
        write_csv(&seq.records, &WITNESS_HEADER, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "i,x_i,K_i,image,image_error,base_error");
        for l in &lines[1..] {
            assert_eq!(l.split(',').count(), 6);
        }
    }

    #[test]
    fn empty_exports() {
        let dir = tempfile::tempdir().unwrap();
        let json = dir.path().join("e.jsonl");
        let csv = dir.path().join("e.csv");
        let none: Vec<OrbitPoint<f64>> = Vec::new();
        export_records(&none, &orbit_header(1, false), ExportFormat::Json, &json).unwrap();
        export_records(&none, &orbit_header(1, false), ExportFormat::Csv, &csv).unwrap();
        assert_eq!(std::fs::read_to_string(json).unwrap(), "");
        assert_eq!(std::fs::read_to_string(csv).unwrap(), "K,x1\n");
    }

    #[test]
    fn orbit_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("orbit.csv");
        let t = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::kronecker(2)).unwrap();
        let orbit = orbit_points(&t, &[1.0, 1.0], 12, 10.0, Execution::Parallel).unwrap();
        export_records(&orbit.points, &orbit_header(2, false), ExportFormat::Csv, &path).unwrap();
        let (points, dim) = read_points_csv(&path).unwrap();
        assert_eq!(dim, 2);
        let expected: Vec<Vec<f64>> = orbit.points.iter().map(|p| p.point.clone()).collect();
        assert_eq!(points, expected);
    }

    #[test]
    fn io_errors_carry_the_path() {
        let path = Path::new("/nonexistent-dir/out.csv");
        let none: Vec<OrbitPoint<f64>> = Vec::new();
        let err = export_records(&none, &orbit_header(1, false), ExportFormat::Csv, path).unwrap_err();
        match err {
            Error::Io { path: p, .. } => assert_eq!(p, path),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_points_csv(path), Err(Error::Io { .. })));
    }
}
