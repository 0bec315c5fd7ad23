//! CSV and metadata files. Floats are written with 17 significant digits so
//! a write/read cycle reproduces every value exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::samplers::TraceRow;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a matrix with header `x1,...,xd`.
pub fn write_matrix_csv(path: &Path, m: &Array2<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record((1..=m.ncols()).map(|j| format!("x{j}")))?;
    for row in m.rows() {
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a numeric CSV with a header row.
pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let d = r.headers()?.len();
    let mut data = Vec::new();
    let mut n = 0;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != d {
            return Err(Error::Parse(format!(
                "{}: row {} has {} fields, expected {d}",
                path.display(),
                i + 1,
                rec.len()
            )));
        }
        for field in rec.iter() {
            let v = field.trim().parse::<f64>().map_err(|_| {
                Error::Parse(format!("{}: row {}: {field:?} is not a number", path.display(), i + 1))
            })?;
            data.push(v);
        }
        n += 1;
    }
    Array2::from_shape_vec((n, d), data).map_err(|e| Error::Shape(e.to_string()))
}

/// `iteration,metric,value`
pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "metric", "value"])?;
    for r in rows {
        w.write_record([r.iteration.to_string(), r.metric.clone(), fmt_f64(r.value)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| Error::Parse(e.to_string()))?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}
