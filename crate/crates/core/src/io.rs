//! Headered CSV persistence for matrices, point clouds, labels and traces.
//!
//! Matrices are written one row per line behind a leading `index` column.
//! Values use the shortest decimal form that parses back to the same `f64`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::data::PointCloud;
use crate::error::{Error, Result};
use crate::types::{validate_target, TargetMatrix, TraceRecord};

pub const TRACE_HEADER: [&str; 5] = ["epoch", "stress", "radius", "evals", "elapsed_ms"];

fn csv_err(e: csv::Error) -> Error {
    let offset = e.position().map_or(0, |p| p.byte());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format { offset, reason: format!("{other:?}") },
    }
}

/// Writes `m` with columns `index,{prefix}0,{prefix}1,…` plus `extra`
/// trailing columns taken from `extra_values` (one value per row each).
fn write_rows<W: Write>(
    w: W,
    prefix: &str,
    m: ArrayView2<'_, f64>,
    extra: &[(&str, &[f64])],
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["index".to_string()];
    header.extend((0..m.ncols()).map(|j| format!("{prefix}{j}")));
    header.extend(extra.iter().map(|(name, _)| name.to_string()));
    out.write_record(&header).map_err(csv_err)?;
    let mut record = Vec::with_capacity(header.len());
    for (i, row) in m.rows().into_iter().enumerate() {
        record.clear();
        record.push(i.to_string());
        record.extend(row.iter().map(|v| v.to_string()));
        record.extend(extra.iter().map(|(_, vals)| vals[i].to_string()));
        out.write_record(&record).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Parsed CSV: header without the index column, and the numeric body.
fn read_rows<R: Read>(r: R) -> Result<(Vec<String>, Array2<f64>)> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header.first().map(String::as_str) != Some("index") {
        return Err(Error::Format { offset: 0, reason: "first column must be `index`".into() });
    }
    let width = header.len() - 1;
    let mut values = Vec::new();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let offset = rec.position().map_or(0, |p| p.byte());
        let idx: usize = rec[0].trim().parse().map_err(|_| Error::Format {
            offset,
            reason: format!("bad row index {:?}", &rec[0]),
        })?;
        if idx != rows {
            return Err(Error::Format { offset, reason: format!("expected row index {rows}, found {idx}") });
        }
        for field in rec.iter().skip(1) {
            let v: f64 = field.trim().parse().map_err(|_| Error::Format {
                offset,
                reason: format!("row {rows}: bad number {field:?}"),
            })?;
            values.push(v);
        }
        rows += 1;
    }
    let m = Array2::from_shape_vec((rows, width), values).expect("csv enforces equal widths");
    Ok((header[1..].to_vec(), m))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_matrix(path: impl AsRef<Path>, prefix: &str, m: ArrayView2<'_, f64>) -> Result<()> {
    write_rows(create(path.as_ref())?, prefix, m, &[])
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    Ok(read_rows(File::open(path)?)?.1)
}

pub fn write_target(path: impl AsRef<Path>, t: &TargetMatrix) -> Result<()> {
    write_matrix(path, "t", t.values())
}

pub fn read_target(path: impl AsRef<Path>) -> Result<TargetMatrix> {
    validate_target(read_matrix(path)?.view())
}

pub fn write_point_cloud(path: impl AsRef<Path>, cloud: &PointCloud) -> Result<()> {
    write_rows(create(path.as_ref())?, "x", cloud.view(), &[("aux", &cloud.aux)])
}

/// Reads a point cloud; the `aux` column is optional and defaults to zeros.
pub fn read_point_cloud(path: impl AsRef<Path>) -> Result<PointCloud> {
    let (header, m) = read_rows(File::open(path)?)?;
    if header.last().map(String::as_str) == Some("aux") {
        let cols = m.ncols() - 1;
        let aux = m.column(cols).to_vec();
        let points = m.slice(ndarray::s![.., ..cols]).to_owned();
        PointCloud::new(points, aux)
    } else {
        let n = m.nrows();
        PointCloud::new(m, vec![0.0; n])
    }
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[u32]) -> Result<()> {
    let mut out = csv::Writer::from_writer(create(path.as_ref())?);
    out.write_record(["index", "label"]).map_err(csv_err)?;
    for (i, l) in labels.iter().enumerate() {
        out.write_record([i.to_string(), l.to_string()]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<u32>> {
    let (header, m) = read_rows(File::open(path)?)?;
    if header != ["label"] {
        return Err(Error::Format { offset: 0, reason: "expected columns `index,label`".into() });
    }
    m.column(0)
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v >= 0.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX) {
                Ok(v as u32)
            } else {
                Err(Error::Validation { index: (i, 1), reason: format!("label {v} is not a class id") })
            }
        })
        .collect()
}

pub fn write_trace<W: Write>(w: W, trace: &[TraceRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRACE_HEADER).map_err(csv_err)?;
    for r in trace {
        out.write_record([
            r.epoch.to_string(),
            r.stress.to_string(),
            r.radius.to_string(),
            r.evals.to_string(),
            r.elapsed_ms.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trace_file(path: impl AsRef<Path>, trace: &[TraceRecord]) -> Result<()> {
    write_trace(create(path.as_ref())?, trace)
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::Reader::from_reader(File::open(path)?);
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != TRACE_HEADER {
        return Err(Error::Format { offset: 0, reason: format!("unexpected trace header {header:?}") });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let offset = rec.position().map_or(0, |p| p.byte());
        let bad = |f: &str| Error::Format { offset, reason: format!("bad trace field {f:?}") };
        out.push(TraceRecord {
            epoch: rec[0].parse().map_err(|_| bad(&rec[0]))?,
            stress: rec[1].parse().map_err(|_| bad(&rec[1]))?,
            radius: rec[2].parse().map_err(|_| bad(&rec[2]))?,
            evals: rec[3].parse().map_err(|_| bad(&rec[3]))?,
            elapsed_ms: rec[4].parse().map_err(|_| bad(&rec[4]))?,
        });
    }
    Ok(out)
}
