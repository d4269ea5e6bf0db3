//! CSV and JSON readers and writers.
//!
//! * time series: `time_s,value`
//! * spectral grid (long format): `time_s,freq_hz,value`, time-major
//! * coefficients: `time_s,axis_value,re,im`, plus a JSON sidecar `<file>.json`
//!   naming the axis kind
//!
//! Numbers are written in shortest round-trip form, so readers recover the
//! written values exactly. Every writer goes through a temporary file in the
//! target directory that is renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::axis::{Axis, FrequencyAxis, ScaleAxis};
use crate::error::{EpsdError, Result};
use crate::grid::{CoefficientGrid, SpectralGrid};
use crate::series::TimeSeries;

/// Relative tolerance on sample spacing when reading a time series.
const SPACING_TOL: f64 = 1e-6;

/// Write `contents` produced by `fill` to `path` atomically.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut buf)?;
        buf.flush()?;
    }
    tmp.persist(path).map_err(|e| EpsdError::Io(e.error))?;
    Ok(())
}

/// Serialize `value` as pretty JSON to `path` atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?)
}

fn check_header(rdr: &mut csv::Reader<std::fs::File>, expected: &[&str], path: &Path) -> Result<()> {
    let header = rdr.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(EpsdError::InvalidInput(format!(
            "{}: header {:?}, expected {}",
            path.display(),
            header.iter().collect::<Vec<_>>(),
            expected.join(",")
        )));
    }
    Ok(())
}

fn field(record: &csv::StringRecord, i: usize, line: u64, path: &Path) -> Result<f64> {
    let raw = record.get(i).ok_or_else(|| {
        EpsdError::InvalidInput(format!("{}:{line}: missing column {}", path.display(), i + 1))
    })?;
    raw.parse::<f64>().map_err(|_| {
        EpsdError::InvalidInput(format!("{}:{line}: `{raw}` is not a number", path.display()))
    })
}

fn rows(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = reader(path)?;
    check_header(&mut rdr, header, path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = (0..header.len())
            .map(|i| field(&rec, i, line, path))
            .collect::<Result<Vec<_>>>()?;
        out.push(row);
    }
    Ok(out)
}

pub fn write_series(path: &Path, ts: &TimeSeries) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "time_s,value")?;
        for (i, x) in ts.samples().iter().enumerate() {
            writeln!(w, "{},{}", ts.time(i), x)?;
        }
        Ok(())
    })
}

/// Read a uniformly sampled series; the step is taken from the first and last times.
pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let rows = rows(path, &["time_s", "value"])?;
    if rows.len() < 2 {
        return Err(EpsdError::InvalidInput(format!(
            "{}: a time series needs at least 2 samples",
            path.display()
        )));
    }
    let n = rows.len();
    let t0 = rows[0][0];
    let dt = (rows[n - 1][0] - t0) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(EpsdError::InvalidInput(format!(
            "{}: times must be strictly increasing",
            path.display()
        )));
    }
    for (i, pair) in rows.windows(2).enumerate() {
        let step = pair[1][0] - pair[0][0];
        if !(step > 0.0) || (step - dt).abs() > SPACING_TOL * dt {
            return Err(EpsdError::InvalidInput(format!(
                "{}: sample {} breaks the uniform spacing {dt} s",
                path.display(),
                i + 1
            )));
        }
    }
    TimeSeries::with_start(rows.into_iter().map(|r| r[1]).collect(), dt, t0)
}

pub fn write_grid(path: &Path, grid: &SpectralGrid) -> Result<()> {
    let freqs = grid.freqs().values();
    let values = grid.values();
    write_atomic(path, |w| {
        writeln!(w, "time_s,freq_hz,value")?;
        for (j, t) in grid.times().iter().enumerate() {
            for (i, f) in freqs.iter().enumerate() {
                writeln!(w, "{t},{f},{}", values[[i, j]])?;
            }
        }
        Ok(())
    })
}

// Distinct values in order of first appearance and the index of every row's value.
fn axis_of(values: impl Iterator<Item = f64>) -> (Vec<f64>, Vec<usize>) {
    let mut distinct: Vec<f64> = Vec::new();
    let mut index = Vec::new();
    for v in values {
        let pos = match distinct.iter().position(|&d| d == v) {
            Some(p) => p,
            None => {
                distinct.push(v);
                distinct.len() - 1
            }
        };
        index.push(pos);
    }
    (distinct, index)
}

// Rebuild a dense matrix from long-format rows (`time`, `axis`, values...).
fn dense<T: Copy + Default>(
    rows: &[Vec<f64>],
    value: impl Fn(&[f64]) -> T,
    path: &Path,
) -> Result<(Vec<f64>, Vec<f64>, Array2<T>)> {
    let (times, ti) = axis_of(rows.iter().map(|r| r[0]));
    let (axis, ai) = axis_of(rows.iter().map(|r| r[1]));
    if times.len() * axis.len() != rows.len() {
        return Err(EpsdError::InvalidInput(format!(
            "{}: {} rows do not form a full {}×{} grid",
            path.display(),
            rows.len(),
            axis.len(),
            times.len()
        )));
    }
    let mut seen = Array2::<bool>::from_elem((axis.len(), times.len()), false);
    let mut out = Array2::<T>::from_elem((axis.len(), times.len()), T::default());
    for ((r, &t), &a) in rows.iter().zip(&ti).zip(&ai) {
        if seen[[a, t]] {
            return Err(EpsdError::InvalidInput(format!(
                "{}: duplicate cell at time {} and axis value {}",
                path.display(),
                r[0],
                r[1]
            )));
        }
        seen[[a, t]] = true;
        out[[a, t]] = value(r);
    }
    Ok((times, axis, out))
}

/// Read a long-format grid; it is signed when any value is negative.
pub fn read_grid(path: &Path) -> Result<SpectralGrid> {
    let rows = rows(path, &["time_s", "freq_hz", "value"])?;
    if rows.is_empty() {
        return Err(EpsdError::InvalidInput(format!("{}: empty grid", path.display())));
    }
    let (times, freqs, values) = dense(&rows, |r| r[2], path)?;
    let freqs = FrequencyAxis::new(freqs)?;
    if values.iter().any(|v| *v < 0.0) {
        SpectralGrid::signed(freqs, times, values)
    } else {
        SpectralGrid::new(freqs, times, values)
    }
}

/// JSON sidecar of a coefficient CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSidecar {
    /// `frequency` or `scale`.
    pub axis: String,
    /// Geometric scale grid, present for scale axes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<ScaleAxis>,
    /// Transform name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<String>,
}

/// Sidecar path of a coefficient CSV: the file name with `.json` appended.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".json");
    path.with_file_name(name)
}

pub fn write_coefficients(path: &Path, grid: &CoefficientGrid, transform: Option<&str>) -> Result<()> {
    let axis_values = grid.axis().values();
    let values = grid.values();
    write_atomic(path, |w| {
        writeln!(w, "time_s,axis_value,re,im")?;
        for (j, t) in grid.times().iter().enumerate() {
            for (i, a) in axis_values.iter().enumerate() {
                let z = values[[i, j]];
                writeln!(w, "{t},{a},{},{}", z.re, z.im)?;
            }
        }
        Ok(())
    })?;
    let sidecar = CoefficientSidecar {
        axis: grid.axis().kind().to_string(),
        scales: match grid.axis() {
            Axis::Scale(s) => Some(s.clone()),
            Axis::Frequency(_) => None,
        },
        transform: transform.map(str::to_string),
    };
    write_json(&sidecar_path(path), &sidecar)
}

/// Read a coefficient CSV and its sidecar.
pub fn read_coefficients(path: &Path) -> Result<(CoefficientGrid, CoefficientSidecar)> {
    let side_path = sidecar_path(path);
    let sidecar: CoefficientSidecar =
        serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(&side_path)?))?;
    let rows = rows(path, &["time_s", "axis_value", "re", "im"])?;
    if rows.is_empty() {
        return Err(EpsdError::InvalidInput(format!("{}: empty grid", path.display())));
    }
    let (times, axis_values, values) = dense(&rows, |r| Complex64::new(r[2], r[3]), path)?;
    let axis = match (sidecar.axis.as_str(), &sidecar.scales) {
        ("frequency", _) => Axis::Frequency(FrequencyAxis::new(axis_values)?),
        ("scale", Some(scales)) => {
            let expected = scales.values();
            let matches = expected.len() == axis_values.len()
                && expected
                    .iter()
                    .zip(&axis_values)
                    .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs());
            if !matches {
                return Err(EpsdError::InvalidInput(format!(
                    "{}: scale values disagree with the sidecar scale grid",
                    path.display()
                )));
            }
            Axis::Scale(scales.clone())
        }
        ("scale", None) => {
            return Err(EpsdError::InvalidInput(format!(
                "{}: scale axis without a scale grid",
                side_path.display()
            )))
        }
        (other, _) => {
            return Err(EpsdError::InvalidInput(format!(
                "{}: unknown axis kind `{other}`",
                side_path.display()
            )))
        }
    };
    Ok((CoefficientGrid::new(axis, times, values)?, sidecar))
}

/// Every `*.csv` file in `dir`, sorted by name.
pub fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}
