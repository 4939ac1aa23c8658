//! CSV formats.
//!
//! Grid functions: header `x,value`, one row per interior node in increasing
//! `x`. Error functions: header `t,phi`, rows from `t = 0` up to and including
//! `t = length`. Both loaders require uniform spacing to relative tolerance
//! `1e-9`.

use std::io::{Read, Write};
use std::path::Path;

use crate::errorfn::ErrorFunction;
use crate::gridfn::{GridFunction, GridSpec, NODE_REL_TOL};
use crate::{Error, Result};

/// Formats a float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn read_columns<R: Read>(reader: R, path: &Path, header: [&str; 2]) -> Result<Vec<(f64, f64)>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let format_err = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let found = rdr.headers().map_err(csv_err)?.clone();
    if found.len() != 2 || found[0] != *header[0] || found[1] != *header[1] {
        return Err(format_err(format!(
            "expected header {},{}, found {:?}",
            header[0],
            header[1],
            found.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        if record.len() != 2 {
            return Err(format_err(format!("row {}: expected 2 fields", line + 2)));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format_err(format!("row {}: bad number {s:?}", line + 2)))
        };
        rows.push((parse(&record[0])?, parse(&record[1])?));
    }
    Ok(rows)
}

fn check_uniform(xs: &[f64], path: &Path) -> Result<f64> {
    let n = xs.len();
    let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: "coordinates must be strictly increasing".into(),
        });
    }
    for (k, w) in xs.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > NODE_REL_TOL * h {
            return Err(Error::Format {
                path: path.to_path_buf(),
                msg: format!("spacing is not uniform between rows {} and {}", k + 2, k + 3),
            });
        }
    }
    Ok(h)
}

/// Reads a grid function; the interval is inferred as `(x_1 - h, x_n + h)`.
pub fn read_function<R: Read>(reader: R, path: &Path) -> Result<GridFunction> {
    let rows = read_columns(reader, path, ["x", "value"])?;
    if rows.len() < 2 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: "need at least two rows".into(),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let h = check_uniform(&xs, path)?;
    let n = xs.len();
    let grid = GridSpec::new(xs[0] - h, xs[n - 1] + h, n)?;
    GridFunction::new(grid, rows.into_iter().map(|r| r.1).collect())
}

pub fn read_function_file(path: impl AsRef<Path>) -> Result<GridFunction> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_function(file, path)
}

pub fn write_function<W: Write>(f: &GridFunction, mut w: W) -> std::io::Result<()> {
    writeln!(w, "x,value")?;
    for (x, v) in f.grid().nodes().zip(f.values()) {
        writeln!(w, "{},{}", fmt_f64(x), fmt_f64(*v))?;
    }
    Ok(())
}

pub fn write_function_file(f: &GridFunction, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    write_function(f, std::io::BufWriter::new(file)).map_err(io_err)
}

/// Reads an error function sampled from `t = 0` to `t = length` inclusive.
pub fn read_error<R: Read>(reader: R, path: &Path) -> Result<ErrorFunction> {
    let rows = read_columns(reader, path, ["t", "phi"])?;
    if rows.len() < 3 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: "need at least three rows".into(),
        });
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let h = check_uniform(&ts, path)?;
    if ts[0].abs() > NODE_REL_TOL * h {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: format!("first t must be 0, found {}", ts[0]),
        });
    }
    let length = ts[ts.len() - 1];
    ErrorFunction::new(length, rows.into_iter().map(|r| r.1).collect())
}

pub fn read_error_file(path: impl AsRef<Path>) -> Result<ErrorFunction> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_error(file, path)
}

pub fn write_error<W: Write>(phi: &ErrorFunction, mut w: W) -> std::io::Result<()> {
    writeln!(w, "t,phi")?;
    for (j, v) in phi.samples().iter().enumerate() {
        writeln!(w, "{},{}", fmt_f64(phi.node(j)), fmt_f64(*v))?;
    }
    Ok(())
}
