//! CSV and JSON file formats.
//!
//! Numbers are written with Rust's shortest round-trip formatting so every
//! value parses back to the identical `f64`.
//!
//! | artifact              | header                                   |
//! |-----------------------|------------------------------------------|
//! | dataset               | `x,y`                                    |
//! | prediction matrix     | grid values, one column per grid point   |
//! | coefficient samples   | `slope,intercept[,test_mse]`             |
//! | band curve            | `x,mean,sd,q1,median,q3,iqr,low,high`    |
//! | analytical band       | `x,prediction,lower,upper`               |
//! | curve                 | `x,prediction`                           |

use std::io::{Read, Write};

use serde::Serialize;

use crate::datagen::{Dataset, Grid};
use crate::error::{Error, Result};
use crate::models::BandPoint;
use crate::montecarlo::{CoefficientSamples, PredictionMatrix};
use crate::stats::{BandCurve, DistributionReport};

fn num(v: f64) -> String {
    format!("{v}")
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn parse_cell(cell: &str, line: u64, column: &str) -> Result<f64> {
    let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("column `{column}`: cannot parse `{cell}` as a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("column `{column}`: non-finite value `{cell}`"),
        });
    }
    Ok(v)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

pub fn write_dataset<W: Write>(data: &Dataset, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["x", "y"])?;
    for (x, y) in data.iter() {
        w.write_record([num(x), num(y)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV with `x` and `y` columns; other columns are ignored.
pub fn read_dataset<R: Read>(input: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!(
                    "missing `{name}` column (found: {})",
                    headers.iter().collect::<Vec<_>>().join(", ")
                ),
            })
    };
    let (ix, iy) = (find("x")?, find("y")?);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let cell = |i: usize| rec.get(i).unwrap_or("");
        xs.push(parse_cell(cell(ix), line, "x")?);
        ys.push(parse_cell(cell(iy), line, "y")?);
    }
    if xs.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    Dataset::new(xs, ys)
}

pub fn write_matrix<W: Write>(matrix: &PredictionMatrix, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(matrix.grid().points().iter().map(|&x| num(x)))?;
    for row in matrix.rows() {
        w.write_record(row.iter().map(|&v| num(v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_coefficients<W: Write>(coef: &CoefficientSamples, out: W) -> Result<()> {
    let mut w = writer(out);
    let has_coef = !coef.slopes.is_empty();
    let mut header = Vec::new();
    if has_coef {
        header.extend(["slope", "intercept"]);
    }
    if coef.test_mse.is_some() {
        header.push("test_mse");
    }
    w.write_record(&header)?;
    let rows = if has_coef {
        coef.slopes.len()
    } else {
        coef.test_mse.as_ref().map_or(0, Vec::len)
    };
    for r in 0..rows {
        let mut rec = Vec::with_capacity(3);
        if has_coef {
            rec.push(num(coef.slopes[r]));
            rec.push(num(coef.intercepts[r]));
        }
        if let Some(m) = &coef.test_mse {
            rec.push(num(m[r]));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_band_curve<W: Write>(curve: &BandCurve, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record([
        "x", "mean", "sd", "q1", "median", "q3", "iqr", "low", "high",
    ])?;
    for (i, &x) in curve.grid.points().iter().enumerate() {
        let b = &curve.bands[i];
        w.write_record([
            num(x),
            num(curve.means[i]),
            num(curve.sds[i]),
            num(b.q1),
            num(b.median),
            num(b.q3),
            num(b.iqr),
            num(b.low),
            num(b.high),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_analytic_band<W: Write>(band: &[BandPoint], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["x", "prediction", "lower", "upper"])?;
    for p in band {
        w.write_record([num(p.x), num(p.prediction), num(p.lower), num(p.upper)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve<W: Write>(grid: &Grid, values: &[f64], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["x", "prediction"])?;
    for (&x, &v) in grid.points().iter().zip(values) {
        w.write_record([num(x), num(v)])?;
    }
    w.flush()?;
    Ok(())
}

/// A numeric CSV held column-wise, for picking one sample column.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl SampleTable {
    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(csv_error)?
            .iter()
            .map(str::to_owned)
            .collect();
        let mut columns = vec![Vec::new(); headers.len()];
        for rec in rdr.records() {
            let rec = rec.map_err(csv_error)?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            for (j, col) in columns.iter_mut().enumerate() {
                col.push(parse_cell(rec.get(j).unwrap_or(""), line, &headers[j])?);
            }
        }
        Ok(Self { headers, columns })
    }

    fn choices(&self) -> String {
        self.headers.join(", ")
    }

    pub fn by_name(&self, name: &str) -> Result<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|j| self.columns[j].as_slice())
            .ok_or_else(|| {
                Error::Selection(format!(
                    "unknown column `{name}`; available: {}",
                    self.choices()
                ))
            })
    }

    /// Column whose header is the grid value `x` (matrix files).
    pub fn at_x(&self, x: f64) -> Result<&[f64]> {
        let tol = 1e-9 * x.abs().max(1.0);
        self.headers
            .iter()
            .position(|h| h.parse::<f64>().is_ok_and(|v| (v - x).abs() <= tol))
            .map(|j| self.columns[j].as_slice())
            .ok_or_else(|| {
                Error::Selection(format!(
                    "x = {x} is not a grid point; available: {}",
                    self.choices()
                ))
            })
    }

    /// The only column, or `slope` when present.
    pub fn default_column(&self) -> Result<&[f64]> {
        match self.headers.len() {
            1 => Ok(&self.columns[0]),
            _ => self.by_name("slope").map_err(|_| {
                Error::Selection(format!(
                    "several columns present, choose one with --column or --at-x; available: {}",
                    self.choices()
                ))
            }),
        }
    }
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_report_json<W: Write>(report: &DistributionReport, out: W) -> Result<()> {
    write_json(report, out)
}

/// Histogram as `bin_low,bin_high,count` rows.
pub fn write_report_csv<W: Write>(report: &DistributionReport, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["bin_low", "bin_high", "count"])?;
    for (i, &c) in report.counts.iter().enumerate() {
        w.write_record([
            num(report.bin_edges[i]),
            num(report.bin_edges[i + 1]),
            c.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
