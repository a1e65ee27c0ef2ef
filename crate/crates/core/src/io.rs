//! Plain-text dataset and results formats.
//!
//! Datasets are UTF-8 CSV with header `y,x1,...,xd`, one sample per line.
//! Results are one record per line of space-separated `key=value` pairs.
//! Floats are written in Rust's shortest round-trip form, so
//! write-then-read reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::data::{Dataset, GroundTruth};
use crate::error::{Error, Result};
use crate::pipeline::SweepRecord;

/// Writes a dataset as CSV.
pub fn write_dataset(data: &Dataset, w: &mut impl Write) -> Result<()> {
    let d = data.d();
    let mut header = String::from("y");
    for j in 1..=d {
        header.push_str(",x");
        header.push_str(&j.to_string());
    }
    writeln!(w, "{header}")?;
    for i in 0..data.n() {
        let mut line = format!("{:?}", data.response()[i]);
        for j in 0..d {
            line.push(',');
            line.push_str(&format!("{:?}", data.design()[[i, j]]));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Renders a dataset to a CSV string.
pub fn dataset_to_string(data: &Dataset) -> String {
    let mut buf = Vec::new();
    write_dataset(data, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("dataset text is always UTF-8")
}

/// Parses a dataset from CSV, reporting 1-based line numbers on errors.
pub fn read_dataset(r: impl BufRead) -> Result<Dataset> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty input".into() })?;
    let header = header?;
    let cols: Vec<&str> = header.trim_end_matches('\r').split(',').collect();
    if cols.is_empty() || cols[0] != "y" {
        return Err(Error::Parse { line: 1, msg: "header must start with 'y'".into() });
    }
    let d = cols.len() - 1;
    if d == 0 {
        return Err(Error::Parse { line: 1, msg: "header lists no covariate columns".into() });
    }
    for (j, col) in cols.iter().enumerate().skip(1) {
        let expect = format!("x{j}");
        if *col != expect {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected column '{expect}', found '{col}'"),
            });
        }
    }

    let mut ys = Vec::new();
    let mut xs = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 1 {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected {} fields, found {}", d + 1, fields.len()),
            });
        }
        let parse = |s: &str, line: usize| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!("'{s}' is not a number"),
            })
        };
        ys.push(parse(fields[0], idx + 1)?);
        for f in &fields[1..] {
            xs.push(parse(f, idx + 1)?);
        }
    }
    let n = ys.len();
    if n == 0 {
        return Err(Error::Parse { line: 2, msg: "no data rows".into() });
    }
    let design = Array2::from_shape_vec((n, d), xs)
        .map_err(|e| Error::Parse { line: 2, msg: e.to_string() })?;
    Dataset::new(design, Array1::from_vec(ys))
}

/// Parses a dataset from an in-memory string.
pub fn read_dataset_str(s: &str) -> Result<Dataset> {
    read_dataset(s.as_bytes())
}

pub fn write_dataset_file(data: &Dataset, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_dataset(data, &mut w)
}

pub fn read_dataset_file(path: &Path) -> Result<Dataset> {
    read_dataset(BufReader::new(File::open(path)?))
}

/// Writes a ground-truth sidecar as `key=value` lines: the noise scale,
/// subgaussian constant, outlier indices, and every coefficient.
pub fn write_truth(truth: &GroundTruth, w: &mut impl Write) -> Result<()> {
    writeln!(w, "sigma={:?}", truth.sigma)?;
    writeln!(w, "l={:?}", truth.subgaussian_constant)?;
    let outliers: Vec<String> = truth.outliers.iter().map(|i| i.to_string()).collect();
    writeln!(w, "outliers={}", outliers.join(","))?;
    for (j, b) in truth.beta_star.iter().enumerate() {
        writeln!(w, "beta_{j}={b:?}")?;
    }
    Ok(())
}

/// Writes sweep records, one per line.
pub fn write_records(records: &[SweepRecord], w: &mut impl Write) -> Result<()> {
    for r in records {
        writeln!(w, "{}", record_to_line(r))?;
    }
    Ok(())
}

pub fn records_to_string(records: &[SweepRecord]) -> String {
    let mut buf = Vec::new();
    write_records(records, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("records text is always UTF-8")
}

fn record_to_line(r: &SweepRecord) -> String {
    format!(
        "cell={} n={} d={} s={} o={} sigma={:?} seed={} estimator={} l2_error={:?} l1_error={:?} certificate={:?} failed={} retained={} wall_ms={}",
        r.cell,
        r.n,
        r.d,
        r.s,
        r.o,
        r.sigma,
        r.seed,
        r.estimator,
        r.l2_error,
        r.l1_error,
        r.certificate,
        u8::from(r.failed),
        r.retained,
        r.wall_ms
    )
}

/// Parses records written by [`write_records`], ignoring unknown keys.
pub fn read_records(r: impl BufRead) -> Result<Vec<SweepRecord>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        out.push(parse_record_line(line, idx + 1)?);
    }
    Ok(out)
}

fn parse_record_line(line: &str, lineno: usize) -> Result<SweepRecord> {
    let mut rec = SweepRecord {
        cell: 0,
        n: 0,
        d: 0,
        s: 0,
        o: 0,
        sigma: f64::NAN,
        seed: 0,
        estimator: String::new(),
        l2_error: f64::NAN,
        l1_error: f64::NAN,
        certificate: f64::NAN,
        failed: false,
        retained: 0,
        wall_ms: 0,
    };
    let err = |msg: String| Error::Parse { line: lineno, msg };
    for token in line.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| err(format!("token '{token}' is not key=value")))?;
        let bad = |what: &str| err(format!("bad {what} value '{value}'"));
        match key {
            "cell" => rec.cell = value.parse().map_err(|_| bad("cell"))?,
            "n" => rec.n = value.parse().map_err(|_| bad("n"))?,
            "d" => rec.d = value.parse().map_err(|_| bad("d"))?,
            "s" => rec.s = value.parse().map_err(|_| bad("s"))?,
            "o" => rec.o = value.parse().map_err(|_| bad("o"))?,
            "sigma" => rec.sigma = value.parse().map_err(|_| bad("sigma"))?,
            "seed" => rec.seed = value.parse().map_err(|_| bad("seed"))?,
            "estimator" => rec.estimator = value.to_string(),
            "l2_error" => rec.l2_error = value.parse().map_err(|_| bad("l2_error"))?,
            "l1_error" => rec.l1_error = value.parse().map_err(|_| bad("l1_error"))?,
            "certificate" => rec.certificate = value.parse().map_err(|_| bad("certificate"))?,
            "failed" => {
                rec.failed = match value {
                    "0" => false,
                    "1" => true,
                    _ => return Err(bad("failed")),
                }
            }
            "retained" => rec.retained = value.parse().map_err(|_| bad("retained"))?,
            "wall_ms" => rec.wall_ms = value.parse().map_err(|_| bad("wall_ms"))?,
            _ => {} // tolerate fields added by future versions
        }
    }
    if rec.estimator.is_empty() || rec.n == 0 {
        return Err(err("record is missing required keys".into()));
    }
    Ok(rec)
}

pub fn write_records_file(records: &[SweepRecord], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_records(records, &mut w)
}

pub fn read_records_file(path: &Path) -> Result<Vec<SweepRecord>> {
    read_records(BufReader::new(File::open(path)?))
}
