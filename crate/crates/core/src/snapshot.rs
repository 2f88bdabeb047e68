//! On-disk wave-function formats.
//!
//! * CSV: header `x,re,im,density`, one row per grid point, 17 significant
//!   digits, LF line endings.
//! * Binary: `n_points` pairs of little-endian `f64` `(re, im)`, no header.
//!   The grid must be supplied by the reader.

use std::io::{BufRead, BufReader, Read, Write};

use num_complex::Complex64;

use crate::diagnostics::fmt_f64;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::wavefunction::WaveFunction;

pub const CSV_HEADER: &str = "x,re,im,density";

pub fn write_csv<W: Write>(wf: &WaveFunction, mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for (x, c) in wf.grid().x().iter().zip(wf.values()) {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(*x),
            fmt_f64(c.re),
            fmt_f64(c.im),
            fmt_f64(c.norm_sqr())
        )?;
    }
    Ok(())
}

/// Reads a CSV snapshot onto `grid`. Row count and x positions must match.
pub fn read_csv<R: Read>(grid: &Grid, input: R) -> Result<WaveFunction> {
    let mut lines = BufReader::new(input).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty snapshot".into()))??;
    if header.trim() != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected snapshot header '{header}'")));
    }
    let tol = 1e-9 * grid.length();
    let mut values = Vec::with_capacity(grid.n_points());
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("row {}: {e}", row + 1)))?;
        if fields.len() != 4 {
            return Err(Error::Parse(format!("row {}: expected 4 fields", row + 1)));
        }
        if let Some(&x) = grid.x().get(values.len()) {
            if (fields[0] - x).abs() > tol {
                return Err(Error::GridMismatch);
            }
        }
        values.push(Complex64::new(fields[1], fields[2]));
    }
    WaveFunction::new(grid.clone(), values)
}

pub fn write_binary<W: Write>(wf: &WaveFunction, mut out: W) -> Result<()> {
    let mut bytes = Vec::with_capacity(16 * wf.values().len());
    for c in wf.values() {
        bytes.extend_from_slice(&c.re.to_le_bytes());
        bytes.extend_from_slice(&c.im.to_le_bytes());
    }
    out.write_all(&bytes)?;
    Ok(())
}

pub fn read_binary<R: Read>(grid: &Grid, mut input: R) -> Result<WaveFunction> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() % 16 != 0 {
        return Err(Error::Parse(format!(
            "binary snapshot length {} is not a multiple of 16",
            bytes.len()
        )));
    }
    let read = |chunk: &[u8]| f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
    let values = bytes
        .chunks_exact(16)
        .map(|c| Complex64::new(read(&c[..8]), read(&c[8..])))
        .collect();
    WaveFunction::new(grid.clone(), values)
}
