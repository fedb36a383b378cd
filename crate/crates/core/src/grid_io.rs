//! Plain-text and image serialization of tomogram grids.
//!
//! CSV rows are `theta1, x1, omega`, θ-major, with 17 significant digits so
//! that a round trip is lossless. PGM output is binary greyscale with θ₁ on
//! the horizontal axis and the largest `X₁` on the top row.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::tomography::TomogramGrid;

pub const GRID_HEADER: &str = "# theta1, x1, omega";
pub const Q_CURVE_HEADER: &str = "# phi, Q";

pub fn write_csv<W: Write>(grid: &TomogramGrid, mut out: W) -> Result<()> {
    writeln!(out, "{GRID_HEADER}")?;
    for (col, theta) in grid.columns().zip(grid.theta_axis()) {
        for (v, x) in col.iter().zip(grid.x_axis()) {
            writeln!(out, "{theta:.16e}, {x:.16e}, {v:.16e}")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn parse_fields<const N: usize>(line: &str, line_no: usize) -> Result<[f64; N]> {
    let parse_err = |msg: String| Error::Parse { line: line_no, msg };
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != N {
        return Err(parse_err(format!("expected {N} fields, found {}", fields.len())));
    }
    let mut out = [0.0; N];
    for (slot, f) in out.iter_mut().zip(fields) {
        *slot = f.parse().map_err(|_| parse_err(format!("not a number: {f:?}")))?;
    }
    Ok(out)
}

fn data_lines<R: BufRead>(input: R) -> impl Iterator<Item = Result<(usize, String)>> {
    input.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(e.into())),
        Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('#') => None,
        Ok(l) => Some(Ok((i + 1, l))),
    })
}

/// Reads a grid written by [`write_csv`]. The X axis must repeat identically
/// in every θ block.
pub fn read_csv<R: BufRead>(input: R) -> Result<TomogramGrid> {
    let mut thetas: Vec<f64> = Vec::new();
    let mut xs: Vec<f64> = Vec::new();
    let mut values = Vec::new();
    let mut pos = 0usize;
    for item in data_lines(input) {
        let (line_no, line) = item?;
        let [theta, x, v] = parse_fields::<3>(&line, line_no)?;
        if thetas.last() != Some(&theta) {
            if thetas.len() > 1 && pos != xs.len() {
                return Err(Error::Parse { line: line_no, msg: "θ block shorter than the first".into() });
            }
            thetas.push(theta);
            pos = 0;
        }
        if thetas.len() == 1 {
            xs.push(x);
        } else if pos >= xs.len() || xs[pos] != x {
            return Err(Error::Parse { line: line_no, msg: format!("x1 = {x} does not match the first θ block") });
        }
        pos += 1;
        values.push(v);
    }
    if thetas.len() > 1 && pos != xs.len() {
        return Err(Error::Parse { line: 0, msg: "last θ block is incomplete".into() });
    }
    if thetas.is_empty() {
        return Err(Error::EmptyGrid);
    }
    TomogramGrid::new(thetas, xs, values)
}

pub fn write_q_curve<W: Write>(points: &[(f64, f64)], mut out: W) -> Result<()> {
    writeln!(out, "{Q_CURVE_HEADER}")?;
    for (phi, q) in points {
        writeln!(out, "{phi:.16e}, {q:.16e}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_q_curve<R: BufRead>(input: R) -> Result<Vec<(f64, f64)>> {
    data_lines(input)
        .map(|item| {
            let (line_no, line) = item?;
            let [phi, q] = parse_fields::<2>(&line, line_no)?;
            Ok((phi, q))
        })
        .collect()
}

/// Binary PGM, grey level proportional to `ω / max ω`.
pub fn write_pgm<W: Write>(grid: &TomogramGrid, mut out: W) -> Result<()> {
    let max = grid.max_value();
    if max <= 0.0 {
        return Err(Error::EmptyGrid);
    }
    let (w, h) = (grid.theta_axis().len(), grid.x_axis().len());
    write!(out, "P5\n{w} {h}\n255\n")?;
    let mut row = vec![0u8; w];
    for j in (0..h).rev() {
        for (i, px) in row.iter_mut().enumerate() {
            *px = (255.0 * grid.value(i, j) / max).round() as u8;
        }
        out.write_all(&row)?;
    }
    out.flush()?;
    Ok(())
}
