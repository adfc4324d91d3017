//! Plain-text matrix format.
//!
//! ```text
//! # optional comment lines
//! <rows> <cols>
//! re im re im ...   (one line per row, 17 significant digits)
//! ```

use std::io::{BufRead, Write};

use ndarray::Array2;

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

pub fn write_matrix<W: Write>(out: &mut W, m: &ComplexMatrix) -> Result<()> {
    writeln!(out, "{} {}", m.nrows(), m.ncols())?;
    for row in m.rows() {
        let line: Vec<String> = row
            .iter()
            .map(|z| format!("{:.16e} {:.16e}", z.re, z.im))
            .collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_matrix<R: BufRead>(input: R) -> Result<ComplexMatrix> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            l.as_ref()
                .map(|s| !s.trim().is_empty() && !s.trim_start().starts_with('#'))
                .unwrap_or(true)
        });

    let (hline, header) = lines.next().ok_or_else(|| Error::Parse {
        line: 0,
        message: "missing dimension header".into(),
    })?;
    let header = header?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: hline,
            message: format!("bad dimension header: {e}"),
        })?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse {
            line: hline,
            message: "header must be `<rows> <cols>`".into(),
        });
    };

    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let (ln, line) = lines.next().ok_or_else(|| Error::Parse {
            line: hline + r + 1,
            message: format!("expected {rows} rows, found {r}"),
        })?;
        let line = line?;
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: ln,
                message: e.to_string(),
            })?;
        if nums.len() != 2 * cols {
            return Err(Error::Parse {
                line: ln,
                message: format!("expected {} numbers, found {}", 2 * cols, nums.len()),
            });
        }
        if nums.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parse {
                line: ln,
                message: "non-finite entry".into(),
            });
        }
        data.extend(nums.chunks(2).map(|p| C64::new(p[0], p[1])));
    }
    Ok(Array2::from_shape_vec((rows, cols), data).expect("sizes checked"))
}
