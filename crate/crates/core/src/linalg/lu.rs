use ndarray::Array2;

use super::{require_square, ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Solves `A X = B` by LU factorization with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = require_square(a, "system matrix")?;
    if b.nrows() != n {
        return Err(Error::dim(format!(
            "right-hand side has {} rows, system is {n}x{n}",
            b.nrows()
        )));
    }
    let mut lu = a.clone();
    let mut x: Array2<C64> = b.clone();
    let scale = lu.iter().fold(0.0f64, |m, z| m.max(z.norm()));

    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, lu[[i, k]].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= f64::EPSILON * scale * n as f64 || pmax == 0.0 {
            return Err(Error::dim("singular system matrix".to_string()));
        }
        if piv != k {
            for j in 0..n {
                lu.swap([k, j], [piv, j]);
            }
            for j in 0..x.ncols() {
                x.swap([k, j], [piv, j]);
            }
        }
        let pivot = lu[[k, k]];
        for i in (k + 1)..n {
            let f = lu[[i, k]] / pivot;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            lu[[i, k]] = f;
            for j in (k + 1)..n {
                let t = lu[[k, j]];
                lu[[i, j]] -= f * t;
            }
            for j in 0..x.ncols() {
                let t = x[[k, j]];
                x[[i, j]] -= f * t;
            }
        }
    }
    for j in 0..x.ncols() {
        for i in (0..n).rev() {
            let mut acc = x[[i, j]];
            for k in (i + 1)..n {
                acc -= lu[[i, k]] * x[[k, j]];
            }
            x[[i, j]] = acc / lu[[i, i]];
        }
    }
    Ok(x)
}
