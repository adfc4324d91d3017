//! Dense nonsymmetric complex eigensolver: Householder reduction to upper
//! Hessenberg form, then implicitly shifted single-shift QR to complex Schur
//! form `M = Z T Z†`. Eigenvectors come from back substitution on `T`.

use std::cmp::Ordering;

use ndarray::{Array1, Array2};

use super::{max_abs, norm_vec, require_square, ComplexMatrix, ComplexVector, C64, ONE, ZERO};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Largest accepted matrix dimension.
    pub max_dim: usize,
    /// Residual bound relative to `‖M‖` checked on every eigenpair.
    pub tol_residual: f64,
    /// QR iterations allowed per eigenvalue.
    pub iterations_per_eigenvalue: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            max_dim: 4096,
            tol_residual: 1e-10,
            iterations_per_eigenvalue: 60,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<C64>,
    /// Unit-norm right eigenvectors as columns, aligned with `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
    /// `‖M v − λ v‖` per eigenpair.
    pub residuals: Vec<f64>,
}

pub(crate) fn cmp_eig(a: &C64, b: &C64) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

struct Schur {
    t: ComplexMatrix,
    z: Option<ComplexMatrix>,
}

fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let r = ax.hypot(y.norm());
    if r == 0.0 {
        (1.0, ZERO)
    } else if ax == 0.0 {
        (0.0, ONE)
    } else {
        (ax / r, (x / ax) * y.conj() / r)
    }
}

fn hessenberg(a: &mut ComplexMatrix, z: &mut Option<ComplexMatrix>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let alpha_norm = (k + 1..n).map(|i| a[[i, k]].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = a[[k + 1, k]];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * alpha_norm;
        let mut v: Vec<C64> = (k + 1..n).map(|i| a[[i, k]]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= vnorm;
        }
        // A <- (I - 2 v v†) A
        for j in 0..n {
            let mut dot = ZERO;
            for (off, vi) in v.iter().enumerate() {
                dot += vi.conj() * a[[k + 1 + off, j]];
            }
            for (off, vi) in v.iter().enumerate() {
                a[[k + 1 + off, j]] -= 2.0 * vi * dot;
            }
        }
        // A <- A (I - 2 v v†)
        for i in 0..n {
            let mut dot = ZERO;
            for (off, vi) in v.iter().enumerate() {
                dot += a[[i, k + 1 + off]] * vi;
            }
            for (off, vi) in v.iter().enumerate() {
                a[[i, k + 1 + off]] -= 2.0 * dot * vi.conj();
            }
        }
        if let Some(zm) = z.as_mut() {
            for i in 0..n {
                let mut dot = ZERO;
                for (off, vi) in v.iter().enumerate() {
                    dot += zm[[i, k + 1 + off]] * vi;
                }
                for (off, vi) in v.iter().enumerate() {
                    zm[[i, k + 1 + off]] -= 2.0 * dot * vi.conj();
                }
            }
        }
        for i in k + 2..n {
            a[[i, k]] = ZERO;
        }
    }
}

fn schur(m: &ComplexMatrix, want_z: bool, per_eig: usize) -> Result<Schur> {
    let n = m.nrows();
    let mut h = m.clone();
    let mut z = if want_z {
        Some(super::identity(n))
    } else {
        None
    };
    hessenberg(&mut h, &mut z);
    if n <= 1 {
        return Ok(Schur { t: h, z });
    }

    let eps = f64::EPSILON;
    let norm = max_abs(&h).max(f64::MIN_POSITIVE);
    let max_total = per_eig * n;
    let mut total = 0usize;
    let mut iter = 0usize;
    let mut hi = n - 1;

    while hi > 0 {
        // locate the start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let mut s = h[[lo - 1, lo - 1]].norm() + h[[lo, lo]].norm();
            if s == 0.0 {
                s = norm;
            }
            if h[[lo, lo - 1]].norm() <= eps * s {
                h[[lo, lo - 1]] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        total += 1;
        iter += 1;
        if total > max_total {
            return Err(Error::NoConvergence { iterations: total });
        }

        let mu = if iter % 11 == 10 {
            // exceptional shift to break cycles
            h[[hi, hi]] + C64::new(0.75, 0.4) * h[[hi, hi - 1]].norm()
        } else {
            let a = h[[hi - 1, hi - 1]];
            let b = h[[hi - 1, hi]];
            let c = h[[hi, hi - 1]];
            let d = h[[hi, hi]];
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            // eigenvalues of the trailing 2x2; take the one nearer d
            let e1 = (a + d) * 0.5 + disc;
            let e2 = (a + d) * 0.5 - disc;
            if (e1 - d).norm() <= (e2 - d).norm() {
                e1
            } else {
                e2
            }
        };

        let mut x = h[[lo, lo]] - mu;
        let mut y = h[[lo + 1, lo]];
        for k in lo..hi {
            if k > lo {
                x = h[[k, k - 1]];
                y = h[[k + 1, k - 1]];
            }
            let (c, s) = givens(x, y);
            let col_start = if k > lo { k - 1 } else { lo };
            for j in col_start..n {
                let hk = h[[k, j]];
                let hk1 = h[[k + 1, j]];
                h[[k, j]] = hk * c + s * hk1;
                h[[k + 1, j]] = -s.conj() * hk + hk1 * c;
            }
            let row_end = (k + 2).min(hi);
            for i in 0..=row_end {
                let hk = h[[i, k]];
                let hk1 = h[[i, k + 1]];
                h[[i, k]] = hk * c + hk1 * s.conj();
                h[[i, k + 1]] = -hk * s + hk1 * c;
            }
            if let Some(zm) = z.as_mut() {
                for i in 0..n {
                    let zk = zm[[i, k]];
                    let zk1 = zm[[i, k + 1]];
                    zm[[i, k]] = zk * c + zk1 * s.conj();
                    zm[[i, k + 1]] = -zk * s + zk1 * c;
                }
            }
            if k > lo {
                h[[k + 1, k - 1]] = ZERO;
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[[i, j]] = ZERO;
        }
    }
    Ok(Schur { t: h, z })
}

fn check_input(m: &ComplexMatrix, opts: &EigenOptions) -> Result<usize> {
    let n = require_square(m, "eigenproblem matrix")?;
    if n > opts.max_dim {
        return Err(Error::dim(format!(
            "matrix dimension {n} exceeds the configured cap {}",
            opts.max_dim
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::param("matrix", "non-finite entry"));
    }
    Ok(n)
}

/// All eigenvalues, sorted by real then imaginary part.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    let opts = EigenOptions::default();
    check_input(m, &opts)?;
    let s = schur(m, false, opts.iterations_per_eigenvalue)?;
    let mut ev: Vec<C64> = s.t.diag().to_vec();
    ev.sort_by(cmp_eig);
    Ok(ev)
}

/// Full eigendecomposition with residual check.
pub fn eigendecompose(m: &ComplexMatrix, opts: &EigenOptions) -> Result<SpectrumResult> {
    let n = check_input(m, opts)?;
    let s = schur(m, true, opts.iterations_per_eigenvalue)?;
    let t = &s.t;
    let z = s.z.as_ref().expect("Schur vectors requested");
    let tnorm = max_abs(t).max(f64::MIN_POSITIVE);
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE);

    let mut vecs: Array2<C64> = Array2::zeros((n, n));
    for k in 0..n {
        let lambda = t[[k, k]];
        let mut y: Array1<C64> = Array1::zeros(n);
        y[k] = ONE;
        for j in (0..k).rev() {
            let mut acc = ZERO;
            for l in j + 1..=k {
                acc += t[[j, l]] * y[l];
            }
            let mut den = t[[j, j]] - lambda;
            if den.norm() < smin {
                den = C64::new(smin, 0.0);
            }
            y[j] = -acc / den;
            // rescale to avoid overflow in nearly defective cases
            let big = y.iter().fold(0.0f64, |a, c| a.max(c.norm()));
            if big > 1e100 {
                y.mapv_inplace(|c| c / big);
            }
        }
        let mut v = z.dot(&y);
        let nv = norm_vec(&v);
        v.mapv_inplace(|c| c / nv);
        vecs.column_mut(k).assign(&v);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_eig(&t[[a, a]], &t[[b, b]]));
    let eigenvalues: Vec<C64> = order.iter().map(|&k| t[[k, k]]).collect();
    let mut eigenvectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.column_mut(dst).assign(&vecs.column(src));
    }
    let mnorm = super::norm_fro(m).max(f64::MIN_POSITIVE);
    let residuals: Vec<f64> = (0..n)
        .map(|k| {
            let v: ComplexVector = eigenvectors.column(k).to_owned();
            let r = m.dot(&v) - v.mapv(|c| c * eigenvalues[k]);
            norm_vec(&r)
        })
        .collect();
    if let Some(worst) = residuals.iter().copied().fold(None, |a: Option<f64>, r| {
        Some(a.map_or(r, |a| a.max(r)))
    }) {
        if worst > opts.tol_residual * mnorm {
            log::warn!(
                "eigenpair residual {worst:.3e} exceeds {:.1e}·‖M‖",
                opts.tol_residual
            );
        }
    }
    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors,
        residuals,
    })
}
