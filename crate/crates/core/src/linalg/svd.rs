//! One-sided (Hestenes) Jacobi SVD.
//!
//! Slow for large matrices but accurate in the small singular values,
//! which is what rank decisions near defective eigenvalues depend on.

use ndarray::{s, Array2};

use super::{identity, ComplexMatrix, C64};

const MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone)]
pub struct Svd {
    /// Singular values in descending order.
    pub values: Vec<f64>,
    /// Right singular vectors as columns, ordered like `values`.
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn new(a: &ComplexMatrix) -> Self {
        // Work on the wider-than-tall case through the adjoint: the right
        // singular vectors are all we need, so only m >= n is handled directly.
        let (m, n) = a.dim();
        let mut u = a.clone();
        if m < n {
            // pad with zero rows; singular values and V are unchanged
            let mut padded = Array2::zeros((n, n));
            padded.slice_mut(s![..m, ..]).assign(a);
            u = padded;
        }
        let mut v = identity(n);
        let eps = f64::EPSILON;

        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, C64::new(0.0, 0.0));
                    for i in 0..u.nrows() {
                        let up = u[[i, p]];
                        let uq = u[[i, q]];
                        alpha += up.norm_sqr();
                        beta += uq.norm_sqr();
                        gamma += up.conj() * uq;
                    }
                    let g = gamma.norm();
                    if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let phase = gamma / g;
                    let zeta = (beta - alpha) / (2.0 * g);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let sn = c * t;
                    for i in 0..u.nrows() {
                        let up = u[[i, p]];
                        let uq = u[[i, q]] * phase.conj();
                        u[[i, p]] = up * c - uq * sn;
                        u[[i, q]] = up * sn + uq * c;
                    }
                    for i in 0..n {
                        let vp = v[[i, p]];
                        let vq = v[[i, q]] * phase.conj();
                        v[[i, p]] = vp * c - vq * sn;
                        v[[i, q]] = vp * sn + vq * c;
                    }
                }
            }
            if !rotated {
                break;
            }
        }

        let mut order: Vec<(f64, usize)> = (0..n)
            .map(|j| {
                let norm = u.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                (norm, j)
            })
            .collect();
        order.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&(s, _)| s).collect();
        let mut v_sorted = Array2::zeros((n, n));
        for (k, &(_, j)) in order.iter().enumerate() {
            v_sorted.column_mut(k).assign(&v.column(j));
        }
        Svd { values, v: v_sorted }
    }

    /// Number of singular values above `tol · σ_max`.
    pub fn rank(&self, tol: f64) -> usize {
        let smax = self.values.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return 0;
        }
        self.values.iter().filter(|&&s| s > tol * smax).count()
    }
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    Svd::new(a).values
}

/// Orthonormal basis (columns) of the numerical null space of `a`.
pub fn nullspace(a: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let svd = Svd::new(a);
    let r = svd.rank(tol);
    svd.v.slice(s![.., r..]).to_owned()
}

/// 2-norm condition number `σ_max / σ_min` (infinite when singular).
pub fn condition_number(a: &ComplexMatrix) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dagger, from_diag, max_abs_diff, re};
    use ndarray::array;

    #[test]
    fn diagonal_values_sorted() {
        let a = from_diag(&[re(1.0), re(-3.0), C64::new(0.0, 2.0)]);
        let s = singular_values(&a);
        assert!((s[0] - 3.0).abs() < 1e-14);
        assert!((s[1] - 2.0).abs() < 1e-14);
        assert!((s[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nilpotent_rank_and_nullspace() {
        let n = array![[re(0.0), re(1.0)], [re(0.0), re(0.0)]];
        let svd = Svd::new(&n);
        assert_eq!(svd.rank(1e-8), 1);
        let ns = nullspace(&n, 1e-8);
        assert_eq!(ns.ncols(), 1);
        let image = n.dot(&ns);
        assert!(image.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn values_match_gram_eigenvalues() {
        let a = array![
            [C64::new(1.0, 2.0), C64::new(0.5, -1.0), re(3.0)],
            [C64::new(-2.0, 0.1), re(0.0), C64::new(0.0, 1.0)]
        ];
        let s = singular_values(&a);
        // sum of squares equals the Frobenius norm squared
        let fro: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        let ss: f64 = s.iter().map(|x| x * x).sum();
        assert!((fro - ss).abs() < 1e-12);
        assert_eq!(s.len(), 3);
        assert!(s[2].abs() < 1e-12);
        let svd = Svd::new(&a);
        let vv = dagger(&svd.v).dot(&svd.v);
        assert!(max_abs_diff(&vv, &crate::linalg::identity(3)) < 1e-13);
    }
}
