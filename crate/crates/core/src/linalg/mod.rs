//! Dense complex linear algebra for small superoperators.
//!
//! Vectorization is row-stacking throughout: `vec(A) = Σ_ij A_ij |i⟩⊗|j⟩`,
//! so `vec(A·X·B) = (A ⊗ Bᵀ)·vec(X)`.

mod eig;
mod io;
mod jordan;
mod lu;
mod propagate;
mod svd;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use eig::{eigendecompose, eigenvalues, EigenOptions, SpectrumResult};
pub use io::{read_matrix, write_matrix};
pub use jordan::{
    cluster_eigenvalues, jordan_chains, jordan_decomposition, jordan_structure, Cluster,
    JordanCluster, JordanDecomposition, JordanOptions, JordanReport,
};
pub use lu::solve;
pub use propagate::{propagate, PropagationMethod, PropagatorOptions};
pub use svd::{condition_number, nullspace, singular_values, Svd};

pub type C64 = Complex64;
pub type ComplexMatrix = Array2<C64>;
pub type ComplexVector = Array1<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    Array2::from_diag_elem(n, ONE)
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.t().mapv(|z| z.conj())
}

pub fn conj(a: &ComplexMatrix) -> ComplexMatrix {
    a.mapv(|z| z.conj())
}

pub fn transpose(a: &ComplexMatrix) -> ComplexMatrix {
    a.t().to_owned()
}

pub fn from_diag(d: &[C64]) -> ComplexMatrix {
    let mut m = Array2::zeros((d.len(), d.len()));
    for (i, &x) in d.iter().enumerate() {
        m[[i, i]] = x;
    }
    m
}

/// Frobenius norm.
pub fn norm_fro(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm_vec(v: &ComplexVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

pub fn is_square(a: &ComplexMatrix) -> bool {
    a.nrows() == a.ncols()
}

pub(crate) fn require_square(a: &ComplexMatrix, what: &str) -> Result<usize> {
    if !is_square(a) {
        return Err(Error::dim(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.diag().sum()
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| kron(&acc, f))
}

/// Row-stacking vectorization.
pub fn vec(a: &ComplexMatrix) -> ComplexVector {
    a.iter().copied().collect()
}

pub fn unvec(v: &ComplexVector, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if v.len() != rows * cols {
        return Err(Error::dim(format!(
            "cannot reshape vector of length {} into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(Array2::from_shape_vec((rows, cols), v.to_vec()).expect("shape checked"))
}

/// `vec(X) ↦ vec(A X)` for a `d × d` operand.
pub fn left_superop(a: &ComplexMatrix) -> ComplexMatrix {
    kron(a, &identity(a.ncols()))
}

/// `vec(X) ↦ vec(X B)`.
pub fn right_superop(b: &ComplexMatrix) -> ComplexMatrix {
    kron(&identity(b.nrows()), &transpose(b))
}

/// `vec(X) ↦ vec([A, X])`.
pub fn commutator_superop(a: &ComplexMatrix) -> ComplexMatrix {
    left_superop(a) - right_superop(a)
}

/// `vec(X) ↦ vec({A, X})`.
pub fn anticommutator_superop(a: &ComplexMatrix) -> ComplexMatrix {
    left_superop(a) + right_superop(a)
}

/// Matrix of the Lindblad generator
/// `−i[H,·] + Σ γ_i (L_i · L_i† − ½{L_i†L_i, ·})` in the row-stacking basis.
///
/// `H` is not required to be Hermitian.
pub fn liouvillian_from_parts(
    h: &ComplexMatrix,
    jumps: &[(ComplexMatrix, f64)],
) -> Result<ComplexMatrix> {
    let d = require_square(h, "Hamiltonian")?;
    let id = identity(d);
    let mut l = (kron(h, &id) - kron(&id, &transpose(h))).mapv(|z| -I * z);
    for (k, (op, rate)) in jumps.iter().enumerate() {
        if op.dim() != (d, d) {
            return Err(Error::dim(format!(
                "jump operator {k} is {}x{}, Hamiltonian is {d}x{d}",
                op.nrows(),
                op.ncols()
            )));
        }
        let op_conj = conj(op);
        let ldl = dagger(op).dot(op);
        let term = kron(op, &op_conj).mapv(|z| 2.0 * z)
            - kron(&ldl, &id)
            - kron(&id, &transpose(op).dot(&op_conj));
        l = l + term.mapv(|z| 0.5 * rate * z);
    }
    Ok(l)
}

/// Partial trace of `rho` over every subsystem not listed in `keep`.
///
/// `dims` lists subsystem dimensions in tensor order; the kept subsystems
/// retain their relative order.
pub fn partial_trace(rho: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let n = require_square(rho, "density matrix")?;
    let total: usize = dims.iter().product();
    if total != n {
        return Err(Error::dim(format!(
            "subsystem dims {dims:?} multiply to {total}, matrix is {n}x{n}"
        )));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::dim(format!("kept subsystem {bad} out of range")));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let dk: usize = kept_dims.iter().product();
    let dt: usize = traced_dims.iter().product();

    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let compose = |kept_idx: usize, traced_idx: usize| -> usize {
        let mut flat = 0;
        let mut rem = kept_idx;
        for (pos, &k) in keep_sorted.iter().enumerate().rev() {
            flat += (rem % kept_dims[pos]) * strides[k];
            rem /= kept_dims[pos];
        }
        let mut rem = traced_idx;
        for (pos, &k) in traced.iter().enumerate().rev() {
            flat += (rem % traced_dims[pos]) * strides[k];
            rem /= traced_dims[pos];
        }
        flat
    };

    let mut out = Array2::zeros((dk, dk));
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += rho[[compose(a, t), compose(b, t)]];
            }
            out[[a, b]] = acc;
        }
    }
    Ok(out)
}

/// `(M − λI)`.
pub fn shift(m: &ComplexMatrix, lambda: C64) -> ComplexMatrix {
    let mut a = m.clone();
    for i in 0..a.nrows() {
        a[[i, i]] -= lambda;
    }
    a
}

/// Annihilation operator truncated to `levels` Fock states.
pub fn annihilation(levels: usize) -> ComplexMatrix {
    let mut a = Array2::zeros((levels, levels));
    for n in 1..levels {
        a[[n - 1, n]] = re((n as f64).sqrt());
    }
    a
}
