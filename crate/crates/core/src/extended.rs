//! Extended Liouvillians: the generator on system plus auxiliary degrees of
//! freedom, together with the bookkeeping needed to get back to the system.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{partial_trace, unvec, vec, ComplexMatrix, ComplexVector, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Pmeom,
    Heom,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    /// Vector index `a·K + b` holds `|k_a⟩⟨k_b|`, where `k_*` index kets of
    /// the tensor space with subsystem `dims` (system first).
    Pmeom { dims: Vec<usize>, kets: Vec<usize> },
    /// ADO-major stacking of vectorized `d × d` operators, ADO 0 is the
    /// physical density matrix.
    Heom { system_dim: usize, ados: usize },
}

#[derive(Debug, Clone)]
pub struct ExtendedLiouvillian {
    pub matrix: ComplexMatrix,
    /// One label per basis vector.
    pub labels: Vec<String>,
    pub layout: Layout,
}

impl ExtendedLiouvillian {
    pub fn provenance(&self) -> Provenance {
        match self.layout {
            Layout::Pmeom { .. } => Provenance::Pmeom,
            Layout::Heom { .. } => Provenance::Heom,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn system_dim(&self) -> usize {
        match &self.layout {
            Layout::Pmeom { dims, .. } => dims[0],
            Layout::Heom { system_dim, .. } => *system_dim,
        }
    }

    /// Subsystem dimensions for pseudomode layouts.
    pub fn dims(&self) -> Option<&[usize]> {
        match &self.layout {
            Layout::Pmeom { dims, .. } => Some(dims),
            Layout::Heom { .. } => None,
        }
    }

    /// Extended-space operator as a matrix over the full tensor space.
    fn pm_full(&self, v: &ComplexVector, dims: &[usize], kets: &[usize]) -> Result<ComplexMatrix> {
        let k = kets.len();
        let small = unvec(v, k, k)?;
        let d: usize = dims.iter().product();
        let mut full = Array2::zeros((d, d));
        for (a, &ka) in kets.iter().enumerate() {
            for (b, &kb) in kets.iter().enumerate() {
                full[[ka, kb]] = small[[a, b]];
            }
        }
        Ok(full)
    }

    /// Reduced system operator carried by an extended vector.
    pub fn reduce(&self, v: &ComplexVector) -> Result<ComplexMatrix> {
        if v.len() != self.dim() {
            return Err(Error::dim(format!(
                "vector length {} does not match generator dimension {}",
                v.len(),
                self.dim()
            )));
        }
        match &self.layout {
            Layout::Pmeom { dims, kets } => {
                let full = self.pm_full(v, dims, kets)?;
                partial_trace(&full, dims, &[0])
            }
            Layout::Heom { system_dim, .. } => {
                let d = *system_dim;
                let head: ComplexVector = v.slice(ndarray::s![..d * d]).to_owned();
                unvec(&head, d, d)
            }
        }
    }

    /// Extended initial state for a system state `rho_s`, auxiliary
    /// degrees of freedom in their vacuum.
    pub fn embed(&self, rho_s: &ComplexMatrix) -> Result<ComplexVector> {
        let d = self.system_dim();
        if rho_s.dim() != (d, d) {
            return Err(Error::dim(format!(
                "system state is {}x{}, expected {d}x{d}",
                rho_s.nrows(),
                rho_s.ncols()
            )));
        }
        match &self.layout {
            Layout::Pmeom { dims, kets } => {
                let env: usize = dims[1..].iter().product();
                let k = kets.len();
                let mut out = ComplexVector::zeros(k * k);
                for (a, &ka) in kets.iter().enumerate() {
                    for (b, &kb) in kets.iter().enumerate() {
                        if ka % env == 0 && kb % env == 0 {
                            out[a * k + b] = rho_s[[ka / env, kb / env]];
                        }
                    }
                }
                // any system component outside the ket set is silently lost
                let kept: usize = kets.iter().filter(|&&x| x % env == 0).count();
                if kept < d {
                    let dropped = (0..d)
                        .filter(|s| !kets.contains(&(s * env)))
                        .any(|s| (0..d).any(|r| rho_s[[s, r]] != ZERO || rho_s[[r, s]] != ZERO));
                    if dropped {
                        return Err(Error::dim(
                            "system state has support outside the restricted sector",
                        ));
                    }
                }
                Ok(out)
            }
            Layout::Heom { .. } => {
                let mut out = ComplexVector::zeros(self.dim());
                for (i, z) in vec(rho_s).iter().enumerate() {
                    out[i] = *z;
                }
                Ok(out)
            }
        }
    }

    /// Linear functional `v ↦ tr ρ_S` as a row vector.
    pub fn trace_functional(&self) -> ComplexVector {
        let mut w = ComplexVector::zeros(self.dim());
        match &self.layout {
            Layout::Pmeom { kets, .. } => {
                let k = kets.len();
                for a in 0..k {
                    w[a * k + a] = ONE;
                }
            }
            Layout::Heom { system_dim, .. } => {
                let d = *system_dim;
                for a in 0..d {
                    w[a * d + a] = ONE;
                }
            }
        }
        w
    }
}
