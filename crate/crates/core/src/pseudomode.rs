//! Pseudomode mapping: each exponent term of `C(t)` becomes a damped bosonic
//! mode coupled to the system.

use ndarray::Array2;

use crate::environment::CorrelationSpec;
use crate::error::{Error, Result};
use crate::extended::{ExtendedLiouvillian, Layout};
use crate::linalg::{
    annihilation, dagger, identity, kron_all, liouvillian_from_parts, propagate, ComplexMatrix,
    ComplexVector, JordanCluster, PropagatorOptions, C64, I, ONE, ZERO,
};

/// Largest extended Liouvillian dimension the builders will produce.
pub const MAX_LIOUVILLIAN_DIM: usize = 4096;

#[derive(Debug, Clone)]
pub struct PseudomodeModel {
    pub system_hamiltonian: ComplexMatrix,
    /// `Q` without RWA, `Q̃` (lowering part) with RWA.
    pub coupling: ComplexMatrix,
    pub rwa: bool,
    pub correlation: CorrelationSpec,
    /// Highest Fock state kept per pseudomode.
    pub n_max: usize,
    /// Replaces the principal square roots of the weights when set.
    pub coupling_override: Option<Vec<C64>>,
}

impl PseudomodeModel {
    /// Two-level system in the interaction picture, `H_S = 0`, `Q̃ = σ₋`.
    pub fn qubit_rwa(correlation: CorrelationSpec) -> Self {
        PseudomodeModel {
            system_hamiltonian: Array2::zeros((2, 2)),
            coupling: sigma_minus(),
            rwa: true,
            correlation,
            n_max: 1,
            coupling_override: None,
        }
    }

    pub fn modes(&self) -> usize {
        self.correlation.terms.len()
    }

    /// Coupling `α_i` per pseudomode.
    pub fn alphas(&self) -> Vec<C64> {
        match &self.coupling_override {
            Some(a) => a.clone(),
            None => self.correlation.terms.iter().map(|t| t.coupling()).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.system_hamiltonian.nrows();
        if self.system_hamiltonian.ncols() != d || self.coupling.dim() != (d, d) {
            return Err(Error::dim("system Hamiltonian and coupling operator must be square and equal size"));
        }
        if self.n_max == 0 {
            return Err(Error::param("n_max", "Fock truncation must be at least 1"));
        }
        self.correlation.validate()?;
        if let Some(a) = &self.coupling_override {
            if a.len() != self.modes() {
                return Err(Error::dim(format!(
                    "{} coupling overrides for {} pseudomodes",
                    a.len(),
                    self.modes()
                )));
            }
        }
        if self.n_max > 1 {
            log::warn!("Fock truncation n_max = {} beyond the validated single-excitation setting", self.n_max);
        }
        let levels = self.n_max + 1;
        let hilbert = d * levels.pow(self.modes() as u32);
        if hilbert.saturating_mul(hilbert) > MAX_LIOUVILLIAN_DIM {
            return Err(Error::dim(format!(
                "extended Liouvillian would be {0}x{0}, above the cap {MAX_LIOUVILLIAN_DIM}",
                hilbert * hilbert
            )));
        }
        Ok(())
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.system_hamiltonian.nrows()];
        dims.extend(std::iter::repeat_n(self.n_max + 1, self.modes()));
        dims
    }

    /// Annihilation operator of pseudomode `i` on the full space.
    fn mode_op(&self, i: usize) -> ComplexMatrix {
        let dims = self.dims();
        let factors: Vec<ComplexMatrix> = dims
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                if k == i + 1 {
                    annihilation(n)
                } else {
                    identity(n)
                }
            })
            .collect();
        kron_all(&factors)
    }

    fn system_op(&self, op: &ComplexMatrix) -> ComplexMatrix {
        let dims = self.dims();
        let mut factors = vec![op.clone()];
        factors.extend(dims[1..].iter().map(|&n| identity(n)));
        kron_all(&factors)
    }
}

pub fn sigma_minus() -> ComplexMatrix {
    ndarray::array![[ZERO, ONE], [ZERO, ZERO]]
}

/// `H_S + Σ Ω_i a_i†a_i + α_i(Q̃ a_i† + Q̃† a_i)` with RWA, or
/// `H_S + Σ Ω_i a_i†a_i + α_i Q (a_i† + a_i)` without.
///
/// `α_i` is not conjugated, so imaginary couplings give a non-Hermitian result.
pub fn build_pm_hamiltonian(model: &PseudomodeModel) -> Result<ComplexMatrix> {
    model.validate()?;
    let mut h = model.system_op(&model.system_hamiltonian);
    let q = model.system_op(&model.coupling);
    let qd = model.system_op(&dagger(&model.coupling));
    for (i, (alpha, term)) in model
        .alphas()
        .into_iter()
        .zip(&model.correlation.terms)
        .enumerate()
    {
        let a = model.mode_op(i);
        let ad = dagger(&a);
        h = h + ad.dot(&a).mapv(|z| z * term.frequency);
        let coupling = if model.rwa {
            q.dot(&ad) + qd.dot(&a)
        } else {
            q.dot(&(&ad + &a))
        };
        h = h + coupling.mapv(|z| z * alpha);
    }
    Ok(h)
}

fn ket_label(mut idx: usize, dims: &[usize]) -> String {
    let mut parts = vec![String::new(); dims.len()];
    for k in (0..dims.len()).rev() {
        let v = idx % dims[k];
        idx /= dims[k];
        parts[k] = if k == 0 && dims[0] == 2 {
            ["g", "e"][v].to_string()
        } else {
            v.to_string()
        };
    }
    parts.join(",")
}

fn labels_for(kets: &[usize], dims: &[usize]) -> Vec<String> {
    let names: Vec<String> = kets.iter().map(|&k| ket_label(k, dims)).collect();
    let mut out = Vec::with_capacity(kets.len() * kets.len());
    for a in &names {
        for b in &names {
            out.push(format!("|{a}⟩⟨{b}|"));
        }
    }
    out
}

/// PMEOM generator on the full truncated space.
pub fn build_pm_liouvillian(model: &PseudomodeModel) -> Result<ExtendedLiouvillian> {
    let h = build_pm_hamiltonian(model)?;
    let jumps: Vec<(ComplexMatrix, f64)> = model
        .correlation
        .terms
        .iter()
        .enumerate()
        .map(|(i, t)| (model.mode_op(i), t.decay))
        .collect();
    let matrix = liouvillian_from_parts(&h, &jumps)?;
    let dims = model.dims();
    let kets: Vec<usize> = (0..h.nrows()).collect();
    Ok(ExtendedLiouvillian {
        matrix,
        labels: labels_for(&kets, &dims),
        layout: Layout::Pmeom { dims, kets },
    })
}

/// Ket indices `|g,0…⟩, |e,0…⟩, |g,1_i⟩` in a qubit ⊗ (two-level)^N space.
pub fn single_excitation_kets(modes: usize) -> Vec<usize> {
    let mut kets = vec![0, 1 << modes];
    kets.extend((0..modes).map(|i| 1 << (modes - 1 - i)));
    kets
}

/// Generator restricted to outer products of single-excitation kets,
/// dimension `(2 + N)²`.
pub fn restrict_single_excitation(model: &PseudomodeModel) -> Result<ExtendedLiouvillian> {
    if !model.rwa {
        return Err(Error::Unsupported(
            "single-excitation restriction requires the rotating-wave coupling".into(),
        ));
    }
    if model.system_hamiltonian.nrows() != 2 {
        return Err(Error::Unsupported(
            "single-excitation restriction is defined for a two-level system".into(),
        ));
    }
    let mut m1 = model.clone();
    m1.n_max = 1;
    let full = build_pm_liouvillian(&m1)?;
    let dims = m1.dims();
    let d: usize = dims.iter().product();
    let kets = single_excitation_kets(m1.modes());
    let sel: Vec<usize> = kets
        .iter()
        .flat_map(|&a| kets.iter().map(move |&b| a * d + b))
        .collect();
    let k = sel.len();
    let mut matrix = Array2::zeros((k, k));
    for (r, &i) in sel.iter().enumerate() {
        for (c, &j) in sel.iter().enumerate() {
            matrix[[r, c]] = full.matrix[[i, j]];
        }
    }
    Ok(ExtendedLiouvillian {
        matrix,
        labels: labels_for(&kets, &dims),
        layout: Layout::Pmeom { dims, kets },
    })
}

#[derive(Debug, Clone)]
pub struct ReducedEigenmatrix {
    pub lambda: C64,
    /// Which chain of the cluster.
    pub chain: usize,
    /// Position in the chain; 0 is the true eigenmatrix.
    pub order: usize,
    pub matrix: ComplexMatrix,
}

/// System-space images of every (generalized) eigenvector.
pub fn reduced_eigenmatrices(
    l: &ExtendedLiouvillian,
    clusters: &[JordanCluster],
) -> Result<Vec<ReducedEigenmatrix>> {
    let mut out = Vec::new();
    for cl in clusters {
        for (c, chain) in cl.chains.iter().enumerate() {
            for (j, v) in chain.iter().enumerate() {
                out.push(ReducedEigenmatrix {
                    lambda: cl.report.lambda,
                    chain: c,
                    order: j,
                    matrix: l.reduce(v)?,
                });
            }
        }
    }
    Ok(out)
}

/// Linear network of coupled modes, one of which talks to the environment.
#[derive(Debug, Clone)]
pub struct BosonicNetwork {
    pub frequencies: Vec<f64>,
    /// `(j, k, χ_jk)`, symmetric by construction.
    pub couplings: Vec<(usize, usize, f64)>,
    /// Zero-based index of the environment-coupled mode.
    pub env_mode: usize,
    /// Pseudomode exponents; `None` selects the Markovian limit.
    pub correlation: Option<CorrelationSpec>,
    /// Flat decay rate Γ used in the Markovian limit.
    pub markov_rate: f64,
    /// Rotating-frame frequency subtracted from every mode.
    pub reference_frequency: f64,
}

impl BosonicNetwork {
    /// Two degenerate modes with coupling χ, the second one damped.
    pub fn two_mode(chi: f64, omega0: f64, correlation: Option<CorrelationSpec>, markov_rate: f64) -> Self {
        BosonicNetwork {
            frequencies: vec![omega0, omega0],
            couplings: vec![(0, 1, chi)],
            env_mode: 1,
            correlation,
            markov_rate,
            reference_frequency: omega0,
        }
    }
}

/// Matrix `H` of the amplitude equation `d⟨v⟩/dt = i H ⟨v⟩` over
/// `(c_1 … c_M, a_1 … a_N)`.
pub fn effective_nhh(net: &BosonicNetwork) -> Result<ComplexMatrix> {
    let m = net.frequencies.len();
    if m == 0 {
        return Err(Error::param("frequencies", "network has no modes"));
    }
    if net.env_mode >= m {
        return Err(Error::param(
            "env_mode",
            format!("index {} out of range for {m} modes", net.env_mode),
        ));
    }
    let terms = net.correlation.as_ref().map(|c| c.terms.as_slice()).unwrap_or(&[]);
    if let Some(c) = &net.correlation {
        c.validate()?;
    }
    let n = m + terms.len();
    let mut h = Array2::zeros((n, n));
    for (k, &w) in net.frequencies.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::param("frequencies", "must be finite"));
        }
        h[[k, k]] = C64::new(w - net.reference_frequency, 0.0);
    }
    for &(j, k, chi) in &net.couplings {
        if j >= m || k >= m || j == k {
            return Err(Error::param("couplings", format!("bad mode pair ({j}, {k})")));
        }
        h[[j, k]] = C64::new(chi, 0.0);
        h[[k, j]] = C64::new(chi, 0.0);
    }
    let e = net.env_mode;
    if net.correlation.is_none() {
        h[[e, e]] += I * net.markov_rate;
    }
    for (i, t) in terms.iter().enumerate() {
        let p = m + i;
        let alpha = t.coupling();
        h[[e, p]] = alpha;
        h[[p, e]] = alpha;
        h[[p, p]] = C64::new(t.frequency, 0.5 * t.decay);
    }
    Ok(h)
}

/// `v(t) = exp(i H t) v0`.
pub fn evolve_amplitudes(
    h: &ComplexMatrix,
    v0: &ComplexVector,
    times: &[f64],
    opts: &PropagatorOptions,
) -> Result<Vec<ComplexVector>> {
    let gen = h.mapv(|z| I * z);
    propagate(&gen, v0, times, opts)
}
