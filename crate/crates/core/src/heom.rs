//! Hierarchical equations of motion in vectorized form.
//!
//! Every exponent term contributes one or two *labels* (exponent channels).
//! An ADO is a multiset of labels, stored as a sorted index list; its
//! level is the multiset size. ADOs are ordered level-major, then
//! lexicographically, so ADO 0 is the physical density matrix.

use std::fmt::Write as _;

use ndarray::{s, Array2};
use serde::Serialize;

use crate::environment::CorrelationSpec;
use crate::error::{Error, Result};
use crate::extended::{ExtendedLiouvillian, Layout};
use crate::linalg::{
    anticommutator_superop, commutator_superop, dagger, identity, kron, transpose, ComplexMatrix,
    ComplexVector, C64, I, ZERO,
};

/// Largest generator dimension the builders will produce.
pub const MAX_HEOM_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sector {
    /// Absorption, RWA.
    Plus,
    /// Emission, RWA.
    Minus,
    /// Real part of `C(t)`, general coupling.
    Real,
    /// Imaginary part of `C(t)`, general coupling.
    Imag,
}

impl Sector {
    fn symbol(self) -> &'static str {
        match self {
            Sector::Plus => "+",
            Sector::Minus => "-",
            Sector::Real => "R",
            Sector::Imag => "I",
        }
    }
}

/// One exponential channel `ξ e^{−χt}` of the hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeomLabel {
    pub sector: Sector,
    /// Source exponent term.
    pub term: usize,
    pub xi: C64,
    /// `ξ^{ν̄*}`, the right-action prefactor in the RWA lowering operator.
    pub xi_bar_conj: C64,
    pub chi: C64,
}

/// How strongly an ADO couples down to the ADO with one label `r` removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum LoweringWeight {
    /// Multiplicity of `r` in the index, from differentiating `e^{−χt}` powers.
    #[default]
    Occupation,
    /// Always 1. The reduced dynamics are identical (the ADOs are rescaled)
    /// but higher-tier blocks differ.
    Unit,
}

#[derive(Debug, Clone)]
pub struct HeomModel {
    pub system_hamiltonian: ComplexMatrix,
    /// `Q` in general form, `Q̃` with RWA.
    pub coupling: ComplexMatrix,
    pub correlation: CorrelationSpec,
    pub tier: usize,
    pub weighting: LoweringWeight,
}

impl HeomModel {
    pub fn qubit_rwa(correlation: CorrelationSpec, tier: usize) -> Self {
        HeomModel {
            system_hamiltonian: Array2::zeros((2, 2)),
            coupling: crate::pseudomode::sigma_minus(),
            correlation,
            tier,
            weighting: LoweringWeight::Occupation,
        }
    }

    fn validate(&self) -> Result<usize> {
        let d = self.system_hamiltonian.nrows();
        if self.system_hamiltonian.ncols() != d || self.coupling.dim() != (d, d) {
            return Err(Error::dim(
                "system Hamiltonian and coupling operator must be square and equal size",
            ));
        }
        self.correlation.validate()?;
        Ok(d)
    }
}

/// Labels for the rotating-wave hierarchy: all `ν = +` channels, then all
/// `ν = −` channels. At zero temperature `ξ⁺ = 0`.
pub fn rwa_labels(spec: &CorrelationSpec) -> Vec<HeomLabel> {
    let plus = spec.terms.iter().enumerate().map(|(l, t)| HeomLabel {
        sector: Sector::Plus,
        term: l,
        xi: ZERO,
        xi_bar_conj: t.weight.conj(),
        chi: t.rate().conj(),
    });
    let minus = spec.terms.iter().enumerate().map(|(l, t)| HeomLabel {
        sector: Sector::Minus,
        term: l,
        xi: t.weight,
        xi_bar_conj: ZERO,
        chi: t.rate(),
    });
    plus.chain(minus).collect()
}

/// Labels for the general hierarchy from `C = C^R + i C^I`, merging equal
/// rates and dropping vanishing amplitudes.
pub fn general_labels(spec: &CorrelationSpec) -> Vec<HeomLabel> {
    let mut out: Vec<HeomLabel> = Vec::new();
    let mut push = |sector: Sector, term: usize, xi: C64, chi: C64| {
        if let Some(l) = out
            .iter_mut()
            .find(|l| l.sector == sector && (l.chi - chi).norm() <= 1e-14 * chi.norm().max(1.0))
        {
            l.xi += xi;
        } else {
            out.push(HeomLabel {
                sector,
                term,
                xi,
                xi_bar_conj: ZERO,
                chi,
            });
        }
    };
    for (l, t) in spec.terms.iter().enumerate() {
        let (w, chi) = (t.weight, t.rate());
        push(Sector::Real, l, w * 0.5, chi);
        push(Sector::Real, l, w.conj() * 0.5, chi.conj());
    }
    for (l, t) in spec.terms.iter().enumerate() {
        let (w, chi) = (t.weight, t.rate());
        push(Sector::Imag, l, -I * w * 0.5, chi);
        push(Sector::Imag, l, I * w.conj() * 0.5, chi.conj());
    }
    let scale = out.iter().fold(0.0f64, |m, l| m.max(l.xi.norm()));
    out.retain(|l| l.xi.norm() > 1e-14 * scale);
    out
}

/// Sorted label multiset of one ADO.
pub type AdoIndex = Vec<usize>;

/// All multisets of `labels` labels with size up to `tier`, level-major then
/// lexicographic.
pub fn enumerate_ados(labels: usize, tier: usize) -> Vec<AdoIndex> {
    let mut out = vec![Vec::new()];
    let mut level: Vec<AdoIndex> = vec![Vec::new()];
    for _ in 0..tier {
        let mut next = Vec::new();
        for idx in &level {
            let start = idx.last().copied().unwrap_or(0);
            for k in start..labels {
                let mut j = idx.clone();
                j.push(k);
                next.push(j);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

#[derive(Debug, Clone)]
pub struct HeomLiouvillian {
    pub extended: ExtendedLiouvillian,
    pub ados: Vec<AdoIndex>,
    pub labels: Vec<HeomLabel>,
}

impl HeomLiouvillian {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.extended.matrix
    }

    pub fn system_dim(&self) -> usize {
        self.extended.system_dim()
    }

    /// First basis index of each ADO block.
    pub fn offset(&self, ado: usize) -> usize {
        ado * self.system_dim().pow(2)
    }

    /// One line per ADO: position, level, offset, label list.
    pub fn manifest(&self) -> String {
        let mut s = String::from("# ado level offset labels\n");
        for (n, j) in self.ados.iter().enumerate() {
            let names: Vec<String> = j
                .iter()
                .map(|&k| {
                    let l = &self.labels[k];
                    format!("{}{}", l.sector.symbol(), l.term + 1)
                })
                .collect();
            let _ = writeln!(s, "{n} {} {} [{}]", j.len(), self.offset(n), names.join(","));
        }
        s
    }
}

/// `ρ_S` from the level-0 block of a hierarchy vector.
pub fn project_system(h: &HeomLiouvillian, v: &ComplexVector) -> Result<ComplexMatrix> {
    h.extended.reduce(v)
}

struct Coupling {
    /// Raising superoperator per label.
    up: Vec<ComplexMatrix>,
    /// Lowering superoperator per label.
    down: Vec<ComplexMatrix>,
}

fn assemble(
    model: &HeomModel,
    d: usize,
    labels: Vec<HeomLabel>,
    ops: Coupling,
) -> Result<HeomLiouvillian> {
    if labels.is_empty() {
        log::warn!("no exponent channels: hierarchy is decoupled");
    }
    let ados = enumerate_ados(labels.len(), model.tier);
    let d2 = d * d;
    let n = ados.len() * d2;
    if n > MAX_HEOM_DIM {
        return Err(Error::dim(format!(
            "hierarchy has {} ADOs ({n} rows), above the cap {MAX_HEOM_DIM}",
            ados.len()
        )));
    }
    let pos: std::collections::HashMap<&AdoIndex, usize> =
        ados.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let l0 = commutator_superop(&model.system_hamiltonian).mapv(|z| -I * z);
    let id = identity(d2);
    let mut m = Array2::zeros((n, n));

    for (i, j) in ados.iter().enumerate() {
        let damp: C64 = j.iter().map(|&k| labels[k].chi).sum();
        let diag = &l0 - &id.mapv(|z| z * damp);
        m.slice_mut(s![i * d2..(i + 1) * d2, i * d2..(i + 1) * d2])
            .assign(&diag);
        if j.len() < model.tier {
            for k in 0..labels.len() {
                let mut up = j.clone();
                up.push(k);
                up.sort_unstable();
                let col = pos[&up];
                let mut blk = m.slice_mut(s![i * d2..(i + 1) * d2, col * d2..(col + 1) * d2]);
                blk.zip_mut_with(&ops.up[k], |x, a| *x += -I * a);
            }
        }
        let mut seen = Vec::new();
        for &r in j {
            if seen.contains(&r) {
                continue;
            }
            seen.push(r);
            let weight = match model.weighting {
                LoweringWeight::Occupation => j.iter().filter(|&&x| x == r).count() as f64,
                LoweringWeight::Unit => 1.0,
            };
            let mut down = j.clone();
            let at = down.iter().position(|&x| x == r).expect("present");
            down.remove(at);
            let col = pos[&down];
            let mut blk = m.slice_mut(s![i * d2..(i + 1) * d2, col * d2..(col + 1) * d2]);
            blk.zip_mut_with(&ops.down[r], |x, b| *x += -I * weight * b);
        }
    }

    let sys_labels: Vec<String> = (0..d)
        .flat_map(|a| (0..d).map(move |b| (a, b)))
        .map(|(a, b)| {
            if d == 2 {
                format!("|{}⟩⟨{}|", ["g", "e"][a], ["g", "e"][b])
            } else {
                format!("|{a}⟩⟨{b}|")
            }
        })
        .collect();
    let basis = ados
        .iter()
        .flat_map(|j| {
            let tag: Vec<String> = j
                .iter()
                .map(|&k| format!("{}{}", labels[k].sector.symbol(), labels[k].term + 1))
                .collect();
            let tag = tag.join(",");
            sys_labels.iter().map(move |s| format!("[{tag}] {s}"))
        })
        .collect();

    Ok(HeomLiouvillian {
        extended: ExtendedLiouvillian {
            matrix: m,
            labels: basis,
            layout: Layout::Heom {
                system_dim: d,
                ados: ados.len(),
            },
        },
        ados,
        labels,
    })
}

/// Rotating-wave hierarchy with `A_k = [Q̃^{ν̄}, ·]` and
/// `B_k = ξ^ν Q̃^ν · − ξ^{ν̄*} · Q̃^ν`, where `Q̃⁻ = Q̃`, `Q̃⁺ = Q̃†`.
pub fn build_heom_rwa(model: &HeomModel) -> Result<HeomLiouvillian> {
    let d = model.validate()?;
    if !model.correlation.rwa {
        return Err(Error::Unsupported(
            "rotating-wave hierarchy needs an RWA correlation spec".into(),
        ));
    }
    let labels = rwa_labels(&model.correlation);
    let q_minus = model.coupling.clone();
    let q_plus = dagger(&model.coupling);
    let id = identity(d);
    let mut up = Vec::new();
    let mut down = Vec::new();
    for l in &labels {
        let (q_nu, q_bar) = match l.sector {
            Sector::Plus => (&q_plus, &q_minus),
            _ => (&q_minus, &q_plus),
        };
        up.push(commutator_superop(q_bar));
        let left = kron(q_nu, &id).mapv(|z| z * l.xi);
        let right = kron(&id, &transpose(q_nu)).mapv(|z| z * l.xi_bar_conj);
        down.push(left - right);
    }
    assemble(model, d, labels, Coupling { up, down })
}

/// General hierarchy with `A = Q^×`, `B^R = ξ^R Q^×`, `B^I = i ξ^I Q^∘`.
pub fn build_heom_general(model: &HeomModel) -> Result<HeomLiouvillian> {
    let d = model.validate()?;
    let labels = general_labels(&model.correlation);
    let cross = commutator_superop(&model.coupling);
    let circ = anticommutator_superop(&model.coupling);
    let up = labels.iter().map(|_| cross.clone()).collect();
    let down = labels
        .iter()
        .map(|l| match l.sector {
            Sector::Imag => circ.mapv(|z| z * I * l.xi),
            _ => cross.mapv(|z| z * l.xi),
        })
        .collect();
    assemble(model, d, labels, Coupling { up, down })
}

#[derive(Debug, Clone)]
pub struct Block {
    /// Global basis indices, ascending.
    pub indices: Vec<usize>,
    pub matrix: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct HeomBlocks {
    pub population: Block,
    pub coherence: Block,
    pub coherence_conj: Block,
    /// Basis elements connected to none of the three sectors.
    pub residual: Option<Block>,
}

fn component(m: &ComplexMatrix, seeds: &[usize], thr: f64) -> Vec<usize> {
    let n = m.nrows();
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = seeds.to_vec();
    for &s in seeds {
        seen[s] = true;
    }
    while let Some(j) = stack.pop() {
        for i in 0..n {
            if !seen[i] && (m[[i, j]].norm() > thr || m[[j, i]].norm() > thr) {
                seen[i] = true;
                stack.push(i);
            }
        }
    }
    (0..n).filter(|&i| seen[i]).collect()
}

fn block(m: &ComplexMatrix, idx: Vec<usize>) -> Block {
    let k = idx.len();
    let mut b = Array2::zeros((k, k));
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            b[[r, c]] = m[[i, j]];
        }
    }
    Block {
        indices: idx,
        matrix: b,
    }
}

/// Splits a qubit hierarchy into the sectors reachable from the populations
/// (`|g⟩⟨g|`, `|e⟩⟨e|`), the coherence `|e⟩⟨g|` and its conjugate.
pub fn block_decompose(h: &HeomLiouvillian) -> Result<HeomBlocks> {
    if h.system_dim() != 2 {
        return Err(Error::NotBlockDecomposable(
            "sector split is defined for a two-level system".into(),
        ));
    }
    let m = h.matrix();
    let thr = 1e-12;
    let p = component(m, &[0, 3], thr);
    let c = component(m, &[2], thr);
    let cc = component(m, &[1], thr);
    let overlap = |a: &[usize], b: &[usize]| a.iter().any(|x| b.contains(x));
    if overlap(&p, &c) || overlap(&p, &cc) || overlap(&c, &cc) {
        return Err(Error::NotBlockDecomposable(
            "population and coherence sectors are coupled".into(),
        ));
    }
    let rest: Vec<usize> = (0..m.nrows())
        .filter(|i| !p.contains(i) && !c.contains(i) && !cc.contains(i))
        .collect();
    Ok(HeomBlocks {
        population: block(m, p),
        coherence: block(m, c),
        coherence_conj: block(m, cc),
        residual: if rest.is_empty() { None } else { Some(block(m, rest)) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{exponents_for, ExponentTerm, SpectralDensity};
    use crate::linalg::{eigenvalues, jordan_structure, max_abs_diff, re, vec, JordanOptions, ONE};
    use ndarray::array;

    fn gapless(g: f64, l: f64, tier: usize, w: LoweringWeight) -> HeomModel {
        let mut m = HeomModel::qubit_rwa(
            exponents_for(&SpectralDensity::lorentzian(g, l, 0.0).unwrap()).unwrap(),
            tier,
        );
        m.weighting = w;
        m
    }

    #[test]
    fn enumeration() {
        assert_eq!(enumerate_ados(1, 2), vec![vec![], vec![0], vec![0, 0]]);
        assert_eq!(enumerate_ados(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(enumerate_ados(2, 1), vec![vec![], vec![0], vec![1]]);
        assert_eq!(
            enumerate_ados(2, 2),
            vec![vec![], vec![0], vec![1], vec![0, 0], vec![0, 1], vec![1, 1]]
        );
    }

    #[test]
    fn dimensions() {
        let h = build_heom_rwa(&gapless(0.5, 1.0, 2, LoweringWeight::Occupation)).unwrap();
        assert_eq!(h.matrix().nrows(), 24);
        let spec = exponents_for(&SpectralDensity::bandgap(0.3, 1.0, 0.0, 0.25).unwrap()).unwrap();
        let h = build_heom_rwa(&HeomModel::qubit_rwa(spec, 2)).unwrap();
        assert_eq!(h.matrix().nrows(), 60);
    }

    #[test]
    fn tier_zero_is_bare_commutator() {
        let mut m = gapless(0.5, 1.0, 0, LoweringWeight::Occupation);
        m.system_hamiltonian = array![[ZERO, ZERO], [ZERO, re(3.0)]];
        let h = build_heom_rwa(&m).unwrap();
        let expect = commutator_superop(&m.system_hamiltonian).mapv(|z| -I * z);
        assert!(max_abs_diff(h.matrix(), &expect) == 0.0);
    }

    #[test]
    fn level_zero_couples_only_upward() {
        let h = build_heom_rwa(&gapless(0.5, 1.0, 2, LoweringWeight::Occupation)).unwrap();
        let m = h.matrix();
        // columns belonging to level-2 ADOs
        for (a, j) in h.ados.iter().enumerate() {
            if j.len() == 2 {
                for r in 0..4 {
                    for c in h.offset(a)..h.offset(a) + 4 {
                        assert_eq!(m[[r, c]], ZERO);
                    }
                }
            }
        }
        // trace row of level 0 vanishes
        let w = array![ONE, ZERO, ZERO, ONE];
        let top = m.slice(s![0..4, ..]);
        assert!(w.dot(&top).iter().all(|z| z.norm() < 1e-14));
    }

    fn reference_blocks(g: f64, l: f64) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
        let k = I * g * l / 2.0;
        let z = ZERO;
        let (i, li, l2) = (I, re(-l), re(-2.0 * l));
        let p = array![
            [z, z, -i, i, z, z],
            [z, z, i, -i, z, z],
            [z, k, li, z, -i, i],
            [z, -k, z, li, i, -i],
            [z, z, -k, k, l2, z],
            [z, z, z, z, z, l2]
        ];
        let c = array![
            [z, -i, i, z, z],
            [-k, li, z, -i, i],
            [z, z, li, i, -i],
            [z, z, k, l2, z],
            [z, z, -k, z, l2]
        ];
        let cc = array![
            [z, i, -i, z, z],
            [k, li, z, -i, i],
            [z, z, li, i, -i],
            [z, z, k, l2, z],
            [z, z, -k, z, l2]
        ];
        (p, c, cc)
    }

    #[test]
    fn unit_weighting_reproduces_reference_blocks() {
        for (g, l) in [(0.5, 1.0), (0.3, 2.0)] {
            let h = build_heom_rwa(&gapless(g, l, 2, LoweringWeight::Unit)).unwrap();
            let b = block_decompose(&h).unwrap();
            let (p, c, cc) = reference_blocks(g, l);
            assert_eq!(b.population.matrix.dim(), (6, 6));
            assert!(max_abs_diff(&b.population.matrix, &p) < 1e-14);
            assert!(max_abs_diff(&b.coherence.matrix, &c) < 1e-14);
            assert!(max_abs_diff(&b.coherence_conj.matrix, &cc) < 1e-14);
            assert!(b.residual.as_ref().map_or(0, |r| r.indices.len()) == 8);
        }
    }

    #[test]
    fn block_spectra_at_ep() {
        let h = build_heom_rwa(&gapless(0.5, 1.0, 2, LoweringWeight::Unit)).unwrap();
        let b = block_decompose(&h).unwrap();
        let o = JordanOptions::default();
        let p = jordan_structure(&b.population.matrix, re(-1.0), &o).unwrap();
        assert_eq!(p.chain_lengths, vec![3, 1]);
        let ev = eigenvalues(&b.population.matrix).unwrap();
        assert!(ev.iter().any(|z| z.norm() < 1e-10));
        assert!(ev.iter().any(|z| (z - re(-2.0)).norm() < 1e-10));
        let c = jordan_structure(&b.coherence.matrix, re(-0.5), &o).unwrap();
        assert_eq!(c.chain_lengths, vec![2]);
        let ev = eigenvalues(&b.coherence.matrix).unwrap();
        for target in [re(-2.0), C64::new(-1.5, -0.5), C64::new(-1.5, 0.5)] {
            assert!(ev.iter().any(|z| (z - target).norm() < 1e-8), "{target} missing");
        }
    }

    #[test]
    fn projection() {
        let h = build_heom_rwa(&gapless(0.5, 1.0, 2, LoweringWeight::Occupation)).unwrap();
        let rho = array![[ZERO, ZERO], [ZERO, ONE]];
        let v = h.extended.embed(&rho).unwrap();
        assert_eq!(project_system(&h, &v).unwrap(), rho);
        let mut ado = ComplexVector::zeros(24);
        ado[h.offset(1) + 2] = ONE;
        assert!(project_system(&h, &ado).unwrap().iter().all(|z| *z == ZERO));
        assert!(project_system(&h, &ComplexVector::zeros(5)).is_err());
        assert_eq!(vec(&rho).len(), 4);
    }

    #[test]
    fn general_builder_structure() {
        let spec = CorrelationSpec::new(vec![ExponentTerm::new(re(0.4), 0.0, 1.0)], false).unwrap();
        let sx = array![[ZERO, ONE], [ONE, ZERO]];
        let m = HeomModel {
            system_hamiltonian: array![[re(0.5), ZERO], [ZERO, re(-0.5)]],
            coupling: sx,
            correlation: spec.clone(),
            tier: 1,
            weighting: LoweringWeight::Occupation,
        };
        let h = build_heom_general(&m).unwrap();
        // one real channel only: the imaginary part of a real exponential vanishes
        assert_eq!(h.labels.len(), 1);
        assert_eq!(h.matrix().nrows(), 8);
        let w = array![ONE, ZERO, ZERO, ONE];
        let top = h.matrix().slice(s![0..4, ..]).to_owned();
        assert!(w.dot(&top).iter().all(|z| z.norm() < 1e-14));

        let decoupled = HeomModel {
            coupling: Array2::zeros((2, 2)),
            tier: 2,
            ..m
        };
        let h = build_heom_general(&decoupled).unwrap();
        for a in 0..h.ados.len() {
            for b in 0..h.ados.len() {
                if a != b {
                    let blk = h.matrix().slice(s![a * 4..a * 4 + 4, b * 4..b * 4 + 4]).to_owned();
                    assert!(blk.iter().all(|z| *z == ZERO));
                }
            }
        }
    }

    #[test]
    fn complex_exponent_gives_imaginary_channels() {
        let spec =
            CorrelationSpec::new(vec![ExponentTerm::new(re(0.4), 1.0, 1.0)], false).unwrap();
        let labels = general_labels(&spec);
        assert_eq!(labels.iter().filter(|l| l.sector == Sector::Real).count(), 2);
        assert_eq!(labels.iter().filter(|l| l.sector == Sector::Imag).count(), 2);
    }

    #[test]
    fn manifest_lines() {
        let h = build_heom_rwa(&gapless(0.5, 1.0, 2, LoweringWeight::Occupation)).unwrap();
        let text = h.manifest();
        assert_eq!(text.lines().count(), 1 + 6);
        assert!(text.contains("3 2 12 [+1,+1]"));
    }
}
