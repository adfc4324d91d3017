//! Numerical Jordan structure from rank sequences of `(M − λI)^k`.
//!
//! This is ill-conditioned by nature. Everything hinges on the singular
//! value threshold `tol_rank`, which is why it is exposed.

use ndarray::Array2;

use super::eig::cmp_eig;
use super::svd::Svd;
use super::{
    eigendecompose, eigenvalues, identity, norm_vec, require_square, shift, solve, ComplexMatrix,
    ComplexVector, EigenOptions, C64, ZERO,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct JordanOptions {
    /// Rank threshold for `(M − λI)^k`, relative to `σ_max(M − λI)^k`.
    pub tol_rank: f64,
    /// Clustering distance relative to `max(1, spectral radius)`.
    pub tol_cluster: f64,
    /// An excluded eigenvalue within this many cluster radii is ambiguous.
    pub ambiguity_factor: f64,
}

impl Default for JordanOptions {
    fn default() -> Self {
        JordanOptions {
            tol_rank: 1e-8,
            tol_cluster: 1e-4,
            ambiguity_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Mean of the member eigenvalues.
    pub representative: C64,
    /// Indices into the eigenvalue list that was clustered.
    pub members: Vec<usize>,
    /// Largest member distance from the representative.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JordanReport {
    pub lambda: C64,
    pub algebraic: usize,
    pub geometric: usize,
    /// Sorted descending.
    pub chain_lengths: Vec<usize>,
    /// `rank((M − λI)^k)` for `k = 0, 1, ...` until it stabilizes.
    pub ranks: Vec<usize>,
}

impl JordanReport {
    /// Longest chain; the order of the exceptional point when above 1.
    pub fn order(&self) -> usize {
        self.chain_lengths.first().copied().unwrap_or(0)
    }
}

/// Single-linkage clustering with threshold `tol · max(1, spectral radius)`.
pub fn cluster_eigenvalues(ev: &[C64], tol_cluster: f64) -> Vec<Cluster> {
    let n = ev.len();
    let scale = ev.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    let thr = tol_cluster * scale;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (ev[i] - ev[j]).norm() < thr {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|members| {
            let mean = members.iter().map(|&i| ev[i]).sum::<C64>() / members.len() as f64;
            let radius = members
                .iter()
                .map(|&i| (ev[i] - mean).norm())
                .fold(0.0, f64::max);
            Cluster {
                representative: mean,
                members,
                radius,
            }
        })
        .collect();
    clusters.sort_by(|a, b| cmp_eig(&a.representative, &b.representative));
    clusters
}

struct RankData {
    ranks: Vec<usize>,
    svds: Vec<Svd>,
}

fn rank_sequence(a: &ComplexMatrix, tol: f64, cap: usize) -> RankData {
    // thresholds scale with ‖A‖^k: rounding noise in A^k is relative to
    // that, not to the (possibly tiny) largest singular value of A^k
    let n = a.nrows();
    let mut ranks = vec![n];
    let mut svds = Vec::new();
    let mut power = a.clone();
    let mut scale = 1.0;
    for k in 1..=cap.max(1) {
        let svd = Svd::new(&power);
        if k == 1 {
            scale = svd.values.first().copied().unwrap_or(0.0);
        }
        let thr = tol * scale.powi(k as i32);
        let prev = ranks[k - 1];
        let r = svd.values.iter().filter(|&&s| s > thr).count().min(prev);
        ranks.push(r);
        svds.push(svd);
        if r == prev || r == 0 {
            break;
        }
        power = power.dot(a);
    }
    // drop the repeated tail entry so ranks ends at the stable value once
    if ranks.len() >= 2 && ranks[ranks.len() - 1] == ranks[ranks.len() - 2] {
        ranks.pop();
        svds.pop();
    }
    RankData { ranks, svds }
}

fn report_from_ranks(lambda: C64, ranks: &[usize]) -> JordanReport {
    let n = ranks[0];
    let kmax = ranks.len() - 1;
    // at_least[k] = number of chains with length >= k
    let mut at_least: Vec<usize> = (1..=kmax).map(|k| ranks[k - 1] - ranks[k]).collect();
    // a valid Jordan structure has non-increasing counts; clip rounding artefacts
    for k in 1..at_least.len() {
        at_least[k] = at_least[k].min(at_least[k - 1]);
    }
    let mut chain_lengths = Vec::new();
    for k in (1..=kmax).rev() {
        let longer = if k < kmax { at_least[k] } else { 0 };
        debug_assert!(longer <= at_least[k - 1]);
        for _ in 0..(at_least[k - 1] - longer) {
            chain_lengths.push(k);
        }
    }
    JordanReport {
        lambda,
        algebraic: at_least.iter().sum(),
        geometric: n - ranks.get(1).copied().unwrap_or(n),
        chain_lengths,
        ranks: ranks.to_vec(),
    }
}

fn members_near(ev: &[C64], lambda: C64, tol_cluster: f64) -> (Vec<usize>, f64) {
    let scale = ev.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    let thr = tol_cluster * scale;
    let members: Vec<usize> = (0..ev.len())
        .filter(|&i| (ev[i] - lambda).norm() < thr)
        .collect();
    let radius = members
        .iter()
        .map(|&i| (ev[i] - lambda).norm())
        .fold(0.0, f64::max);
    (members, radius)
}

fn check_ambiguity(ev: &[C64], lambda: C64, members: &[usize], radius: f64, factor: f64) -> Result<()> {
    let reach = factor * radius;
    let borderline: Vec<f64> = (0..ev.len())
        .filter(|i| !members.contains(i))
        .map(|i| (ev[i] - lambda).norm())
        .filter(|&d| d < reach)
        .collect();
    if borderline.is_empty() {
        Ok(())
    } else {
        Err(Error::AmbiguousCluster {
            lambda: format!("{lambda}"),
            gaps: borderline,
        })
    }
}

/// Jordan block sizes of `m` at `lambda`.
///
/// The count of chains of length at least `k` is `r_{k−1} − r_k` with
/// `r_k = rank((M − λI)^k)`.
pub fn jordan_structure(m: &ComplexMatrix, lambda: C64, opts: &JordanOptions) -> Result<JordanReport> {
    let n = require_square(m, "matrix")?;
    let ev = eigenvalues(m)?;
    let (members, radius) = members_near(&ev, lambda, opts.tol_cluster);
    check_ambiguity(&ev, lambda, &members, radius, opts.ambiguity_factor)?;
    let cap = if members.is_empty() { 1 } else { members.len() + 1 }.min(n);
    let data = rank_sequence(&shift(m, lambda), opts.tol_rank, cap);
    Ok(report_from_ranks(lambda, &data.ranks))
}

struct Basis(Vec<ComplexVector>);

impl Basis {
    fn residual(&self, v: &ComplexVector) -> ComplexVector {
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &self.0 {
                let c: C64 = q.iter().zip(r.iter()).map(|(a, b)| a.conj() * b).sum();
                r = &r - &q.mapv(|z| z * c);
            }
        }
        r
    }

    fn push(&mut self, v: &ComplexVector) -> f64 {
        let r = self.residual(v);
        let nr = norm_vec(&r);
        if nr > 1e-12 {
            self.0.push(r.mapv(|z| z / nr));
        }
        nr
    }
}

/// Jordan chains at `lambda`, each ordered eigenvector first, with
/// `(M − λI) x_j = x_{j−1}`. The eigenvector of each chain has unit norm.
pub fn jordan_chains(
    m: &ComplexMatrix,
    lambda: C64,
    opts: &JordanOptions,
) -> Result<(JordanReport, Vec<Vec<ComplexVector>>)> {
    let report = jordan_structure(m, lambda, opts)?;
    let n = m.nrows();
    let a = shift(m, lambda);
    let data = rank_sequence(&a, opts.tol_rank, report.ranks.len() - 1);
    let kmax = report.order();
    // null space of A^k for k = 0..=kmax as column lists
    let nulls: Vec<Vec<ComplexVector>> = (0..=kmax)
        .map(|k| {
            if k == 0 {
                Vec::new()
            } else {
                let svd = &data.svds[k - 1];
                (data.ranks[k]..n).map(|j| svd.v.column(j).to_owned()).collect()
            }
        })
        .collect();

    let mut chains: Vec<Vec<ComplexVector>> = Vec::new();
    for k in (1..=kmax).rev() {
        let need = report.chain_lengths.iter().filter(|&&l| l == k).count();
        if need == 0 {
            continue;
        }
        let mut basis = Basis(Vec::new());
        for v in &nulls[k - 1] {
            basis.push(v);
        }
        for c in &chains {
            basis.push(&c[k - 1]);
        }
        for _ in 0..need {
            let best = nulls[k]
                .iter()
                .map(|v| basis.residual(v))
                .max_by(|x, y| norm_vec(x).partial_cmp(&norm_vec(y)).unwrap())
                .ok_or_else(|| Error::AmbiguousCluster {
                    lambda: format!("{lambda}"),
                    gaps: vec![],
                })?;
            if norm_vec(&best) < 1e-6 {
                return Err(Error::AmbiguousCluster {
                    lambda: format!("{lambda}"),
                    gaps: vec![norm_vec(&best)],
                });
            }
            basis.push(&best);
            let mut chain = vec![best];
            for _ in 1..k {
                let next = a.dot(chain.last().unwrap());
                chain.push(next);
            }
            chain.reverse();
            let scale = norm_vec(&chain[0]);
            for x in chain.iter_mut() {
                x.mapv_inplace(|z| z / scale);
            }
            chains.push(chain);
        }
    }
    chains.sort_by_key(|c| std::cmp::Reverse(c.len()));
    Ok((report, chains))
}

#[derive(Debug, Clone)]
pub struct JordanCluster {
    pub report: JordanReport,
    pub chains: Vec<Vec<ComplexVector>>,
}

/// `M = S J S⁻¹` assembled cluster by cluster.
#[derive(Debug, Clone)]
pub struct JordanDecomposition {
    pub clusters: Vec<JordanCluster>,
    /// Chain vectors as columns, cluster by cluster, chain by chain.
    pub s: ComplexMatrix,
    s_inv: ComplexMatrix,
}

pub fn jordan_decomposition(m: &ComplexMatrix, opts: &JordanOptions) -> Result<JordanDecomposition> {
    let n = require_square(m, "matrix")?;
    let spec = eigendecompose(m, &EigenOptions::default())?;
    let mut clusters = Vec::new();
    for cl in cluster_eigenvalues(&spec.eigenvalues, opts.tol_cluster) {
        let simple = |i: usize| JordanCluster {
            report: JordanReport {
                lambda: spec.eigenvalues[i],
                algebraic: 1,
                geometric: 1,
                chain_lengths: vec![1],
                ranks: vec![n, n - 1],
            },
            chains: vec![vec![spec.eigenvectors.column(i).to_owned()]],
        };
        if cl.members.len() == 1 {
            clusters.push(simple(cl.members[0]));
            continue;
        }
        let (report, chains) = jordan_chains(m, cl.representative, opts)?;
        if report.algebraic == cl.members.len() {
            clusters.push(JordanCluster { report, chains });
        } else {
            // close but resolvable eigenvalues: no shared null space
            log::debug!(
                "cluster at {} has {} members but rank deficiency {}; splitting",
                cl.representative,
                cl.members.len(),
                report.algebraic
            );
            for &i in &cl.members {
                clusters.push(simple(i));
            }
        }
    }
    let cols: Vec<&ComplexVector> = clusters
        .iter()
        .flat_map(|c| c.chains.iter().flatten())
        .collect();
    if cols.len() != n {
        return Err(Error::dim(format!(
            "Jordan basis has {} vectors for dimension {n}",
            cols.len()
        )));
    }
    let mut s = Array2::zeros((n, n));
    for (j, v) in cols.iter().enumerate() {
        s.column_mut(j).assign(v);
    }
    let s_inv = solve(&s, &identity(n))?;
    Ok(JordanDecomposition { clusters, s, s_inv })
}

impl JordanDecomposition {
    /// Jordan normal form `J` in the column order of `s`.
    pub fn jordan_form(&self) -> ComplexMatrix {
        let n = self.s.nrows();
        let mut j = Array2::zeros((n, n));
        let mut col = 0;
        for cl in &self.clusters {
            for chain in &cl.chains {
                for k in 0..chain.len() {
                    j[[col + k, col + k]] = cl.report.lambda;
                    if k > 0 {
                        j[[col + k - 1, col + k]] = C64::new(1.0, 0.0);
                    }
                }
                col += chain.len();
            }
        }
        j
    }

    /// `exp(M t) v0` from the chain expansion.
    pub fn evolve(&self, v0: &ComplexVector, t: f64) -> ComplexVector {
        let c = self.s_inv.dot(v0);
        let mut out = ComplexVector::zeros(v0.len());
        let mut col = 0;
        for cl in &self.clusters {
            let e = (cl.report.lambda * t).exp();
            for chain in &cl.chains {
                let len = chain.len();
                for i in 0..len {
                    let mut coef = ZERO;
                    let mut fact = 1.0;
                    for mpow in 0..(len - i) {
                        if mpow > 0 {
                            fact *= t / mpow as f64;
                        }
                        coef += c[col + i + mpow] * fact;
                    }
                    let w = coef * e;
                    out.zip_mut_with(&chain[i], |o, x| *o += w * x);
                }
                col += len;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_diag, max_abs_diff, re};
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn opts() -> JordanOptions {
        JordanOptions::default()
    }

    #[test]
    fn nilpotent_block() {
        let m = array![[re(0.0), re(1.0)], [re(0.0), re(0.0)]];
        let r = jordan_structure(&m, re(0.0), &opts()).unwrap();
        assert_eq!(r.chain_lengths, vec![2]);
        assert_eq!((r.algebraic, r.geometric), (2, 1));
    }

    #[test]
    fn diagonal_degeneracy() {
        let m = from_diag(&[re(5.0), re(5.0)]);
        let r = jordan_structure(&m, re(5.0), &opts()).unwrap();
        assert_eq!(r.chain_lengths, vec![1, 1]);
        assert_eq!((r.algebraic, r.geometric), (2, 2));
    }

    fn jordan_matrix(blocks: &[(C64, usize)]) -> ComplexMatrix {
        let n: usize = blocks.iter().map(|b| b.1).sum();
        let mut j = Array2::zeros((n, n));
        let mut c = 0;
        for &(l, s) in blocks {
            for k in 0..s {
                j[[c + k, c + k]] = l;
                if k > 0 {
                    j[[c + k - 1, c + k]] = re(1.0);
                }
            }
            c += s;
        }
        j
    }

    fn similar(j: &ComplexMatrix, seed: u64) -> ComplexMatrix {
        let n = j.nrows();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // identity plus a small random part keeps S well conditioned
        let s = identity(n)
            + Array2::from_shape_fn((n, n), |_| {
                C64::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3))
            });
        let sinv = solve(&s, &identity(n)).unwrap();
        s.dot(j).dot(&sinv)
    }

    #[test]
    fn recovers_block_sizes_from_similarity() {
        let lam = C64::new(-1.0, 0.5);
        let j = jordan_matrix(&[(lam, 3), (lam, 1), (re(2.0), 2), (C64::new(0.0, 1.0), 1)]);
        for seed in 0..5 {
            let m = similar(&j, seed);
            let r = jordan_structure(&m, lam, &opts()).unwrap();
            assert_eq!(r.chain_lengths, vec![3, 1], "seed {seed}");
            let r2 = jordan_structure(&m, re(2.0), &opts()).unwrap();
            assert_eq!(r2.chain_lengths, vec![2]);
        }
    }

    #[test]
    fn chains_satisfy_recurrence() {
        let lam = re(0.5);
        let j = jordan_matrix(&[(lam, 2), (lam, 2), (re(-1.0), 1)]);
        let m = similar(&j, 11);
        let (rep, chains) = jordan_chains(&m, lam, &opts()).unwrap();
        assert_eq!(rep.chain_lengths, vec![2, 2]);
        let a = shift(&m, lam);
        for c in &chains {
            assert!(norm_vec(&a.dot(&c[0])) < 1e-7);
            assert!(norm_vec(&(a.dot(&c[1]) - &c[0])) < 1e-7);
            assert!((norm_vec(&c[0]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn decomposition_reproduces_matrix_and_flow() {
        let j = jordan_matrix(&[(re(-1.0), 3), (C64::new(-0.5, 2.0), 1), (re(-2.0), 2)]);
        let m = similar(&j, 3);
        let dec = jordan_decomposition(&m, &opts()).unwrap();
        let rebuilt = dec.s.dot(&dec.jordan_form()).dot(&dec.s_inv);
        assert!(max_abs_diff(&rebuilt, &m) < 1e-6);
        // exp(Jt) on a 2-block: [[e, t e], [0, e]]
        let v0 = ComplexVector::from_elem(6, re(1.0));
        let v = dec.evolve(&v0, 0.0);
        assert!(norm_vec(&(v - &v0)) < 1e-8);
    }

    #[test]
    fn clustering_links_chains() {
        let ev = [re(0.0), re(5e-5), re(1e-4 * 1.4), re(1.0)];
        let cl = cluster_eigenvalues(&ev, 1e-4);
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[0].members, vec![0, 1, 2]);
    }

    #[test]
    fn ambiguous_neighbour_is_reported() {
        // spread cluster around 0 with a neighbour just outside tolerance
        let m = from_diag(&[re(-0.9e-4), re(0.9e-4), re(1.5e-4)]);
        let o = JordanOptions {
            tol_cluster: 1e-4,
            ..opts()
        };
        assert!(matches!(
            jordan_structure(&m, re(0.0), &o),
            Err(Error::AmbiguousCluster { .. })
        ));
    }
}
