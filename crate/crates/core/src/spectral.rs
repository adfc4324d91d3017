//! Spectra over parameter sweeps, exceptional point detection and location,
//! and the splitting laws near an exceptional point.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::environment::{exponents_for, SpectralDensity};
use crate::error::{Error, Result};
use crate::linalg::{
    cluster_eigenvalues, eigenvalues, jordan_structure, ComplexMatrix, JordanOptions, C64, I,
};
use crate::pseudomode::{effective_nhh, restrict_single_excitation, BosonicNetwork, PseudomodeModel};

/// Single-excitation pseudomode generator of a qubit in the given environment.
pub fn qubit_generator(j: &SpectralDensity) -> Result<ComplexMatrix> {
    let model = PseudomodeModel::qubit_rwa(exponents_for(j)?);
    Ok(restrict_single_excitation(&model)?.matrix)
}

/// `iH` for a bosonic network, so eigenvalue real parts are decay rates.
pub fn network_generator(net: &BosonicNetwork) -> Result<ComplexMatrix> {
    Ok(effective_nhh(net)?.mapv(|z| I * z))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub parameter: String,
    pub grid: Vec<f64>,
    /// `tracks[g][k]` is track `k` at grid point `g`; NaN at failed points.
    pub tracks: Vec<Vec<C64>>,
    /// Grid indices where the eigensolver failed.
    pub failed: Vec<usize>,
}

impl SweepTable {
    pub fn track_count(&self) -> usize {
        self.tracks.iter().map(|t| t.len()).max().unwrap_or(0)
    }

    /// `parameter,track,re,im` rows.
    pub fn to_csv(&self) -> String {
        let mut s = format!("{},track,re,im\n", self.parameter);
        for (p, row) in self.grid.iter().zip(&self.tracks) {
            for (k, z) in row.iter().enumerate() {
                let _ = writeln!(s, "{p:.17e},{k},{:.17e},{:.17e}", z.re, z.im);
            }
        }
        s
    }

    /// First grid value where some eigenvalue has `|Im λ| > threshold`.
    pub fn complex_onset(&self, threshold: f64) -> Option<f64> {
        self.grid
            .iter()
            .zip(&self.tracks)
            .find(|(_, row)| row.iter().any(|z| z.im.abs() > threshold))
            .map(|(p, _)| *p)
    }
}

/// Pairs `next` with `prev` by greedily taking the globally closest
/// remaining pair; returns `next` reordered to follow `prev`.
fn match_tracks(prev: &[C64], next: &[C64]) -> Vec<C64> {
    let n = prev.len().min(next.len());
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(prev.len() * next.len());
    for (i, a) in prev.iter().enumerate() {
        for (j, b) in next.iter().enumerate() {
            pairs.push(((a - b).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out = vec![C64::new(f64::NAN, f64::NAN); prev.len().max(next.len())];
    let mut used_i = vec![false; prev.len()];
    let mut used_j = vec![false; next.len()];
    let mut taken = 0;
    for (_, i, j) in pairs {
        if taken == n {
            break;
        }
        if !used_i[i] && !used_j[j] {
            out[i] = next[j];
            used_i[i] = true;
            used_j[j] = true;
            taken += 1;
        }
    }
    // surplus eigenvalues open new tracks
    let mut slot = prev.len();
    for (j, z) in next.iter().enumerate() {
        if !used_j[j] {
            out[slot] = *z;
            slot += 1;
        }
    }
    out
}

/// Spectrum of `builder(p)` for every `p` in `grid`, with continuous tracks.
/// Points are evaluated in parallel; failures are flagged, not fatal.
pub fn sweep_spectrum<F>(parameter: &str, builder: F, grid: &[f64]) -> SweepTable
where
    F: Fn(f64) -> Result<ComplexMatrix> + Sync,
{
    let raw: Vec<Option<Vec<C64>>> = grid
        .par_iter()
        .map(|&p| match builder(p).and_then(|m| eigenvalues(&m)) {
            Ok(ev) => Some(ev),
            Err(e) => {
                log::warn!("{parameter} = {p}: {e}");
                None
            }
        })
        .collect();
    let mut tracks = Vec::with_capacity(grid.len());
    let mut failed = Vec::new();
    let mut last: Option<Vec<C64>> = None;
    for (g, ev) in raw.into_iter().enumerate() {
        match ev {
            Some(ev) => {
                let row = match &last {
                    Some(prev) => match_tracks(prev, &ev),
                    None => ev,
                };
                last = Some(row.clone());
                tracks.push(row);
            }
            None => {
                failed.push(g);
                let width = last.as_ref().map_or(0, |v| v.len());
                tracks.push(vec![C64::new(f64::NAN, f64::NAN); width]);
            }
        }
    }
    SweepTable {
        parameter: parameter.to_string(),
        grid: grid.to_vec(),
        tracks,
        failed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DegeneracyKind {
    Simple,
    /// Degenerate but diagonalizable.
    Diabolic,
    Exceptional,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpReport {
    pub lambda: C64,
    pub kind: DegeneracyKind,
    /// Longest chain.
    pub order: usize,
    pub chain_lengths: Vec<usize>,
    pub algebraic: usize,
    pub geometric: usize,
    pub parameter: Option<f64>,
    pub tol_cluster: f64,
    pub tol_rank: f64,
}

impl EpReport {
    /// Number of chains of length `k`.
    pub fn chains_of(&self, k: usize) -> usize {
        self.chain_lengths.iter().filter(|&&l| l == k).count()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kind {:?}", self.kind);
        let _ = writeln!(s, "lambda {:.17e} {:.17e}", self.lambda.re, self.lambda.im);
        let _ = writeln!(s, "order {}", self.order);
        let chains: Vec<String> = self.chain_lengths.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "chains {}", chains.join(" "));
        let _ = writeln!(s, "algebraic {}", self.algebraic);
        let _ = writeln!(s, "geometric {}", self.geometric);
        if let Some(p) = self.parameter {
            let _ = writeln!(s, "parameter {p:.17e}");
        }
        let _ = writeln!(s, "tol_cluster {:e}", self.tol_cluster);
        let _ = writeln!(s, "tol_rank {:e}", self.tol_rank);
        s
    }
}

/// Jordan structure of every eigenvalue cluster of `m`, sorted by
/// `(Re λ, Im λ)` descending.
///
/// Clusters whose rank deficiency falls short of their size are split
/// into simple eigenvalues.
pub fn detect_ep(m: &ComplexMatrix, opts: &JordanOptions) -> Result<Vec<EpReport>> {
    if !(opts.tol_cluster > 0.0 && opts.tol_rank > 0.0) {
        return Err(Error::param("tolerances", "must be positive"));
    }
    let ev = eigenvalues(m)?;
    let mut out = Vec::new();
    let simple = |z: C64| EpReport {
        lambda: z,
        kind: DegeneracyKind::Simple,
        order: 1,
        chain_lengths: vec![1],
        algebraic: 1,
        geometric: 1,
        parameter: None,
        tol_cluster: opts.tol_cluster,
        tol_rank: opts.tol_rank,
    };
    for cl in cluster_eigenvalues(&ev, opts.tol_cluster) {
        if cl.members.len() == 1 {
            out.push(simple(ev[cl.members[0]]));
            continue;
        }
        let r = jordan_structure(m, cl.representative, opts)?;
        if r.algebraic != cl.members.len() {
            out.extend(cl.members.iter().map(|&i| simple(ev[i])));
            continue;
        }
        let kind = if r.order() > 1 {
            DegeneracyKind::Exceptional
        } else {
            DegeneracyKind::Diabolic
        };
        out.push(EpReport {
            lambda: r.lambda,
            kind,
            order: r.order(),
            chain_lengths: r.chain_lengths.clone(),
            algebraic: r.algebraic,
            geometric: r.geometric,
            parameter: None,
            tol_cluster: opts.tol_cluster,
            tol_rank: opts.tol_rank,
        });
    }
    out.sort_by(|a, b| b.lambda.re.total_cmp(&a.lambda.re).then(b.lambda.im.total_cmp(&a.lambda.im)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpCriterion {
    /// The parameter where some eigenvalue first leaves the real axis:
    /// bisection on `max |Im λ| > threshold`.
    RealToComplex { threshold: f64 },
    /// Minimum of the spread of the tightest `size` eigenvalues:
    /// golden-section search.
    Coalescence { size: usize },
}

/// Tightest group of `size` eigenvalues and its spread (max pairwise distance).
fn tightest(ev: &[C64], size: usize) -> (Vec<C64>, f64) {
    let mut best = (Vec::new(), f64::INFINITY);
    for z in ev {
        let mut near: Vec<C64> = ev.to_vec();
        near.sort_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()));
        near.truncate(size);
        let s = spread(&near);
        if s < best.1 {
            best = (near, s);
        }
    }
    best
}

/// Maximum pairwise distance.
pub fn spread(z: &[C64]) -> f64 {
    let mut s = 0.0f64;
    for (i, a) in z.iter().enumerate() {
        for b in &z[i + 1..] {
            s = s.max((a - b).norm());
        }
    }
    s
}

/// Parameter of an exceptional point within `bracket`, to absolute `tol`.
pub fn locate_ep_1d<F>(builder: F, bracket: (f64, f64), criterion: EpCriterion, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<ComplexMatrix>,
{
    let (mut a, mut b) = bracket;
    if !(a < b) || !(tol > 0.0) {
        return Err(Error::param("bracket", format!("need lo < hi and tol > 0, got ({a}, {b}), {tol}")));
    }
    match criterion {
        EpCriterion::RealToComplex { threshold } => {
            let complex = |p: f64| -> Result<bool> {
                Ok(eigenvalues(&builder(p)?)?.iter().any(|z| z.im.abs() > threshold))
            };
            let (ca, cb) = (complex(a)?, complex(b)?);
            if ca == cb {
                return Err(Error::Bracketing(format!(
                    "spectrum is {} at both ends of [{a}, {b}]",
                    if ca { "complex" } else { "real" }
                )));
            }
            while b - a > tol {
                let mid = 0.5 * (a + b);
                if complex(mid)? == ca {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            Ok(0.5 * (a + b))
        }
        EpCriterion::Coalescence { size } => {
            if size < 2 {
                return Err(Error::param("size", "coalescence needs at least two eigenvalues"));
            }
            let f = |p: f64| -> Result<f64> { Ok(tightest(&eigenvalues(&builder(p)?)?, size).1) };
            let g = (5f64.sqrt() - 1.0) / 2.0;
            let (lo, hi) = (a, b);
            let mut c = b - g * (b - a);
            let mut d = a + g * (b - a);
            let (mut fc, mut fd) = (f(c)?, f(d)?);
            while b - a > tol {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = f(c)?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = f(d)?;
                }
            }
            let x = 0.5 * (a + b);
            let edge = 2.0 * tol;
            if x - lo < edge || hi - x < edge {
                return Err(Error::Bracketing(format!(
                    "eigenvalue spread has no interior minimum in [{lo}, {hi}]"
                )));
            }
            Ok(x)
        }
    }
}

/// Default perturbation grid, 13 log-spaced points on `[1e-6, 1e-3]`.
pub fn default_eps_grid() -> Vec<f64> {
    log_grid(1e-6, 1e-3, 13)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit {
    pub eps: Vec<f64>,
    pub splittings: Vec<f64>,
    /// `splitting ≈ coefficient · ε^exponent`
    pub exponent: f64,
    pub coefficient: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
}

impl ScalingFit {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,splitting\n");
        for (e, d) in self.eps.iter().zip(&self.splittings) {
            let _ = writeln!(s, "{e:.17e},{d:.17e}");
        }
        s
    }
}

/// Least-squares line `y = a + b x`; returns `(a, b, rms residual)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rms = (x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum::<f64>() / n).sqrt();
    (a, b, rms)
}

/// Eigenvalues of `m` nearest to `center`, checking the group stays apart
/// from the rest of the spectrum.
fn perturbed_cluster(m: &ComplexMatrix, center: C64, size: usize) -> Result<Vec<C64>> {
    let mut ev = eigenvalues(m)?;
    if ev.len() < size {
        return Err(Error::dim(format!("spectrum has {} eigenvalues, need {size}", ev.len())));
    }
    ev.sort_by(|a, b| (a - center).norm().total_cmp(&(b - center).norm()));
    if let Some(outside) = ev.get(size) {
        let inner = (ev[size - 1] - center).norm();
        let outer = (outside - center).norm();
        if outer < 2.0 * inner {
            return Err(Error::Tracking(format!(
                "perturbed cluster at {center} reaches {inner:.3e}, next eigenvalue at {outer:.3e}"
            )));
        }
    }
    ev.truncate(size);
    Ok(ev)
}

/// Splitting of the `order` eigenvalues around `lambda_ep` under
/// `builder(ε)`, fitted to `c · ε^p` in log-log space.
pub fn perturbation_scaling<F>(builder: F, lambda_ep: C64, order: usize, eps: &[f64]) -> Result<ScalingFit>
where
    F: Fn(f64) -> Result<ComplexMatrix> + Sync,
{
    check_eps(eps)?;
    let splittings: Vec<f64> = eps
        .par_iter()
        .map(|&e| Ok(spread(&perturbed_cluster(&builder(e)?, lambda_ep, order)?)))
        .collect::<Result<_>>()?;
    if splittings.iter().any(|&s| s <= 0.0) {
        return Err(Error::NotInRegime("perturbation leaves the cluster unsplit".into()));
    }
    let lx: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = splittings.iter().map(|s| s.ln()).collect();
    let (a, b, residual) = fit_line(&lx, &ly);
    Ok(ScalingFit {
        eps: eps.to_vec(),
        splittings,
        exponent: b,
        coefficient: a.exp(),
        residual,
    })
}

fn check_eps(eps: &[f64]) -> Result<()> {
    if eps.len() < 3 || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::param("eps", "need at least three positive values"));
    }
    let (lo, hi) = eps.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &e| (l.min(e), h.max(e)));
    if hi / lo < 100.0 - 1e-9 {
        return Err(Error::param("eps", "grid must span at least two decades"));
    }
    Ok(())
}

/// Leading Puiseux constants `x_i` in `λ_i = λ_EP + x_i ε^{1/n} + O(ε^{2/n})`,
/// extrapolated to `ε → 0` by a quadratic fit in `ε^{1/n}`.
pub fn puiseux_constants<F>(builder: F, lambda_ep: C64, order: usize, eps: &[f64]) -> Result<Vec<C64>>
where
    F: Fn(f64) -> Result<ComplexMatrix> + Sync,
{
    check_eps(eps)?;
    let mut eps = eps.to_vec();
    eps.sort_by(f64::total_cmp);
    let root = |e: f64| e.powf(1.0 / order as f64);
    let scaled: Vec<Vec<C64>> = eps
        .par_iter()
        .map(|&e| {
            let c = perturbed_cluster(&builder(e)?, lambda_ep, order)?;
            Ok(c.iter().map(|z| (z - lambda_ep) / root(e)).collect())
        })
        .collect::<Result<_>>()?;
    let mut rows = vec![scaled[0].clone()];
    for next in &scaled[1..] {
        let m = match_tracks(rows.last().unwrap(), next);
        rows.push(m);
    }
    let s: Vec<f64> = eps.iter().map(|&e| root(e)).collect();
    (0..order)
        .map(|k| {
            let y: Vec<C64> = rows.iter().map(|r| r[k]).collect();
            quadratic_intercept(&s, &y)
        })
        .collect()
}

/// Intercept of the least-squares quadratic through `(x, y)`.
fn quadratic_intercept(x: &[f64], y: &[C64]) -> Result<C64> {
    use crate::linalg::{re, solve, ComplexVector};
    let mut a = ComplexMatrix::zeros((3, 3));
    let mut b = ComplexVector::zeros(3);
    for (xi, yi) in x.iter().zip(y) {
        let p = [1.0, *xi, xi * xi];
        for r in 0..3 {
            for c in 0..3 {
                a[[r, c]] += re(p[r] * p[c]);
            }
            b[r] += yi * p[r];
        }
    }
    let sol = solve(&a, &b.insert_axis(ndarray::Axis(1)))?;
    Ok(sol[[0, 0]])
}
