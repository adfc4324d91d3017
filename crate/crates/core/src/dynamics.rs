//! Reduced-state time evolution, the closed-form decoherence function and
//! the non-Markovianity and vanishing-time observables derived from it.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::ExtendedLiouvillian;
use crate::heom::{build_heom_general, build_heom_rwa, HeomModel};
use crate::linalg::{
    dagger, eigenvalues, jordan_decomposition, max_abs_diff, propagate, trace, ComplexMatrix,
    JordanOptions, PropagatorOptions, C64, ONE,
};
use crate::pseudomode::{build_pm_liouvillian, restrict_single_excitation, PseudomodeModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Pmeom,
    Heom,
    Analytic,
}

#[derive(Debug, Clone)]
pub enum DynamicsModel {
    Pseudomode(PseudomodeModel),
    Heom(HeomModel),
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
    pub source: Source,
    pub rtol: f64,
    pub atol: f64,
}

/// Largest deviations from a physical state along a trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhysicalityReport {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl Trajectory {
    /// Matrix element `⟨r|ρ(t)|c⟩` over the time grid.
    pub fn element(&self, r: usize, c: usize) -> Vec<C64> {
        self.states.iter().map(|s| s[[r, c]]).collect()
    }

    /// Largest entrywise difference to another trajectory on the same grid.
    pub fn max_deviation(&self, other: &Trajectory) -> Result<f64> {
        if self.times.len() != other.times.len() {
            return Err(Error::dim("trajectories have different time grids"));
        }
        Ok(self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| max_abs_diff(a, b))
            .fold(0.0, f64::max))
    }

    pub fn physicality(&self) -> Result<PhysicalityReport> {
        let mut rep = PhysicalityReport {
            trace_error: 0.0,
            hermiticity_error: 0.0,
            min_eigenvalue: f64::INFINITY,
        };
        for s in &self.states {
            rep.trace_error = rep.trace_error.max((trace(s) - ONE).norm());
            rep.hermiticity_error = rep.hermiticity_error.max(max_abs_diff(s, &dagger(s)));
            let herm = (s + &dagger(s)).mapv(|z| z * 0.5);
            for z in eigenvalues(&herm)? {
                rep.min_eigenvalue = rep.min_eigenvalue.min(z.re);
            }
        }
        Ok(rep)
    }

    /// `t` followed by `re_rc,im_rc` for every entry.
    pub fn to_csv(&self) -> String {
        let d = self.states.first().map_or(0, |s| s.nrows());
        let mut s = String::from("t");
        for r in 0..d {
            for c in 0..d {
                let _ = write!(s, ",re_{r}{c},im_{r}{c}");
            }
        }
        s.push('\n');
        for (t, rho) in self.times.iter().zip(&self.states) {
            let _ = write!(s, "{t:.17e}");
            for z in rho.iter() {
                let _ = write!(s, ",{:.17e},{:.17e}", z.re, z.im);
            }
            s.push('\n');
        }
        s
    }
}

fn check_state(rho: &ComplexMatrix) -> Result<()> {
    let d = rho.nrows();
    if rho.ncols() != d || d == 0 {
        return Err(Error::dim("initial state must be a square matrix"));
    }
    if (trace(rho) - ONE).norm() > 1e-10 || max_abs_diff(rho, &dagger(rho)) > 1e-10 {
        return Err(Error::param("rho0", "must be Hermitian with unit trace"));
    }
    if eigenvalues(rho)?.iter().any(|z| z.re < -1e-10) {
        return Err(Error::param("rho0", "must be positive semidefinite"));
    }
    Ok(())
}

/// Generator the model is propagated with. Qubit RWA pseudomode models use
/// the single-excitation sector, which holds every qubit initial state
/// with the pseudomodes in vacuum.
pub fn generator_for(model: &DynamicsModel) -> Result<ExtendedLiouvillian> {
    match model {
        DynamicsModel::Pseudomode(m) => {
            if m.rwa && m.system_hamiltonian.nrows() == 2 {
                restrict_single_excitation(m)
            } else {
                build_pm_liouvillian(m)
            }
        }
        DynamicsModel::Heom(m) => Ok(if m.correlation.rwa {
            build_heom_rwa(m)?
        } else {
            build_heom_general(m)?
        }
        .extended),
    }
}

/// Reduced states `ρ_S(t)` from the extended generator, auxiliaries
/// starting in vacuum.
pub fn evolve_reduced(
    model: &DynamicsModel,
    rho0: &ComplexMatrix,
    times: &[f64],
    opts: &PropagatorOptions,
) -> Result<Trajectory> {
    check_state(rho0)?;
    let l = generator_for(model)?;
    let source = match model {
        DynamicsModel::Pseudomode(_) => Source::Pmeom,
        DynamicsModel::Heom(_) => Source::Heom,
    };
    evolve_extended(&l, rho0, times, opts, source)
}

fn evolve_extended(
    l: &ExtendedLiouvillian,
    rho0: &ComplexMatrix,
    times: &[f64],
    opts: &PropagatorOptions,
    source: Source,
) -> Result<Trajectory> {
    let v0 = l.embed(rho0)?;
    let vs = propagate(&l.matrix, &v0, times, opts)?;
    let states = vs.iter().map(|v| l.reduce(v)).collect::<Result<_>>()?;
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        source,
        rtol: opts.rtol,
        atol: opts.atol,
    })
}

/// Reduced states from the Jordan chain expansion of the generator, which
/// carries the polynomial prefactors at an exceptional point.
pub fn evolve_by_chains(
    l: &ExtendedLiouvillian,
    rho0: &ComplexMatrix,
    times: &[f64],
    opts: &JordanOptions,
) -> Result<Trajectory> {
    check_state(rho0)?;
    let dec = jordan_decomposition(&l.matrix, opts)?;
    let v0 = l.embed(rho0)?;
    let states = times
        .iter()
        .map(|&t| l.reduce(&dec.evolve(&v0, t)))
        .collect::<Result<_>>()?;
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        source: Source::Pmeom,
        rtol: 0.0,
        atol: 0.0,
    })
}

/// `t = 0` plus 400 log-spaced points on `[1e-3/Λ, 10/Λ]`.
pub fn default_times(width: f64) -> Vec<f64> {
    let mut t = vec![0.0];
    t.extend(crate::spectral::log_grid(1e-3 / width, 10.0 / width, 400));
    t
}

fn check_params(gamma: f64, width: f64, q: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", format!("must be positive, got {gamma}")));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::param("lambda", format!("must be positive, got {width}")));
    }
    if !(0.0..1.0).contains(&q) {
        return Err(Error::param("q", format!("must lie in [0, 1), got {q}")));
    }
    Ok(())
}

/// Pieces of `G(t) = (1 − κ) + κ e^{−at/2} B(t)` and
/// `G'(t) = κ e^{−at/2} C(t)`.
struct Decoherence {
    a: f64,
    d: C64,
    kappa: f64,
}

impl Decoherence {
    fn new(gamma: f64, width: f64, q: f64) -> Self {
        let dm = 1.0 - q;
        let a = width * (1.0 + q);
        let d2 = width * dm * (width * dm - 2.0 * gamma);
        let kappa = gamma * dm / (gamma * dm + 2.0 * q * width);
        Decoherence {
            a,
            d: C64::new(d2, 0.0).sqrt(),
            kappa,
        }
    }

    /// `sinh(dt/2) / d`, continued through `d = 0`.
    fn sinhc(&self, t: f64) -> C64 {
        let x = self.d * t / 2.0;
        if x.norm() < 1e-4 {
            let x2 = x * x;
            (ONE + x2 / 6.0 + x2 * x2 / 120.0) * (t / 2.0)
        } else {
            x.sinh() / self.d
        }
    }

    fn b(&self, t: f64) -> C64 {
        (self.d * t / 2.0).cosh() + self.a * self.sinhc(t)
    }

    fn c(&self, t: f64) -> C64 {
        (self.d * self.d - self.a * self.a) / 2.0 * self.sinhc(t)
    }

    fn value(&self, t: f64) -> C64 {
        let e = (-self.a * t / 2.0).exp();
        (1.0 - self.kappa) + self.kappa * e * self.b(t)
    }

    /// Sign of `d|G|/dt`, robust when `e^{−at/2}` underflows.
    fn slope_sign(&self, t: f64) -> f64 {
        let g = self.value(t).re;
        let sg = if g != 0.0 { g.signum() } else { self.b(t).re.signum() };
        sg * self.c(t).re.signum()
    }
}

/// Closed-form decoherence function `G(t)`, the factor multiplying the
/// qubit coherence; `|G|²` multiplies the excited population.
pub fn decoherence_function(gamma: f64, width: f64, q: f64, t: f64) -> Result<C64> {
    check_params(gamma, width, q)?;
    if t < 0.0 {
        return Err(Error::param("t", "must be nonnegative"));
    }
    Ok(Decoherence::new(gamma, width, q).value(t))
}

#[derive(Debug, Clone, Serialize)]
pub struct DecoherenceRecord {
    pub gamma: f64,
    pub width: f64,
    pub q: f64,
    pub times: Vec<f64>,
    pub values: Vec<C64>,
    pub oscillatory: bool,
}

impl DecoherenceRecord {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,re_g,im_g,abs_g\n");
        for (t, g) in self.times.iter().zip(&self.values) {
            let _ = writeln!(s, "{t:.17e},{:.17e},{:.17e},{:.17e}", g.re, g.im, g.norm());
        }
        s
    }
}

pub fn decoherence_record(gamma: f64, width: f64, q: f64, times: &[f64]) -> Result<DecoherenceRecord> {
    let values = times
        .iter()
        .map(|&t| decoherence_function(gamma, width, q, t))
        .collect::<Result<_>>()?;
    Ok(DecoherenceRecord {
        gamma,
        width,
        q,
        times: times.to_vec(),
        values,
        oscillatory: is_nonmarkovian(gamma, width, q)?.nonmarkovian,
    })
}

/// The analytic trajectory of a qubit: coherences scale with `G`, the
/// excited population with `|G|²`.
pub fn analytic_qubit_trajectory(
    gamma: f64,
    width: f64,
    q: f64,
    rho0: &ComplexMatrix,
    times: &[f64],
) -> Result<Trajectory> {
    check_state(rho0)?;
    if rho0.nrows() != 2 {
        return Err(Error::dim("analytic solution is for a two-level system"));
    }
    let states = times
        .iter()
        .map(|&t| {
            let g = decoherence_function(gamma, width, q, t)?;
            let pe = rho0[[1, 1]] * g.norm_sqr();
            let mut s = rho0.clone();
            s[[1, 1]] = pe;
            s[[0, 0]] = ONE - pe;
            s[[1, 0]] = rho0[[1, 0]] * g;
            s[[0, 1]] = rho0[[0, 1]] * g.conj();
            Ok(s)
        })
        .collect::<Result<_>>()?;
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        source: Source::Analytic,
        rtol: 0.0,
        atol: 0.0,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NonMarkovianity {
    /// `|G(t)|` rises somewhere on the sampled horizon.
    pub nonmarkovian: bool,
    /// Start of the first rise.
    pub witness: Option<f64>,
    /// `Γ > (1 − q)Λ/2`.
    pub analytic: bool,
}

/// Samples per `1/Λ` when scanning for a rise of `|G|`.
const SCAN_DENSITY: f64 = 100.0;
/// Scan horizon in units of `1/Λ`.
const SCAN_HORIZON: f64 = 1000.0;

/// Whether `|G(t)|` is non-monotone, judged from the sign of its analytic
/// derivative: a rise must persist for three consecutive samples after a
/// decrease.
pub fn is_nonmarkovian(gamma: f64, width: f64, q: f64) -> Result<NonMarkovianity> {
    check_params(gamma, width, q)?;
    let dec = Decoherence::new(gamma, width, q);
    let analytic = (1.0 - q) * width < 2.0 * gamma;
    let dt = 1.0 / (SCAN_DENSITY * width);
    let n = (SCAN_HORIZON * SCAN_DENSITY) as usize;
    let mut decreased = false;
    let mut run = 0;
    for k in 1..=n {
        let t = k as f64 * dt;
        let s = dec.slope_sign(t);
        if s < 0.0 {
            decreased = true;
            run = 0;
        } else if s > 0.0 && decreased {
            run += 1;
            if run == 3 {
                return Ok(NonMarkovianity {
                    nonmarkovian: true,
                    witness: Some(t - 2.0 * dt),
                    analytic,
                });
            }
        }
    }
    Ok(NonMarkovianity {
        nonmarkovian: false,
        witness: None,
        analytic,
    })
}

/// Smallest `t > 0` with `G(t) = 0` for the gapless environment.
pub fn first_vanishing_time(gamma: f64, width: f64) -> Result<f64> {
    check_params(gamma, width, 0.0)?;
    let dec = Decoherence::new(gamma, width, 0.0);
    // for q = 0, G = e^{−Λt/2} B(t); B carries the sign
    let b = |t: f64| dec.b(t).re;
    let dt = 1.0 / (SCAN_DENSITY * width);
    let n = (SCAN_HORIZON * SCAN_DENSITY) as usize;
    let mut lo = 0.0;
    let mut hi = None;
    for k in 1..=n {
        let t = k as f64 * dt;
        if b(t) <= 0.0 {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let mut hi = hi.ok_or_else(|| {
        Error::NotInRegime(format!(
            "G has no zero within {SCAN_HORIZON}/Λ at Γ/Λ = {}",
            gamma / width
        ))
    })?;
    while hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if b(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
