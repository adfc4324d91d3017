//! Spectral densities and their exponential decomposition.
//!
//! All correlation functions are zero temperature and written in the
//! interaction picture with respect to the density center `ω0`, so
//! `C(t) = (1/π) ∫ J(ω) exp(−i(ω − ω0)t) dω`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    Lorentzian,
    Bandgap,
}

/// `J_L(ω) = ½ Γ Λ² / ((ω − ω0)² + Λ²)`, optionally minus a narrower
/// Lorentzian of width `qΛ` that opens a gap at `ω0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub kind: DensityKind,
    /// Γ
    pub coupling: f64,
    /// Λ
    pub width: f64,
    /// ω0
    pub center: f64,
    /// q, band gap only
    #[serde(default)]
    pub gap_fraction: f64,
}

impl SpectralDensity {
    pub fn lorentzian(coupling: f64, width: f64, center: f64) -> Result<Self> {
        let j = SpectralDensity {
            kind: DensityKind::Lorentzian,
            coupling,
            width,
            center,
            gap_fraction: 0.0,
        };
        j.validate()?;
        Ok(j)
    }

    pub fn bandgap(coupling: f64, width: f64, center: f64, q: f64) -> Result<Self> {
        let j = SpectralDensity {
            kind: DensityKind::Bandgap,
            coupling,
            width,
            center,
            gap_fraction: q,
        };
        j.validate()?;
        Ok(j)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            return Err(Error::param("coupling", format!("Γ must be positive, got {}", self.coupling)));
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::param("width", format!("Λ must be positive, got {}", self.width)));
        }
        if !self.center.is_finite() {
            return Err(Error::param("center", "ω0 must be finite"));
        }
        if self.kind == DensityKind::Bandgap {
            let q = self.gap_fraction;
            if q == 1.0 {
                return Err(Error::DegenerateEnvironment(
                    "q = 1 cancels the spectral density identically".into(),
                ));
            }
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::param("gap_fraction", format!("q must lie in (0, 1), got {q}")));
            }
        }
        Ok(())
    }

    /// Effective gap parameter (0 for the plain Lorentzian).
    pub fn q(&self) -> f64 {
        match self.kind {
            DensityKind::Lorentzian => 0.0,
            DensityKind::Bandgap => self.gap_fraction,
        }
    }

    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        self.validate()?;
        Ok(self.eval_complex(C64::new(omega - self.center, 0.0)).re.max(0.0))
    }

    /// `J(ω0 + x)` continued to complex detuning `x`.
    pub(crate) fn eval_complex(&self, x: C64) -> C64 {
        let lor = |w: f64| 0.5 * self.coupling * w * w / (x * x + w * w);
        match self.kind {
            DensityKind::Lorentzian => lor(self.width),
            DensityKind::Bandgap => lor(self.width) - lor(self.gap_fraction * self.width),
        }
    }
}

/// One term `weight · exp(−iΩt − γ|t|/2)` of the correlation function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTerm {
    /// α², possibly negative or complex.
    pub weight: C64,
    /// Ω, zero in the interaction picture.
    pub frequency: f64,
    /// γ > 0
    pub decay: f64,
}

impl ExponentTerm {
    pub fn new(weight: C64, frequency: f64, decay: f64) -> Self {
        ExponentTerm {
            weight,
            frequency,
            decay,
        }
    }

    /// Pseudomode coupling α, the principal square root of the weight.
    /// Purely imaginary for negative weights.
    pub fn coupling(&self) -> C64 {
        self.weight.sqrt()
    }

    /// Complex rate `χ = γ/2 + iΩ`, so the term is `weight · e^{−χt}`.
    pub fn rate(&self) -> C64 {
        C64::new(0.5 * self.decay, self.frequency)
    }
}

/// Finite exponential decomposition of a zero-temperature correlation function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSpec {
    pub terms: Vec<ExponentTerm>,
    /// Rotating-wave form: only the emission part `C⁻` survives.
    pub rwa: bool,
}

impl CorrelationSpec {
    pub fn new(terms: Vec<ExponentTerm>, rwa: bool) -> Result<Self> {
        let spec = CorrelationSpec { terms, rwa };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::param("terms", "correlation spec has no exponent terms"));
        }
        for t in &self.terms {
            if !(t.decay.is_finite() && t.decay > 0.0) {
                return Err(Error::param("decay", format!("every γ must be positive, got {}", t.decay)));
            }
            if !(t.weight.re.is_finite() && t.weight.im.is_finite() && t.frequency.is_finite()) {
                return Err(Error::param("weight", "non-finite exponent term"));
            }
        }
        Ok(())
    }

    /// `C(t) = Σ α² exp(−iΩt − γ|t|/2)`, with `C(−t) = C(t)*`.
    pub fn value(&self, t: f64) -> C64 {
        if t < 0.0 {
            return self.value(-t).conj();
        }
        self.terms
            .iter()
            .map(|e| e.weight * (-e.rate() * t).exp())
            .sum()
    }

    /// Absorption component `C⁺(t)`, identically zero at zero temperature.
    pub fn absorption(&self, _t: f64) -> C64 {
        C64::new(0.0, 0.0)
    }

    /// Emission component `C⁻(t)`.
    pub fn emission(&self, t: f64) -> C64 {
        self.value(t)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# re(weight) im(weight) frequency decay");
        let _ = writeln!(s, "rwa {}", self.rwa);
        for t in &self.terms {
            let _ = writeln!(
                s,
                "{:.16e} {:.16e} {:.16e} {:.16e}",
                t.weight.re, t.weight.im, t.frequency, t.decay
            );
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut rwa = true;
        let mut terms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(flag) = line.strip_prefix("rwa") {
                rwa = flag.trim().parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("bad rwa flag `{}`", flag.trim()),
                })?;
                continue;
            }
            let nums: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("{e}"),
                })?;
            let [wr, wi, freq, decay] = nums[..] else {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected 4 numbers, found {}", nums.len()),
                });
            };
            terms.push(ExponentTerm::new(C64::new(wr, wi), freq, decay));
        }
        CorrelationSpec::new(terms, rwa)
    }
}

/// Exponent terms for the built-in densities (interaction picture, Ω = 0).
pub fn exponents_for(j: &SpectralDensity) -> Result<CorrelationSpec> {
    j.validate()?;
    let (g, l) = (j.coupling, j.width);
    let mut terms = vec![ExponentTerm::new(C64::new(0.5 * g * l, 0.0), 0.0, 2.0 * l)];
    if j.kind == DensityKind::Bandgap {
        let q = j.gap_fraction;
        terms.push(ExponentTerm::new(C64::new(-0.5 * q * g * l, 0.0), 0.0, 2.0 * q * l));
    }
    CorrelationSpec::new(terms, true)
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub abstol: f64,
    /// Half-width of the real-axis window in units of Λ.
    pub window: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            abstol: 1e-8,
            window: 200.0,
            max_intervals: 20_000,
        }
    }
}

/// Direct numerical evaluation of `(1/π) ∫ J(ω) e^{−i(ω−ω0)t} dω`.
///
/// The lower limit is `−∞` when `extend_negative` holds and `ω = 0`
/// otherwise. The window `|ω − ω0| ≤ WΛ` is integrated on the real axis;
/// tails beyond it are rotated onto vertical rays into the lower half
/// plane, where `e^{−ixt}` decays for `t > 0`.
pub fn correlation_quadrature(
    j: &SpectralDensity,
    t: f64,
    extend_negative: bool,
    opts: &QuadratureOptions,
) -> Result<C64> {
    j.validate()?;
    if t < 0.0 {
        return Ok(correlation_quadrature(j, -t, extend_negative, opts)?.conj());
    }
    let lam = j.width;
    let half = opts.window * lam;
    let f = |x: C64| j.eval_complex(x) * (-crate::linalg::I * x * t).exp();
    let tol = opts.abstol * std::f64::consts::PI / 4.0;

    // oscillation count guides the initial split
    let per = |len: f64| ((len * t / std::f64::consts::TAU).ceil() as usize * 2).clamp(4, 4000);

    let lower = if extend_negative { -half } else { (-j.center).max(-half) };
    let mut total = quad::integrate(
        |x| f(C64::new(x, 0.0)),
        lower,
        half,
        tol,
        per(half - lower),
        opts.max_intervals,
    )?;

    let ray = |x0: f64| {
        move |s: f64| {
            let y = lam * s / (1.0 - s);
            let jac = lam / ((1.0 - s) * (1.0 - s));
            f(C64::new(x0, -y)) * jac
        }
    };
    // ∫_{X}^{∞} f dx = −i ∫_0^∞ f(X − iy) dy
    total += -crate::linalg::I
        * quad::integrate(ray(half), 0.0, 1.0, tol, 4, opts.max_intervals)?;
    if extend_negative {
        // ∫_{−∞}^{−X} f dx = i ∫_0^∞ f(−X − iy) dy
        total += crate::linalg::I
            * quad::integrate(ray(-half), 0.0, 1.0, tol, 4, opts.max_intervals)?;
    } else if -j.center < -half {
        total += quad::integrate(
            |x| f(C64::new(x, 0.0)),
            -j.center,
            -half,
            tol,
            per(j.center - half),
            opts.max_intervals,
        )?;
    }
    Ok(total / std::f64::consts::PI)
}
