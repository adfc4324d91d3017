//! Exponent-sum correlation function against direct quadrature of J(ω).

use nmep::environment::{correlation_quadrature, exponents_for, QuadratureOptions, SpectralDensity};

fn main() -> Result<(), nmep::error::Error> {
    let (gamma, lambda) = (0.5, 1.0);
    for (label, j) in [
        ("lorentzian", SpectralDensity::lorentzian(gamma, lambda, 100.0)?),
        ("bandgap q=0.25", SpectralDensity::bandgap(gamma, lambda, 100.0, 0.25)?),
    ] {
        let spec = exponents_for(&j)?;
        println!("{label}: {} exponent term(s)", spec.terms.len());
        println!("{:>6} {:>24} {:>24} {:>10}", "Λt", "exponents", "quadrature", "|diff|");
        for k in 0..=10 {
            let t = k as f64 / lambda;
            let a = spec.value(t);
            let b = correlation_quadrature(&j, t, true, &QuadratureOptions::default())?;
            println!("{t:6.1} {:>11.3e}{:+11.3e}i {:>11.3e}{:+11.3e}i {:10.2e}", a.re, a.im, b.re, b.im, (a - b).norm());
        }
        // restricting to physical frequencies ω ≥ 0 leaves a small tail
        let b = correlation_quadrature(&j, 1.0, false, &QuadratureOptions::default())?;
        println!("ω ≥ 0 only, t = 1/Λ: deviation {:.2e}\n", (spec.value(1.0) - b).norm());
    }
    Ok(())
}
