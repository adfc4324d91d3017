//! Jordan structure of the extended Liouvillian at its exceptional points.

use nmep::environment::SpectralDensity;
use nmep::linalg::JordanOptions;
use nmep::spectral::{detect_ep, qubit_generator};

fn main() -> Result<(), nmep::error::Error> {
    let opts = JordanOptions::default();
    for (label, j) in [
        ("gapless, Γ = Λ/2", SpectralDensity::lorentzian(0.5, 1.0, 0.0)?),
        ("gapless, Γ = 0.3Λ", SpectralDensity::lorentzian(0.3, 1.0, 0.0)?),
        ("band gap q = 1/4, Γ = 0.375Λ", SpectralDensity::bandgap(0.375, 1.0, 0.0, 0.25)?),
    ] {
        println!("{label}");
        for r in detect_ep(&qubit_generator(&j)?, &opts)? {
            println!(
                "  λ = {:+.9}{:+.9}i  {:?}  chains {:?}",
                r.lambda.re, r.lambda.im, r.kind, r.chain_lengths
            );
        }
    }
    Ok(())
}
