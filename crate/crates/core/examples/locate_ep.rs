//! One-dimensional location of exceptional points.

use nmep::environment::{exponents_for, SpectralDensity};
use nmep::pseudomode::BosonicNetwork;
use nmep::spectral::{locate_ep_1d, network_generator, qubit_generator, EpCriterion};

fn main() -> Result<(), nmep::error::Error> {
    let real_to_complex = EpCriterion::RealToComplex { threshold: 1e-6 };
    let g = locate_ep_1d(|g| qubit_generator(&SpectralDensity::lorentzian(g, 1.0, 0.0)?), (0.3, 0.8), real_to_complex, 1e-10)?;
    println!("gapless:        Γ*/Λ = {g:.10}");
    for q in [0.25, 0.5] {
        let g = locate_ep_1d(
            |g| qubit_generator(&SpectralDensity::bandgap(g, 1.0, 0.0, q)?),
            (0.1, 0.6),
            real_to_complex,
            1e-10,
        )?;
        println!("band gap q={q}: Γ*/Λ = {g:.10}  ((1-q)/2 = {})", (1.0 - q) / 2.0);
    }
    let spec = exponents_for(&SpectralDensity::lorentzian(16.0 / 27.0, 1.0, 0.0)?)?;
    let chi = locate_ep_1d(
        |c| network_generator(&BosonicNetwork::two_mode(c, 0.0, Some(spec.clone()), 0.0)),
        (0.05, 0.5),
        EpCriterion::Coalescence { size: 3 },
        1e-10,
    )?;
    println!("two-mode EP3:   χ*/Λ = {chi:.10}  (1/(3√3) = {:.10})", 1.0 / (3.0 * 3f64.sqrt()));
    Ok(())
}
