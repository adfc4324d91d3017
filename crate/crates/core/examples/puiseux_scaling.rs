//! Square-root vs cube-root splitting near the Markovian EP2 and the
//! non-Markovian EP3 of two coupled modes.

use nmep::environment::{exponents_for, SpectralDensity};
use nmep::linalg::re;
use nmep::pseudomode::BosonicNetwork;
use nmep::spectral::{default_eps_grid, network_generator, perturbation_scaling, puiseux_constants};

fn main() -> Result<(), nmep::error::Error> {
    let eps = default_eps_grid();
    let gamma = 1.0;
    let markov = |e: f64| network_generator(&BosonicNetwork::two_mode(gamma / 2.0 * (1.0 + e), 0.0, None, gamma));
    let f = perturbation_scaling(markov, re(-gamma / 2.0), 2, &eps)?;
    println!("Markovian EP2: exponent {:.4}, coefficient {:.4} (√2 Γ = {:.4})", f.exponent, f.coefficient, 2f64.sqrt() * gamma);

    let spec = exponents_for(&SpectralDensity::lorentzian(16.0 / 27.0, 1.0, 0.0)?)?;
    let chi0 = 1.0 / (3.0 * 3f64.sqrt());
    let ep3 = |e: f64| network_generator(&BosonicNetwork::two_mode(chi0 * (1.0 + e), 0.0, Some(spec.clone()), 0.0));
    let f = perturbation_scaling(ep3, re(-1.0 / 3.0), 3, &eps)?;
    println!("non-Markovian EP3: exponent {:.4}, residual {:.1e}", f.exponent, f.residual);
    print!("{}", f.to_csv());
    let x = puiseux_constants(ep3, re(-1.0 / 3.0), 3, &eps)?;
    for (i, xi) in x.iter().enumerate() {
        println!("x{} = {:+.6}{:+.6}i  |x| = {:.6}  arg = {:+.4}", i + 1, xi.re, xi.im, xi.norm(), xi.arg());
    }
    Ok(())
}
