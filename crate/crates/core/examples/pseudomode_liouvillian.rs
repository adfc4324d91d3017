//! Single-excitation pseudomode generator of a qubit in a Lorentzian bath.

use std::io::stdout;

use nmep::environment::{exponents_for, SpectralDensity};
use nmep::linalg::write_matrix;
use nmep::pseudomode::{build_pm_liouvillian, restrict_single_excitation, PseudomodeModel};

fn main() -> Result<(), nmep::error::Error> {
    let j = SpectralDensity::lorentzian(0.5, 1.0, 0.0)?;
    let model = PseudomodeModel::qubit_rwa(exponents_for(&j)?);
    let full = build_pm_liouvillian(&model)?;
    let small = restrict_single_excitation(&model)?;
    println!("full generator: {0}x{0}, restricted: {1}x{1}", full.dim(), small.dim());
    println!("basis:");
    for (i, l) in small.labels.iter().enumerate() {
        println!("  {i}: {l}");
    }
    let tr = small.trace_functional();
    let leak = tr.dot(&small.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max);
    println!("max |vec(1)† L| = {leak:.1e}");
    write_matrix(&mut stdout(), &small.matrix)?;
    Ok(())
}
