//! Qubit dynamics at the exceptional point Γ = Λ/2: pseudomodes, hierarchy,
//! Jordan-chain expansion and the closed form all coincide.

use ndarray::array;
use nmep::dynamics::{analytic_qubit_trajectory, evolve_by_chains, evolve_reduced, DynamicsModel};
use nmep::environment::{exponents_for, SpectralDensity};
use nmep::heom::HeomModel;
use nmep::linalg::{re, JordanOptions, PropagatorOptions};
use nmep::pseudomode::{restrict_single_excitation, PseudomodeModel};

fn main() -> Result<(), nmep::error::Error> {
    let (gamma, lambda) = (0.5, 1.0);
    let spec = exponents_for(&SpectralDensity::lorentzian(gamma, lambda, 0.0)?)?;
    let rho0 = array![[re(0.5), re(0.5)], [re(0.5), re(0.5)]];
    let times: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();
    let opts = PropagatorOptions::default();

    let pm = PseudomodeModel::qubit_rwa(spec.clone());
    let a = evolve_reduced(&DynamicsModel::Pseudomode(pm.clone()), &rho0, &times, &opts)?;
    let b = evolve_reduced(&DynamicsModel::Heom(HeomModel::qubit_rwa(spec, 2)), &rho0, &times, &opts)?;
    let c = evolve_by_chains(&restrict_single_excitation(&pm)?, &rho0, &times, &JordanOptions::default())?;
    let d = analytic_qubit_trajectory(gamma, lambda, 0.0, &rho0, &times)?;
    println!("max deviation vs closed form: pmeom {:.1e}, heom {:.1e}, chains {:.1e}", a.max_deviation(&d)?, b.max_deviation(&d)?, c.max_deviation(&d)?);
    println!("{:>5} {:>14} {:>14} {:>14} {:>14}", "Λt", "coherence", "(Λt+2)/2·e", "population", "(Λt+2)²/4·e");
    for (t, s) in times.iter().zip(&a.states) {
        let x = lambda * t;
        println!(
            "{x:5.1} {:14.10} {:14.10} {:14.10} {:14.10}",
            (s[[1, 0]] / rho0[[1, 0]]).re,
            0.5 * (x + 2.0) * (-x / 2.0).exp(),
            (s[[1, 1]] / rho0[[1, 1]]).re,
            0.25 * (x * x + 4.0 * x + 4.0) * (-x).exp()
        );
    }
    Ok(())
}
