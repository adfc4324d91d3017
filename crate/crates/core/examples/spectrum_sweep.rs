//! Eigenvalue tracks of the extended Liouvillian over Γ/Λ, written as CSV and SVG.

use std::fs;

use nmep::environment::SpectralDensity;
use nmep::plot::{render_svg, sweep_panels};
use nmep::spectral::{qubit_generator, sweep_spectrum};

fn main() -> Result<(), nmep::error::Error> {
    let q: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.0);
    let grid: Vec<f64> = (0..=190).map(|k| 0.05 + 0.005 * k as f64).collect();
    let table = sweep_spectrum(
        "gamma",
        |g| {
            let j = if q == 0.0 {
                SpectralDensity::lorentzian(g, 1.0, 0.0)?
            } else {
                SpectralDensity::bandgap(g, 1.0, 0.0, q)?
            };
            qubit_generator(&j)
        },
        &grid,
    );
    println!("{} tracks over {} points", table.track_count(), grid.len());
    if let Some(g) = table.complex_onset(1e-6) {
        println!("first complex eigenvalues at Γ/Λ = {g:.3} (expected {:.3})", (1.0 - q) / 2.0);
    }
    let dir = std::env::temp_dir().join("nmep-sweep");
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("sweep.csv"), table.to_csv())?;
    fs::write(dir.join("sweep.svg"), render_svg(&sweep_panels(&table, 1.0, "Γ/Λ"))?)?;
    println!("wrote {}", dir.display());
    Ok(())
}
