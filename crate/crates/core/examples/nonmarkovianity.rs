//! Markovian-to-non-Markovian boundary of the decoherence function and the
//! first vanishing time of the coherence just above the exceptional point.

use nmep::dynamics::{first_vanishing_time, is_nonmarkovian};
use nmep::spectral::fit_line;

fn main() -> Result<(), nmep::error::Error> {
    let lambda = 1.0;
    for q in [0.0, 0.25, 0.5] {
        let mut boundary = None;
        for k in 0..=1000 {
            let g = 0.001 * k as f64 + 0.001;
            if is_nonmarkovian(g, lambda, q)?.nonmarkovian {
                boundary = Some(g);
                break;
            }
        }
        println!("q = {q}: |G| first oscillates at Γ/Λ = {:?}, exceptional point at {}", boundary, (1.0 - q) / 2.0);
    }
    let eps: Vec<f64> = (0..=8).map(|k| 10f64.powf(-4.0 + 0.25 * k as f64)).collect();
    let inv: Vec<f64> = eps
        .iter()
        .map(|e| first_vanishing_time(0.5 * lambda * (1.0 + e), lambda).map(|t| 1.0 / t))
        .collect::<Result<_, _>>()?;
    for (e, v) in eps.iter().zip(&inv) {
        println!("ε = {e:.2e}: 1/t_vanish = {v:.6e}");
    }
    let lx: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = inv.iter().map(|v| v.ln()).collect();
    let (a, b, _) = fit_line(&lx, &ly);
    println!("fit 1/t_vanish ≈ {:.4}·Λ·ε^{:.4}", a.exp(), b);
    Ok(())
}
