//! Tier-2 hierarchy for the gapless bath and its population/coherence blocks.

use nmep::environment::{exponents_for, SpectralDensity};
use nmep::heom::{block_decompose, build_heom_rwa, HeomModel, LoweringWeight};
use nmep::linalg::{eigenvalues, jordan_structure, re, JordanOptions};

fn main() -> Result<(), nmep::error::Error> {
    let spec = exponents_for(&SpectralDensity::lorentzian(0.5, 1.0, 0.0)?)?;
    let mut model = HeomModel::qubit_rwa(spec, 2);
    model.weighting = LoweringWeight::Unit;
    let h = build_heom_rwa(&model)?;
    println!("{} ADOs, generator {}x{}", h.ados.len(), h.matrix().nrows(), h.matrix().ncols());
    print!("{}", h.manifest());
    let b = block_decompose(&h)?;
    let opts = JordanOptions::default();
    for (name, blk, ep) in [
        ("population", &b.population, -1.0),
        ("coherence", &b.coherence, -0.5),
        ("conjugate coherence", &b.coherence_conj, -0.5),
    ] {
        println!("\n{name} block, basis {:?}", blk.indices);
        let mut ev = eigenvalues(&blk.matrix)?;
        ev.sort_by(|a, b| b.re.total_cmp(&a.re));
        for z in ev {
            println!("  {:+.6}{:+.6}i", z.re, z.im);
        }
        let r = jordan_structure(&blk.matrix, re(ep), &opts)?;
        println!("  chains at {ep}: {:?}", r.chain_lengths);
    }
    Ok(())
}
