//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs as a plain binary (no libtest harness) so the report is always
//! printed. Exits nonzero if a criterion fails that is not listed in
//! `EXPECTED_FAILURES`, or if a listed one unexpectedly passes.

use std::f64::consts::PI;
use std::process::ExitCode;

use ndarray::{array, Array2};
use nmep::dynamics::{
    analytic_qubit_trajectory, evolve_reduced, first_vanishing_time, is_nonmarkovian, DynamicsModel, Trajectory,
};
use nmep::environment::{correlation_quadrature, exponents_for, QuadratureOptions, SpectralDensity};
use nmep::heom::{block_decompose, build_heom_rwa, HeomModel, LoweringWeight};
use nmep::linalg::{
    commutator_superop, eigenvalues, identity, jordan_structure, kron, liouvillian_from_parts, max_abs_diff,
    norm_vec, re, solve, transpose, vec, ComplexMatrix, JordanOptions, PropagatorOptions, C64, I,
    ONE, ZERO,
};
use nmep::pseudomode::{build_pm_liouvillian, effective_nhh, restrict_single_excitation, BosonicNetwork, PseudomodeModel};
use nmep::spectral::{
    default_eps_grid, detect_ep, fit_line, locate_ep_1d, log_grid, network_generator, perturbation_scaling,
    qubit_generator, DegeneracyKind, EpCriterion,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that fail for a documented reason (see README).
const EXPECTED_FAILURES: &[u32] = &[7];

type Outcome = (bool, String);

fn lor(g: f64, l: f64) -> SpectralDensity {
    SpectralDensity::lorentzian(g, l, 0.0).unwrap()
}

fn density(g: f64, l: f64, q: f64) -> SpectralDensity {
    if q == 0.0 {
        lor(g, l)
    } else {
        SpectralDensity::bandgap(g, l, 0.0, q).unwrap()
    }
}

fn pm_model(j: &SpectralDensity) -> PseudomodeModel {
    PseudomodeModel::qubit_rwa(exponents_for(j).unwrap())
}

/// The 9×9 single-excitation generator, written out by hand.
fn reference_9x9(g: f64, l: f64) -> ComplexMatrix {
    let s = I * (g * l / 2.0).sqrt();
    let mut m: ComplexMatrix = Array2::zeros((9, 9));
    let entries = [
        (1, 9, re(2.0 * l)),
        (2, 3, s),
        (3, 2, s),
        (3, 3, re(-l)),
        (4, 7, -s),
        (5, 6, s),
        (5, 8, -s),
        (6, 5, s),
        (6, 6, re(-l)),
        (6, 9, -s),
        (7, 4, -s),
        (7, 7, re(-l)),
        (8, 5, -s),
        (8, 8, re(-l)),
        (8, 9, s),
        (9, 6, -s),
        (9, 8, s),
        (9, 9, re(-2.0 * l)),
    ];
    for (r, c, v) in entries {
        m[[r - 1, c - 1]] = v;
    }
    m
}

fn criterion_1() -> Outcome {
    let l = restrict_single_excitation(&pm_model(&lor(0.5, 1.0))).unwrap();
    let d = max_abs_diff(&l.matrix, &reference_9x9(0.5, 1.0));
    (d <= 1e-12, format!("9x9 generator max entry deviation {d:.1e}"))
}

fn criterion_2() -> Outcome {
    let opts = JordanOptions::default();
    let r = detect_ep(&qubit_generator(&lor(0.5, 1.0)).unwrap(), &opts).unwrap();
    let near = |z: C64, x: f64| (z - re(x)).norm() <= 1e-8;
    let gapless_ok = r.len() == 3
        && r.iter().any(|e| near(e.lambda, 0.0) && e.kind == DegeneracyKind::Simple)
        && r.iter().any(|e| near(e.lambda, -0.5) && e.chain_lengths == vec![2, 2])
        && r.iter().any(|e| near(e.lambda, -1.0) && e.chain_lengths == vec![3, 1]);

    let r = detect_ep(&qubit_generator(&density(0.375, 1.0, 0.25)).unwrap(), &opts).unwrap();
    let eps: Vec<_> = r.iter().filter(|e| e.kind == DegeneracyKind::Exceptional).collect();
    let gap_ok = eps.len() == 2
        && eps.iter().any(|e| near(e.lambda, -1.25) && e.order == 3)
        && eps.iter().any(|e| near(e.lambda, -0.625) && e.chain_lengths == vec![2, 2, 2, 2]);
    (
        gapless_ok && gap_ok,
        format!("gapless {{0; EP2x2 at -Λ/2; EP3+1 at -Λ}} {gapless_ok}, band gap {{EP3 at -1.25Λ; 4xEP2 at -0.625Λ}} {gap_ok}"),
    )
}

fn reference_blocks(g: f64, l: f64) -> [ComplexMatrix; 3] {
    let k = I * g * l / 2.0;
    let z = ZERO;
    let (i, li, l2) = (I, re(-l), re(-2.0 * l));
    [
        array![
            [z, z, -i, i, z, z],
            [z, z, i, -i, z, z],
            [z, k, li, z, -i, i],
            [z, -k, z, li, i, -i],
            [z, z, -k, k, l2, z],
            [z, z, z, z, z, l2]
        ],
        array![
            [z, -i, i, z, z],
            [-k, li, z, -i, i],
            [z, z, li, i, -i],
            [z, z, k, l2, z],
            [z, z, -k, z, l2]
        ],
        array![
            [z, i, -i, z, z],
            [k, li, z, -i, i],
            [z, z, li, i, -i],
            [z, z, k, l2, z],
            [z, z, -k, z, l2]
        ],
    ]
}

fn criterion_3() -> Outcome {
    let spec = exponents_for(&lor(0.5, 1.0)).unwrap();
    let mut m = HeomModel::qubit_rwa(spec.clone(), 2);
    m.weighting = LoweringWeight::Unit;
    let b = block_decompose(&build_heom_rwa(&m).unwrap()).unwrap();
    let [p, c, cc] = reference_blocks(0.5, 1.0);
    let dev = [
        max_abs_diff(&b.population.matrix, &p),
        max_abs_diff(&b.coherence.matrix, &c),
        max_abs_diff(&b.coherence_conj.matrix, &cc),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let shapes = b.population.matrix.nrows() == 6 && b.coherence.matrix.nrows() == 5 && b.coherence_conj.matrix.nrows() == 5;

    let o = JordanOptions::default();
    let has = |ev: &[C64], z: C64| ev.iter().any(|x| (x - z).norm() < 1e-8);
    let ep = eigenvalues(&b.population.matrix).unwrap();
    let pj = jordan_structure(&b.population.matrix, re(-1.0), &o).unwrap().chain_lengths == vec![3, 1]
        && has(&ep, ZERO)
        && has(&ep, re(-2.0));
    let mut cj = true;
    for blk in [&b.coherence.matrix, &b.coherence_conj.matrix] {
        let ev = eigenvalues(blk).unwrap();
        cj &= jordan_structure(blk, re(-0.5), &o).unwrap().chain_lengths == vec![2]
            && has(&ev, re(-2.0))
            && has(&ev, C64::new(-1.5, 0.5))
            && has(&ev, C64::new(-1.5, -0.5));
    }

    // both lowering conventions give the same reduced dynamics
    let times: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();
    let rho0 = coherent();
    let unit = evolve_reduced(&DynamicsModel::Heom(m), &rho0, &times, &Default::default()).unwrap();
    let occ = evolve_reduced(&DynamicsModel::Heom(HeomModel::qubit_rwa(spec, 2)), &rho0, &times, &Default::default()).unwrap();
    let same = unit.max_deviation(&occ).unwrap();
    (
        dev <= 1e-12 && shapes && pj && cj && same < 1e-10,
        format!("block deviation {dev:.1e}, shapes {shapes}, D(p) {pj}, D(c)/D(c*) {cj}, weighting-invariant dynamics {same:.1e}"),
    )
}

fn coherent() -> ComplexMatrix {
    array![[re(0.5), re(0.5)], [re(0.5), re(0.5)]]
}

/// Closed-form coherence factor, written independently of the library:
/// amplitude of the single-excitation problem via Laplace inversion of
/// `1/(s + Ĉ(s))` with `Ĉ(s) = Σ w/(s + χ)`.
fn g_oracle(g: f64, l: f64, q: f64, t: f64) -> C64 {
    let a = l * (1.0 + q);
    let dm = 1.0 - q;
    let d = C64::new(l * dm * (l * dm - 2.0 * g), 0.0).sqrt();
    let kappa = g * dm / (g * dm + 2.0 * q * l);
    let sinh_over_d = if d.norm() * t < 1e-6 { re(t / 2.0) } else { (d * t / 2.0).sinh() / d };
    (1.0 - kappa) + kappa * (-a * t / 2.0).exp() * ((d * t / 2.0).cosh() + a * sinh_over_d)
}

/// Adaptive-free RK4 of the memory-kernel equation `ċ = −Σ b_k`,
/// `ḃ_k = w_k c − χ_k b_k`, a second oracle for the closed form.
fn g_by_kernel(g: f64, l: f64, q: f64, t: f64) -> C64 {
    let spec = exponents_for(&density(g, l, q)).unwrap();
    let terms: Vec<(C64, C64)> = spec.terms.iter().map(|x| (x.weight, x.rate())).collect();
    let n = terms.len();
    let f = |y: &[C64]| -> Vec<C64> {
        let mut dy = vec![ZERO; n + 1];
        dy[0] = -y[1..].iter().sum::<C64>();
        for (k, (w, chi)) in terms.iter().enumerate() {
            dy[k + 1] = w * y[0] - chi * y[k + 1];
        }
        dy
    };
    let steps = (t * 400.0).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let mut y = vec![ZERO; n + 1];
    y[0] = ONE;
    let axpy = |y: &[C64], k: &[C64], s: f64| -> Vec<C64> { y.iter().zip(k).map(|(a, b)| a + b * s).collect() };
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&axpy(&y, &k1, h / 2.0));
        let k3 = f(&axpy(&y, &k2, h / 2.0));
        let k4 = f(&axpy(&y, &k3, h));
        for i in 0..=n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y[0]
}

fn oracle_trajectory(g: f64, l: f64, q: f64, rho0: &ComplexMatrix, times: &[f64]) -> Vec<ComplexMatrix> {
    times
        .iter()
        .map(|&t| {
            let gt = g_oracle(g, l, q, t);
            let pe = rho0[[1, 1]] * gt.norm_sqr();
            array![[ONE - pe, rho0[[0, 1]] * gt.conj()], [rho0[[1, 0]] * gt, pe]]
        })
        .collect()
}

fn deviation(tr: &Trajectory, states: &[ComplexMatrix]) -> f64 {
    tr.states.iter().zip(states).map(|(a, b)| max_abs_diff(a, b)).fold(0.0, f64::max)
}

fn criterion_4() -> Outcome {
    let l = 1.0;
    let times: Vec<f64> = (0..=100).map(|k| 0.1 * k as f64 / l).collect();
    let opts = PropagatorOptions::default();
    let mut worst = 0.0f64;
    let mut kernel = 0.0f64;
    // closed-form oracle checked against the kernel equation first
    for (g, q) in [(0.3, 0.0), (0.5, 0.25), (0.8, 0.5)] {
        for t in [0.5, 2.0, 7.0] {
            kernel = kernel.max((g_oracle(g, l, q, t) - g_by_kernel(g, l, q, t)).norm());
        }
    }
    for g in [0.3, 0.5, 0.8] {
        for q in [0.0, 0.25, 0.5] {
            let j = density(g, l, q);
            let spec = exponents_for(&j).unwrap();
            let rho0 = coherent();
            let pm = evolve_reduced(&DynamicsModel::Pseudomode(pm_model(&j)), &rho0, &times, &opts).unwrap();
            let he = evolve_reduced(&DynamicsModel::Heom(HeomModel::qubit_rwa(spec, 2)), &rho0, &times, &opts).unwrap();
            let an = analytic_qubit_trajectory(g, l, q, &rho0, &times).unwrap();
            let oracle = oracle_trajectory(g, l, q, &rho0, &times);
            worst = worst
                .max(pm.max_deviation(&he).unwrap())
                .max(deviation(&pm, &oracle))
                .max(deviation(&he, &oracle))
                .max(deviation(&an, &oracle));
        }
    }
    (
        worst <= 1e-8 && kernel < 1e-9,
        format!("max deviation over 3x3 (Γ, q) grid {worst:.1e}; closed form vs kernel equation {kernel:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let l = 1.0;
    let times: Vec<f64> = (0..=200).map(|k| 0.05 * k as f64).collect();
    let j = lor(0.5, l);
    let opts = PropagatorOptions::default();
    let mut worst = 0.0f64;
    for model in [
        DynamicsModel::Pseudomode(pm_model(&j)),
        DynamicsModel::Heom(HeomModel::qubit_rwa(exponents_for(&j).unwrap(), 2)),
    ] {
        let rho0 = coherent();
        let tr = evolve_reduced(&model, &rho0, &times, &opts).unwrap();
        for (t, s) in times.iter().zip(&tr.states) {
            let x = l * t;
            let coh = 0.5 * (x + 2.0) * (-x / 2.0).exp();
            let pop = 0.25 * (x * x + 4.0 * x + 4.0) * (-x).exp();
            worst = worst
                .max((s[[1, 0]] / rho0[[1, 0]] - coh).norm())
                .max((s[[1, 1]] / rho0[[1, 1]] - pop).norm());
        }
    }
    (worst <= 1e-8, format!("polynomial-exponential ratios, max pointwise error {worst:.1e}"))
}

fn criterion_6() -> Outcome {
    let rc = EpCriterion::RealToComplex { threshold: 1e-6 };
    let tol = 1e-10;
    let g0 = locate_ep_1d(|g| qubit_generator(&lor(g, 1.0)), (0.3, 0.8), rc, tol).unwrap();
    let g1 = locate_ep_1d(|g| qubit_generator(&density(g, 1.0, 0.25)), (0.1, 0.6), rc, tol).unwrap();
    let g2 = locate_ep_1d(|g| qubit_generator(&density(g, 1.0, 0.5)), (0.1, 0.5), rc, tol).unwrap();

    let chi_exact = 1.0 / (3.0 * 3f64.sqrt());
    let gam_exact = 16.0 / 27.0;
    let net = |chi: f64, gam: f64| BosonicNetwork::two_mode(chi, 0.0, Some(exponents_for(&lor(gam, 1.0)).unwrap()), 0.0);
    let coal = EpCriterion::Coalescence { size: 3 };
    let chi = locate_ep_1d(|c| network_generator(&net(c, gam_exact)), (0.05, 0.5), coal, tol).unwrap();
    let gam = locate_ep_1d(|g| network_generator(&net(chi_exact, g)), (0.3, 0.9), coal, tol).unwrap();
    let h = effective_nhh(&net(chi, gam)).unwrap();
    let ev = eigenvalues(&h).unwrap();
    let mean: C64 = ev.iter().sum::<C64>() / 3.0;
    let chains = jordan_structure(&h, mean, &JordanOptions { tol_cluster: 1e-3, ..Default::default() })
        .map(|r| r.chain_lengths)
        .unwrap_or_default();

    let errs = [
        (g0 - 0.5).abs(),
        (g1 - 0.375).abs(),
        (g2 - 0.25).abs(),
        (chi - chi_exact).abs(),
        (gam - gam_exact).abs(),
        (mean - C64::new(0.0, 1.0 / 3.0)).norm(),
    ];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    (
        worst <= 1e-6 && chains == vec![3],
        format!(
            "Γ*/Λ = {g0:.9}, {g1:.9}, {g2:.9}; χ*/Λ = {chi:.9}, Γ*/Λ = {gam:.9}, triple eigenvalue {:.9}i chains {chains:?}; max error {worst:.1e}",
            mean.im
        ),
    )
}

fn criterion_7() -> Outcome {
    let eps = default_eps_grid();
    let gam = 1.0;
    let markov = |e: f64| network_generator(&BosonicNetwork::two_mode(gam / 2.0 * (1.0 + e), 0.0, None, gam));
    let f2 = perturbation_scaling(markov, re(-gam / 2.0), 2, &eps).unwrap();
    let spec = exponents_for(&lor(16.0 / 27.0, 1.0)).unwrap();
    let chi0 = 1.0 / (3.0 * 3f64.sqrt());
    let ep3 = |e: f64| network_generator(&BosonicNetwork::two_mode(chi0 * (1.0 + e), 0.0, Some(spec.clone()), 0.0));
    let f3 = perturbation_scaling(ep3, re(-1.0 / 3.0), 3, &eps).unwrap();

    // vanishing time needs a zero inside 10³/Λ, which limits ε from below
    let l = 1.0;
    let veps = log_grid(1e-4, 1e-2, 13);
    let inv: Vec<f64> = veps.iter().map(|e| 1.0 / first_vanishing_time(0.5 * l * (1.0 + e), l).unwrap()).collect();
    let (a, slope, _) = fit_line(
        &veps.iter().map(|e| e.ln()).collect::<Vec<_>>(),
        &inv.iter().map(|v| (v / l).ln()).collect::<Vec<_>>(),
    );
    let coef = a.exp();
    // coefficient at the smallest ε, where higher orders are negligible
    let coef_small = inv[0] / (l * veps[0].sqrt());

    let ok2 = (f2.exponent - 0.5).abs() <= 0.02;
    let ok3 = (f3.exponent - 1.0 / 3.0).abs() <= 0.02;
    let ok_slope = (slope - 0.5).abs() <= 0.02;
    let ok_coef = (coef / 0.5 - 1.0).abs() <= 0.05;
    (
        ok2 && ok3 && ok_slope && ok_coef,
        format!(
            "EP2 exponent {:.4} [{}], EP3 exponent {:.4} [{}], 1/t_vanish slope {slope:.4} [{}], coefficient {coef:.4} (at ε=1e-4: {coef_small:.4}, 1/(2π) = {:.4}) vs Λ/2 [{}]",
            f2.exponent,
            ok(ok2),
            f3.exponent,
            ok(ok3),
            ok(ok_slope),
            1.0 / (2.0 * PI),
            ok(ok_coef)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn criterion_8() -> Outcome {
    let step = 1e-3;
    let mut all = true;
    let mut parts = Vec::new();
    for q in [0.0, 0.25, 0.5] {
        let ep = locate_ep_1d(
            |g| qubit_generator(&density(g, 1.0, q)),
            (0.1, 0.8),
            EpCriterion::RealToComplex { threshold: 1e-6 },
            1e-10,
        )
        .unwrap();
        let boundary = (100..=800)
            .map(|k| k as f64 * step)
            .find(|&g| is_nonmarkovian(g, 1.0, q).unwrap().nonmarkovian);
        // slack covers the bisection tolerance of the located EP
        let good = boundary.is_some_and(|b| (b - ep).abs() <= step + 1e-9);
        all &= good;
        parts.push(format!("q={q}: boundary {boundary:?} vs EP {ep:.10}"));
    }
    (all, parts.join("; "))
}

fn criterion_9() -> Outcome {
    let l = 1.0;
    let j = SpectralDensity::lorentzian(0.5, l, 100.0 * l).unwrap();
    let spec = exponents_for(&j).unwrap();
    let c0 = spec.value(0.0).norm();
    let mut worst = 0.0f64;
    for k in 0..=50 {
        let t = 10.0 / l * k as f64 / 50.0;
        let direct = correlation_quadrature(&j, t, true, &QuadratureOptions::default()).unwrap();
        // independent closed form for a single Lorentzian
        let exact = 0.5 * 0.5 * l * (-l * t).exp();
        worst = worst.max((direct - spec.value(t)).norm() / c0).max((spec.value(t) - exact).norm() / c0);
    }
    (worst <= 1e-6, format!("ω0 = 100Λ, max |C_exp − C_quad| / C(0) = {worst:.1e}"))
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> ComplexMatrix {
    ComplexMatrix::from_shape_fn((n, n), |_| C64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
}

fn criterion_10() -> Outcome {
    let seeds = 100u64;
    let mut fails = [0usize; 5];
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = rng.random_range(0.05..2.0);
        let l = rng.random_range(0.2..3.0);
        let q = rng.random_range(0.05..0.9);

        // trace preservation: pseudomode (full and restricted), hierarchy, random Lindblad
        let mut leak = 0.0f64;
        for j in [lor(g, l), density(g, l, q)] {
            let m = pm_model(&j);
            for e in [build_pm_liouvillian(&m).unwrap(), restrict_single_excitation(&m).unwrap()] {
                leak = leak.max(norm_vec(&e.trace_functional().dot(&e.matrix)));
            }
            let h = build_heom_rwa(&HeomModel::qubit_rwa(exponents_for(&j).unwrap(), 2)).unwrap();
            leak = leak.max(norm_vec(&h.extended.trace_functional().dot(h.matrix())));
        }
        let hs = random_matrix(&mut rng, 3, 1.0);
        let hs = (&hs + &hs.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        let lk = random_matrix(&mut rng, 3, 1.0);
        let lv = liouvillian_from_parts(&hs, &[(lk, 0.7)]).unwrap();
        leak = leak.max(norm_vec(&vec(&identity(3)).mapv(|z| z.conj()).dot(&lv)));
        if leak > 1e-12 {
            fails[0] += 1;
        }

        // conjugate pairs and decay for physical (q = 0) generators
        let e = build_pm_liouvillian(&pm_model(&lor(g, l))).unwrap();
        let ev = eigenvalues(&e.matrix).unwrap();
        let tol = 1e-7 * l.max(g);
        let paired = ev.iter().all(|z| ev.iter().any(|w| (w - z.conj()).norm() < tol));
        if !paired || ev.iter().any(|z| z.re > tol) {
            fails[1] += 1;
        }

        // vec(AXB) = (A ⊗ Bᵀ) vec(X); commutator superoperator
        let (a, x, b) = (random_matrix(&mut rng, 3, 1.0), random_matrix(&mut rng, 3, 1.0), random_matrix(&mut rng, 3, 1.0));
        let lhs = vec(&a.dot(&x).dot(&b));
        let rhs = kron(&a, &transpose(&b)).dot(&vec(&x));
        let comm = commutator_superop(&a).dot(&vec(&x)) - vec(&(a.dot(&x) - x.dot(&a)));
        if norm_vec(&(&lhs - &rhs)) > 1e-12 || norm_vec(&comm) > 1e-12 {
            fails[2] += 1;
        }

        // Jordan recovery on S·D·S⁻¹ with the EP Jordan form of the 9×9 generator
        let lam = rng.random_range(0.5..2.0);
        let mut d: ComplexMatrix = Array2::zeros((9, 9));
        let diag = [0.0, -0.5, -0.5, -0.5, -0.5, -1.0, -1.0, -1.0, -1.0];
        for (i, v) in diag.iter().enumerate() {
            d[[i, i]] = re(v * lam);
        }
        for (i, j) in [(1, 2), (3, 4), (5, 6), (6, 7)] {
            d[[i, j]] = ONE;
        }
        let s = identity(9).mapv(|z| z * 2.0) + random_matrix(&mut rng, 9, 0.3);
        let m = s.dot(&d).dot(&solve(&s, &identity(9)).unwrap());
        match detect_ep(&m, &JordanOptions::default()) {
            Ok(r) => {
                let mut lens: Vec<usize> = r.iter().flat_map(|e| e.chain_lengths.clone()).collect();
                lens.sort_unstable();
                if lens != vec![1, 1, 2, 2, 3] {
                    fails[3] += 1;
                }
            }
            Err(_) => fails[3] += 1,
        }

        // hierarchy and pseudomodes share the reduced spectrum's slow part: the
        // zero eigenvalue is simple for q = 0
        let z: Vec<C64> = eigenvalues(&restrict_single_excitation(&pm_model(&lor(g, l))).unwrap().matrix)
            .unwrap()
            .into_iter()
            .filter(|z| z.norm() < 1e-9)
            .collect();
        if z.len() != 1 {
            fails[4] += 1;
        }
    }
    let names = ["trace", "conjugate/decay", "vec-kron", "jordan-recovery", "steady-state"];
    let detail: Vec<String> = names.iter().zip(&fails).map(|(n, f)| format!("{n} {}/{seeds}", seeds as usize - f)).collect();
    (fails.iter().all(|&f| f == 0), detail.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "matrix fidelity", criterion_1),
        (2, "jordan structure", criterion_2),
        (3, "heom blocks", criterion_3),
        (4, "cross-method dynamics", criterion_4),
        (5, "ep dynamics", criterion_5),
        (6, "ep location", criterion_6),
        (7, "sensitivity scaling", criterion_7),
        (8, "non-markovianity alignment", criterion_8),
        (9, "correlation oracle", criterion_9),
        (10, "property suites", criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (n, name, f) in criteria {
        let (pass, detail) = f();
        let expected_fail = EXPECTED_FAILURES.contains(&n);
        let tag = match (pass, expected_fail) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {n:>2} {name}: {tag} | {detail}");
        if pass == expected_fail {
            unexpected.push(n);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria behave as documented");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}

