use ndarray::Array2;
use nmep::environment::{exponents_for, SpectralDensity};
use nmep::heom::{build_heom_rwa, HeomModel};
use nmep::linalg::{
    eigenvalues, identity, kron, liouvillian_from_parts, norm_vec, re, solve, transpose, vec, ComplexMatrix, JordanOptions,
    C64, ONE,
};
use nmep::pseudomode::{build_pm_liouvillian, restrict_single_excitation, PseudomodeModel};
use nmep::spectral::detect_ep;
use proptest::prelude::*;

fn matrix(n: usize, scale: f64) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-scale..scale, -scale..scale), n * n)
        .prop_map(move |v| Array2::from_shape_vec((n, n), v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap())
}

fn density(g: f64, l: f64, q: f64) -> SpectralDensity {
    if q == 0.0 {
        SpectralDensity::lorentzian(g, l, 0.0).unwrap()
    } else {
        SpectralDensity::bandgap(g, l, 0.0, q).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn generators_preserve_trace(g in 0.05f64..2.0, l in 0.2f64..3.0, q in prop_oneof![Just(0.0), 0.05f64..0.9]) {
        let j = density(g, l, q);
        let m = PseudomodeModel::qubit_rwa(exponents_for(&j).unwrap());
        for e in [build_pm_liouvillian(&m).unwrap(), restrict_single_excitation(&m).unwrap()] {
            prop_assert!(norm_vec(&e.trace_functional().dot(&e.matrix)) < 1e-12);
        }
        let h = build_heom_rwa(&HeomModel::qubit_rwa(exponents_for(&j).unwrap(), 2)).unwrap();
        prop_assert!(norm_vec(&h.extended.trace_functional().dot(h.matrix())) < 1e-12);
    }

    #[test]
    fn lindblad_form_preserves_trace(h in matrix(3, 1.0), k1 in matrix(3, 1.0), k2 in matrix(3, 1.0), r in 0.0f64..2.0) {
        let h = (&h + &h.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        let l = liouvillian_from_parts(&h, &[(k1, r), (k2, 0.3)]).unwrap();
        let tr = vec(&identity(3)).mapv(|z| z.conj());
        prop_assert!(norm_vec(&tr.dot(&l)) < 1e-12);
    }

    #[test]
    fn physical_spectrum_pairs_and_decays(g in 0.05f64..2.0, l in 0.2f64..3.0) {
        let m = PseudomodeModel::qubit_rwa(exponents_for(&density(g, l, 0.0)).unwrap());
        let ev = eigenvalues(&build_pm_liouvillian(&m).unwrap().matrix).unwrap();
        let tol = 1e-7 * g.max(l);
        for z in &ev {
            prop_assert!(z.re <= tol, "eigenvalue {z} grows");
            prop_assert!(ev.iter().any(|w| (w - z.conj()).norm() < tol), "no partner for {z}");
        }
    }

    #[test]
    fn vec_of_product(a in matrix(3, 1.0), x in matrix(3, 1.0), b in matrix(3, 1.0)) {
        let lhs = vec(&a.dot(&x).dot(&b));
        let rhs = kron(&a, &transpose(&b)).dot(&vec(&x));
        prop_assert!(norm_vec(&(&lhs - &rhs)) < 1e-12);
    }

    #[test]
    fn kron_mixed_product(a in matrix(2, 1.0), b in matrix(2, 1.0), c in matrix(2, 1.0), d in matrix(2, 1.0)) {
        let lhs = kron(&a, &b).dot(&kron(&c, &d));
        let rhs = kron(&a.dot(&c), &b.dot(&d));
        prop_assert!((&lhs - &rhs).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn jordan_form_recovered_after_similarity(s in matrix(9, 0.3), lam in 0.5f64..2.0) {
        let mut d: ComplexMatrix = Array2::zeros((9, 9));
        for (i, v) in [0.0, -0.5, -0.5, -0.5, -0.5, -1.0, -1.0, -1.0, -1.0].iter().enumerate() {
            d[[i, i]] = re(v * lam);
        }
        for (i, j) in [(1, 2), (3, 4), (5, 6), (6, 7)] {
            d[[i, j]] = ONE;
        }
        let s = identity(9).mapv(|z| z * 2.0) + s;
        let m = s.dot(&d).dot(&solve(&s, &identity(9)).unwrap());
        let reports = detect_ep(&m, &JordanOptions::default()).unwrap();
        let find = |x: f64| reports.iter().find(|r| (r.lambda - re(x * lam)).norm() < 1e-6).map(|r| r.chain_lengths.clone());
        prop_assert_eq!(find(0.0), Some(vec![1]));
        prop_assert_eq!(find(-0.5), Some(vec![2, 2]));
        prop_assert_eq!(find(-1.0), Some(vec![3, 1]));
    }
}
