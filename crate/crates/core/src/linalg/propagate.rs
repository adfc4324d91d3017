//! `v(t) = exp(L t) v0` by adaptive Dormand–Prince 5(4) or by eigenvector
//! expansion when the eigenbasis is well conditioned.

use super::{
    condition_number, eigendecompose, require_square, solve, ComplexMatrix, ComplexVector,
    EigenOptions,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationMethod {
    /// Spectral when `cond(V)` is below the limit, Runge–Kutta otherwise.
    Auto,
    RungeKutta,
    Spectral,
}

#[derive(Debug, Clone, Copy)]
pub struct PropagatorOptions {
    pub method: PropagationMethod,
    pub rtol: f64,
    /// Absolute tolerance relative to `max |v0_i|`.
    pub atol: f64,
    /// Largest eigenvector condition number accepted by the spectral path.
    pub max_condition: f64,
    pub max_steps: usize,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        PropagatorOptions {
            method: PropagationMethod::Auto,
            rtol: 1e-10,
            atol: 1e-13,
            max_condition: 1e8,
            max_steps: 5_000_000,
        }
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::param("times", "must be finite and nonnegative"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("times", "must be nondecreasing"));
    }
    Ok(())
}

pub fn propagate(
    l: &ComplexMatrix,
    v0: &ComplexVector,
    times: &[f64],
    opts: &PropagatorOptions,
) -> Result<Vec<ComplexVector>> {
    let n = require_square(l, "generator")?;
    if v0.len() != n {
        return Err(Error::dim(format!(
            "initial vector has length {}, generator is {n}x{n}",
            v0.len()
        )));
    }
    check_times(times)?;
    match opts.method {
        PropagationMethod::RungeKutta => dopri5(l, v0, times, opts),
        PropagationMethod::Spectral => spectral(l, v0, times, f64::INFINITY),
        PropagationMethod::Auto => match spectral(l, v0, times, opts.max_condition) {
            Ok(v) => Ok(v),
            Err(Error::NotInRegime(msg)) => {
                log::debug!("spectral propagation unavailable ({msg}); integrating");
                dopri5(l, v0, times, opts)
            }
            Err(e) => Err(e),
        },
    }
}

fn spectral(
    l: &ComplexMatrix,
    v0: &ComplexVector,
    times: &[f64],
    max_cond: f64,
) -> Result<Vec<ComplexVector>> {
    let spec = eigendecompose(l, &EigenOptions::default())?;
    let cond = condition_number(&spec.eigenvectors);
    if !(cond < max_cond) {
        return Err(Error::NotInRegime(format!(
            "eigenvector condition number {cond:.2e}"
        )));
    }
    let c = solve(&spec.eigenvectors, &v0.clone().insert_axis(ndarray::Axis(1)))
        .map_err(|_| Error::NotInRegime("singular eigenvector matrix".into()))?;
    Ok(times
        .iter()
        .map(|&t| {
            let w: ComplexVector = spec
                .eigenvalues
                .iter()
                .zip(c.column(0).iter())
                .map(|(lam, ci)| (lam * t).exp() * ci)
                .collect();
            spec.eigenvectors.dot(&w)
        })
        .collect())
}

// Dormand–Prince tableau; the generator is autonomous so the nodes c_i are unused
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(y: &ComplexVector, terms: &[(f64, &ComplexVector)], h: f64) -> ComplexVector {
    let mut out = y.clone();
    for (c, k) in terms {
        let f = c * h;
        out.zip_mut_with(k, |o, x| *o += x * f);
    }
    out
}

fn dopri5(
    l: &ComplexMatrix,
    v0: &ComplexVector,
    times: &[f64],
    opts: &PropagatorOptions,
) -> Result<Vec<ComplexVector>> {
    let scale0 = v0.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(f64::MIN_POSITIVE);
    let atol = opts.atol * scale0;
    let lnorm = l.iter().fold(0.0f64, |m, z| m.max(z.norm())) * l.nrows() as f64;
    let mut h = if lnorm > 0.0 { 0.01 / lnorm } else { 1.0 };

    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    let mut y = v0.clone();
    let mut k1 = l.dot(&y);
    let mut steps = 0usize;

    for &target in times {
        while t < target {
            if steps >= opts.max_steps {
                return Err(Error::Stiffness { time: t });
            }
            let last = target - t <= h;
            let hs = if last { target - t } else { h };
            let k2 = l.dot(&axpy(&y, &[(A21, &k1)], hs));
            let k3 = l.dot(&axpy(&y, &[(A31, &k1), (A32, &k2)], hs));
            let k4 = l.dot(&axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs));
            let k5 = l.dot(&axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs));
            let k6 = l.dot(&axpy(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                hs,
            ));
            let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], hs);
            let k7 = l.dot(&y_new);
            let err_vec = axpy(
                &ComplexVector::zeros(y.len()),
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
                hs,
            );
            let err = (err_vec
                .iter()
                .zip(y.iter().zip(y_new.iter()))
                .map(|(e, (a, b))| {
                    let sc = atol + opts.rtol * a.norm().max(b.norm());
                    (e.norm() / sc).powi(2)
                })
                .sum::<f64>()
                / y.len() as f64)
                .sqrt();
            steps += 1;
            if err <= 1.0 {
                t = if last { target } else { t + hs };
                y = y_new;
                k1 = k7;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    h = hs * fac;
                } else {
                    h = h.max(hs * fac);
                }
            } else {
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Stiffness { time: t });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{liouvillian_from_parts, norm_vec, re, vec, C64, ZERO};
    use ndarray::{array, Array1, Array2};

    #[test]
    fn scalar_decay() {
        let l = array![[re(-1.0)]];
        let v0 = Array1::from_elem(1, re(1.0));
        for m in [PropagationMethod::RungeKutta, PropagationMethod::Spectral] {
            let o = PropagatorOptions {
                method: m,
                ..Default::default()
            };
            let v = propagate(&l, &v0, &[1.0], &o).unwrap();
            assert!((v[0][0] - re((-1f64).exp())).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_generator_is_identity() {
        let l: ComplexMatrix = Array2::zeros((3, 3));
        let v0 = array![re(1.0), C64::new(0.0, 2.0), re(-3.0)];
        let out = propagate(&l, &v0, &[0.0, 1.0, 10.0], &Default::default()).unwrap();
        for v in out {
            assert!(norm_vec(&(v - &v0)) < 1e-14);
        }
    }

    #[test]
    fn amplitude_damping_population() {
        let sm = array![[ZERO, re(1.0)], [ZERO, ZERO]];
        let l = liouvillian_from_parts(&Array2::zeros((2, 2)), &[(sm, 1.0)]).unwrap();
        let rho = array![[ZERO, ZERO], [ZERO, re(1.0)]];
        let v0 = vec(&rho);
        for m in [PropagationMethod::RungeKutta, PropagationMethod::Auto] {
            let o = PropagatorOptions {
                method: m,
                ..Default::default()
            };
            let v = propagate(&l, &v0, &[2.0], &o).unwrap();
            assert!((v[0][3].re - (-2f64).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn methods_agree_on_oscillating_generator() {
        let l = array![
            [C64::new(-0.1, 3.0), re(1.0), ZERO],
            [re(-1.0), C64::new(-0.2, -1.0), re(0.5)],
            [ZERO, re(0.3), re(-0.05)]
        ];
        let v0 = array![re(1.0), ZERO, C64::new(0.0, 1.0)];
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
        let rk = propagate(
            &l,
            &v0,
            &times,
            &PropagatorOptions {
                method: PropagationMethod::RungeKutta,
                ..Default::default()
            },
        )
        .unwrap();
        let sp = propagate(
            &l,
            &v0,
            &times,
            &PropagatorOptions {
                method: PropagationMethod::Spectral,
                ..Default::default()
            },
        )
        .unwrap();
        for (a, b) in rk.iter().zip(&sp) {
            assert!(norm_vec(&(a - b)) < 1e-8);
        }
    }

    #[test]
    fn bad_times_rejected() {
        let l = array![[re(-1.0)]];
        let v0 = Array1::from_elem(1, re(1.0));
        assert!(propagate(&l, &v0, &[1.0, 0.5], &Default::default()).is_err());
        assert!(propagate(&l, &v0, &[-1.0], &Default::default()).is_err());
    }
}
