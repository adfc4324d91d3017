//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the odd-indexed Kronrod nodes
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

struct Piece {
    a: f64,
    b: f64,
    value: C64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.partial_cmp(&o.err).unwrap_or(Ordering::Equal)
    }
}

/// `∫_a^b f` to absolute tolerance `abstol`, bisecting the worst interval
/// until the summed error estimate is below tolerance.
///
/// `initial` splits `[a, b]` into that many equal pieces first, which helps
/// with oscillatory integrands.
pub fn integrate<F: Fn(f64) -> C64>(
    f: F,
    a: f64,
    b: f64,
    abstol: f64,
    initial: usize,
    max_intervals: usize,
) -> Result<C64> {
    if a == b {
        return Ok(C64::new(0.0, 0.0));
    }
    let mut heap = BinaryHeap::new();
    let pieces = initial.max(1);
    let w = (b - a) / pieces as f64;
    for k in 0..pieces {
        let lo = a + w * k as f64;
        let hi = if k + 1 == pieces { b } else { lo + w };
        let (value, err) = gk15(&f, lo, hi);
        heap.push(Piece { a: lo, b: hi, value, err });
    }
    loop {
        let total_err: f64 = heap.iter().map(|p| p.err).sum();
        if total_err <= abstol {
            break;
        }
        if heap.len() >= max_intervals {
            return Err(Error::Accuracy {
                achieved: total_err,
                requested: abstol,
            });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            return Err(Error::Accuracy {
                achieved: total_err,
                requested: abstol,
            });
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, err) = gk15(&f, lo, hi);
            heap.push(Piece { a: lo, b: hi, value, err });
        }
    }
    Ok(heap.iter().map(|p| p.value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        let total: f64 = WGK[7] + 2.0 * WGK[..7].iter().sum::<f64>();
        assert!((total - 2.0).abs() < 1e-15);
        let g: f64 = WG[3] + 2.0 * WG[..3].iter().sum::<f64>();
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_and_oscillatory() {
        let v = integrate(|x| C64::new(x.powi(5), 0.0), 0.0, 2.0, 1e-12, 1, 100).unwrap();
        assert!((v.re - 64.0 / 6.0).abs() < 1e-12);
        // ∫_0^{2π·50} e^{-ix} dx = 0
        let b = 100.0 * std::f64::consts::PI;
        let v = integrate(|x| C64::new(0.0, -x).exp(), 0.0, b, 1e-10, 8, 10_000).unwrap();
        assert!(v.norm() < 1e-9);
    }

    #[test]
    fn reports_failure_on_budget() {
        let r = integrate(|x| C64::new((1.0 / x).sin(), 0.0), 1e-8, 1.0, 1e-14, 1, 4);
        assert!(matches!(r, Err(Error::Accuracy { .. })));
    }
}
