//! Globally adaptive 7/15-point Gauss-Kronrod quadrature.
//!
//! Used for the bath correlation function, its half-range Fourier transform
//! and principal-value (Lamb shift) integrals. None of these sit on a hot
//! path.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::{Error, Result};

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

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_intervals: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

struct Interval {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Interval {}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Interval {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kron += pair * w;
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    Interval {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).norm(),
    }
}

/// Integrates a complex-valued `f` over consecutive sub-intervals delimited by
/// `breakpoints` (at least two, increasing). Breakpoints are where the
/// integrand has kinks or changes scale.
pub fn integrate_complex<F>(mut f: F, breakpoints: &[f64], opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Complex64,
{
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("quadrature breakpoints must be increasing".into()));
    }
    let mut heap: BinaryHeap<Interval> = breakpoints
        .windows(2)
        .map(|w| kronrod(&mut f, w[0], w[1]))
        .collect();
    let mut evaluations = 15 * heap.len();
    loop {
        let value: Complex64 = heap.iter().map(|i| i.value).sum();
        let error: f64 = heap.iter().map(|i| i.error).sum();
        if error <= opts.abs_tol.max(opts.rel_tol * value.norm()) {
            return Ok(QuadResult {
                value,
                error,
                evaluations,
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature { error, evaluations });
        }
        let worst = heap.pop().expect("non-empty interval set");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::Quadrature { error, evaluations });
        }
        heap.push(kronrod(&mut f, worst.a, mid));
        heap.push(kronrod(&mut f, mid, worst.b));
        evaluations += 30;
    }
}

/// Real-valued convenience wrapper around [`integrate_complex`].
pub fn integrate<F>(mut f: F, breakpoints: &[f64], opts: &QuadOptions) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_complex(|x| Complex64::from(f(x)), breakpoints, opts)?;
    Ok((r.value.re, r.error))
}

/// `n + 1` evenly spaced breakpoints over `[a, b]`.
pub fn uniform_breakpoints(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let (v, _) = integrate(|x| x.powi(5) - 3.0 * x * x, &[0.0, 2.0], &QuadOptions::default()).unwrap();
        assert!((v - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_and_kinked_integrands() {
        let opts = QuadOptions::default();
        let (v, _) = integrate(|x| (10.0 * x).sin() * (-x).exp(), &uniform_breakpoints(0.0, 40.0, 20), &opts).unwrap();
        assert!((v - 10.0 / 101.0).abs() < 1e-11);
        let (v, _) = integrate(|x| x.abs(), &[-1.0, 0.0, 2.0], &opts).unwrap();
        assert!((v - 2.5).abs() < 1e-13);
        let (v, _) = integrate(|x| 1.0 / (1.0 + x * x), &[-1e3, 1e3], &opts).unwrap();
        assert!((v - (PI - 2.0 * (1e-3f64).atan())).abs() < 1e-9);
    }

    #[test]
    fn complex_integrand() {
        let r = integrate_complex(|x| Complex64::new(0.0, x).exp(), &[0.0, PI], &QuadOptions::default()).unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn reports_non_convergence() {
        let opts = QuadOptions {
            max_intervals: 4,
            ..QuadOptions::default()
        };
        let err = integrate(|x| 1.0 / x.sqrt(), &[0.0, 1.0], &opts).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
        assert!(integrate(|x| x, &[1.0, 1.0], &opts).is_err());
    }
}
