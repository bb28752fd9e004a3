//! Closed-form steady state for a symmetric environment (`J_x = J_z = J`).
//!
//! In the weak-coupling limit the stationary rotating-frame state is diagonal
//! in the eigenbasis of `H_eff`, with polarization
//!
//! ```text
//!      (ω'-ω)² J(ω'+ω) + (ω'+ω)² J(ω'-ω)
//! P = ------------------------------------------------------
//!      (ω'-ω)² c₊ J(ω'+ω) + (ω'+ω)² c₋ J(ω'-ω),   c± = coth((ω'±ω)/2T)
//! ```
//!
//! and DC current `I = I_0 P ω/ω'`. The coupling strength cancels.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::bath::coth_factor;
use crate::model::{sideband_frequencies, SystemParams};
use crate::{Error, Result};

/// Steady-state observables at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyResult {
    pub polarization: f64,
    /// In units of `I_0`.
    pub dc_current: f64,
    /// `2π I/ω`; `None` for `ω ≤ 0`.
    pub pumped_charge: Option<f64>,
}

pub fn polarization(params: &SystemParams) -> Result<f64> {
    params.validate()?;
    let t = params.temperature;
    if t == 0.0 {
        return Ok(1.0);
    }
    // P is even in ω. With s = ω'+|ω| and d = ω'-|ω| = Δ²/s, divide numerator
    // and denominator by d s = Δ² and use the α-free damping factors.
    let (s, d) = sideband_frequencies(params.delta, params.omega);
    let damp_s = (-s / params.cutoff).exp();
    let damp_d = (-d / params.cutoff).exp();
    let numerator = d * damp_s + s * damp_d;
    let denominator = d * coth_factor(s, t)? * damp_s + s * coth_factor(d, t)? * damp_d;
    Ok(numerator / denominator)
}

/// `I/I_0 = P ω/ω'`.
pub fn dc_current(params: &SystemParams) -> Result<f64> {
    let p = polarization(params)?;
    Ok(p * params.omega / params.omega.hypot(params.delta))
}

/// Charge pumped per drive period, `Q_p = 2π I/ω` (units of `I_0/Δ` when
/// `Δ = 1`).
pub fn pumped_charge(params: &SystemParams) -> Result<f64> {
    if !(params.omega > 0.0) {
        return Err(Error::Domain(format!(
            "pumped charge needs a positive drive frequency, got {}",
            params.omega
        )));
    }
    Ok(TAU * dc_current(params)? / params.omega)
}

pub fn steady_result(params: &SystemParams) -> Result<SteadyResult> {
    let polarization = polarization(params)?;
    let dc_current = polarization * params.omega / params.omega.hypot(params.delta);
    Ok(SteadyResult {
        polarization,
        dc_current,
        pumped_charge: (params.omega > 0.0).then(|| TAU * dc_current / params.omega),
    })
}

/// Slow-drive limit `tanh(Δ/2T)`: thermal equilibrium of the static field.
pub fn limit_adiabatic(params: &SystemParams) -> f64 {
    thermal_polarization(params.delta, params.temperature)
}

/// Fast-drive limit `tanh((ω'-ω)/2T)`: equilibrium at the reduced splitting
/// `ω' - ω ≈ Δ²/2ω`.
pub fn limit_antiadiabatic(params: &SystemParams) -> f64 {
    let (_, d) = sideband_frequencies(params.delta, params.omega);
    thermal_polarization(d, params.temperature)
}

fn thermal_polarization(splitting: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        1.0
    } else {
        (splitting / (2.0 * temperature)).tanh()
    }
}

/// Search window and tolerance for [`optimal_frequency`], in units of Δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumSearch {
    pub omega_min: f64,
    pub omega_max: f64,
    pub grid_points: usize,
    pub rel_tol: f64,
}

impl Default for OptimumSearch {
    fn default() -> Self {
        Self {
            omega_min: 1e-3,
            omega_max: 1e4,
            grid_points: 400,
            rel_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub omega: f64,
    pub current: f64,
    /// The maximum sits on the edge of the search window (monotone current).
    pub at_boundary: bool,
}

/// Drive frequency maximizing the DC current at fixed `Δ`, `T` and cutoff.
///
/// A logarithmic grid brackets the maximum, then golden-section search in
/// `ln ω` refines it to `rel_tol`. The grid scan runs in parallel.
pub fn optimal_frequency(delta: f64, temperature: f64, cutoff: f64, search: &OptimumSearch) -> Result<Optimum> {
    let base = SystemParams::new(delta, 1.0, temperature).with_cutoff(cutoff);
    base.validate()?;
    if !(search.omega_min > 0.0 && search.omega_max > search.omega_min && search.grid_points >= 3) {
        return Err(Error::Precondition(format!("bad optimum search window {search:?}")));
    }
    let lo = (search.omega_min * delta).ln();
    let hi = (search.omega_max * delta).ln();
    let n = search.grid_points;
    let current = |ln_w: f64| dc_current(&base.with_omega(ln_w.exp()));
    let grid: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    let values = grid.par_iter().map(|&x| current(x)).collect::<Result<Vec<f64>>>()?;
    let best = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("non-empty grid");
    if best == 0 || best == n - 1 {
        return Ok(Optimum {
            omega: if best == 0 { search.omega_min } else { search.omega_max } * delta,
            current: values[best],
            at_boundary: true,
        });
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (current(c)?, current(d)?);
    // Width in ln ω is the relative tolerance in ω.
    while b - a > search.rel_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = current(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = current(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok(Optimum {
        omega: x.exp(),
        current: current(x)?,
        at_boundary: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    /// Textbook form of the closed-form polarization, evaluated naively.
    fn naive_polarization(delta: f64, omega: f64, t: f64, cutoff: f64) -> f64 {
        let wp = (omega * omega + delta * delta).sqrt();
        let j = |w: f64| w * (-w / cutoff).exp();
        let coth = |x: f64| 1.0 / x.tanh();
        let (jp, jm) = (j(wp + omega), j(wp - omega));
        let (cp, cm) = (coth((wp + omega) / (2.0 * t)), coth((wp - omega) / (2.0 * t)));
        let (a, b) = ((wp - omega).powi(2), (wp + omega).powi(2));
        (a * jp + b * jm) / (a * cp * jp + b * cm * jm)
    }

    #[test]
    fn zero_temperature_projects_on_ground_state() {
        for &w in &[0.0, 0.3, 1.0, 7.0, 1e3] {
            for &wc in &[5.0, 50.0, f64::INFINITY] {
                let p = SystemParams::new(1.0, w, 0.0).with_cutoff(wc);
                assert_eq!(polarization(&p).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn reference_point() {
        // Δ = ω = T = 1, pure ohmic. Frozen from the naive formula and
        // confirmed by α → 0 extrapolation of the Redfield steady state.
        let p = SystemParams::new(1.0, 1.0, 1.0).with_cutoff(f64::INFINITY);
        let got = polarization(&p).unwrap();
        assert_relative_eq!(got, naive_polarization(1.0, 1.0, 1.0, f64::INFINITY), max_relative = 1e-13);
        assert_relative_eq!(got, 0.229_605_657_094_419_55, max_relative = 1e-12);
    }

    #[test]
    fn matches_naive_formula_where_it_is_well_conditioned() {
        for &(w, t, wc) in &[(0.3, 0.2, 50.0), (2.0, 1.0, 50.0), (5.0, 3.0, 20.0), (1.0, 0.1, f64::INFINITY)] {
            let p = SystemParams::new(1.0, w, t).with_cutoff(wc);
            assert_relative_eq!(polarization(&p).unwrap(), naive_polarization(1.0, w, t, wc), max_relative = 1e-12);
        }
    }

    #[test]
    fn dc_current_examples() {
        let p = SystemParams::new(1.0, 0.0, 0.5);
        assert_eq!(dc_current(&p).unwrap(), 0.0);
        let p = SystemParams::new(1.0, 1.0, 0.0);
        assert_relative_eq!(dc_current(&p).unwrap(), FRAC_1_SQRT_2, epsilon = 1e-15);
        // I ω tends to a constant at large ω.
        let p = SystemParams::new(1.0, 1.0, 0.5).with_cutoff(f64::INFINITY);
        let iw = |w: f64| dc_current(&p.with_omega(w)).unwrap() * w;
        assert!((iw(2e3) / iw(4e3) - 1.0).abs() < 1e-3);
        assert!(dc_current(&p.with_omega(4e3)).unwrap() < 1e-3);
    }

    #[test]
    fn pumped_charge_examples() {
        let slow = SystemParams::new(1.0, 0.01, 0.0);
        assert!((pumped_charge(&slow).unwrap() / TAU - 1.0).abs() < 1e-3);
        let fast = SystemParams::new(1.0, 1e3, 0.0);
        assert_relative_eq!(pumped_charge(&fast).unwrap(), TAU / 1e3, max_relative = 1e-6);
        assert!(pumped_charge(&slow.with_omega(0.0)).is_err());
        assert!(pumped_charge(&slow.with_omega(-1.0)).is_err());
        let hot = SystemParams::new(1.0, 1.0, 1.0).with_cutoff(f64::INFINITY);
        let q = |w: f64| pumped_charge(&hot.with_omega(w)).unwrap();
        assert!((q(1e3) / q(2e3) - 4.0).abs() < 0.01);
        let r = steady_result(&hot.with_omega(-2.0)).unwrap();
        assert_eq!(r.pumped_charge, None);
        assert!(r.dc_current < 0.0);
    }

    #[test]
    fn limits() {
        let cold = SystemParams::new(1.0, 10.0, 0.0);
        assert_eq!(limit_adiabatic(&cold), 1.0);
        assert_eq!(limit_antiadiabatic(&cold), 1.0);
        let p = SystemParams::new(1.0, 10.0, 0.2);
        let (_, d) = sideband_frequencies(1.0, 10.0);
        assert_relative_eq!(d, 0.05, max_relative = 0.01);
        assert_relative_eq!(limit_antiadiabatic(&p), (d / 0.4).tanh(), max_relative = 1e-15);
        // Oracle: the direct formula at ω = 0.01.
        let slow = SystemParams::new(1.0, 0.01, 1.0);
        assert!((polarization(&slow).unwrap() - limit_adiabatic(&slow)).abs() < 1e-3);
        for &t in &[0.01, 0.1, 1.0] {
            let fast = SystemParams::new(1.0, 100.0, t).with_cutoff(f64::INFINITY);
            assert!((polarization(&fast).unwrap() - limit_antiadiabatic(&fast)).abs() < 1e-3);
            let slow = fast.with_omega(0.01);
            assert!((polarization(&slow).unwrap() - limit_adiabatic(&slow)).abs() < 1e-3);
        }
    }

    #[test]
    fn alpha_does_not_enter() {
        let p = SystemParams::new(1.0, 1.7, 0.4);
        let a = polarization(&p.with_alpha(1e-3)).unwrap();
        let b = polarization(&p.with_alpha(1e-2)).unwrap();
        assert!((a - b).abs() <= 1e-14);
    }

    #[test]
    fn optimum_at_zero_temperature_is_on_the_boundary() {
        let search = OptimumSearch::default();
        let opt = optimal_frequency(1.0, 0.0, f64::INFINITY, &search).unwrap();
        assert!(opt.at_boundary);
        assert_eq!(opt.omega, 1e4);
        let opt = optimal_frequency(1.0, 1e-6, f64::INFINITY, &search).unwrap();
        assert!(opt.at_boundary);
    }

    #[test]
    fn optimum_moves_up_as_temperature_drops() {
        let search = OptimumSearch::default();
        let w1 = optimal_frequency(1.0, 0.05, f64::INFINITY, &search).unwrap();
        let w2 = optimal_frequency(1.0, 0.2, f64::INFINITY, &search).unwrap();
        assert!(!w1.at_boundary && !w2.at_boundary);
        assert!(w1.omega > w2.omega);
    }

    #[test]
    fn optimum_agrees_with_brute_force_scan() {
        // Oracle: 10⁴ log-spaced evaluations of the naive formula over
        // [1e-3, 1e4]; the argmax is accurate to one grid step.
        let (t, wc) = (1.0, 50.0);
        let n = 10_000;
        let step = (1e7f64).ln() / (n - 1) as f64;
        let (scan_w, _) = (0..n)
            .map(|k| {
                let w = 1e-3 * (step * k as f64).exp();
                (w, naive_polarization(1.0, w, t, wc) * w / (w * w + 1.0).sqrt())
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        // Frozen from the scan above.
        assert_relative_eq!(scan_w, 0.734_27, max_relative = 2e-3);
        let opt = optimal_frequency(1.0, t, wc, &OptimumSearch::default()).unwrap();
        assert!(!opt.at_boundary);
        assert!((opt.omega / scan_w).ln().abs() <= step);
        // Same order as Δ²/T.
        assert!(opt.omega > 0.3 && opt.omega < 3.0);
    }

    proptest! {
        #[test]
        fn polarization_is_even_and_current_odd(w in 0.1f64..10.0, t in 0.01f64..10.0) {
            let p = SystemParams::new(1.0, w, t);
            let m = p.with_omega(-w);
            prop_assert_eq!(polarization(&p).unwrap(), polarization(&m).unwrap());
            prop_assert_eq!(dc_current(&p).unwrap(), -dc_current(&m).unwrap());
        }

        #[test]
        fn polarization_in_unit_interval_and_decreasing_in_t(w in 0.0f64..100.0, t in 1e-3f64..20.0) {
            let p = SystemParams::new(1.0, w, t);
            let a = polarization(&p).unwrap();
            let b = polarization(&p.with_temperature(1.1 * t)).unwrap();
            prop_assert!(a > 0.0 && a <= 1.0);
            prop_assert!(b <= a);
        }
    }
}
