//! Laboratory scales for a ring with hopping energy `γ_0`.

use crate::{Error, Result};

/// Reduced Planck constant in eV·s (exact SI value of h / 2π).
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;
/// Elementary charge in C (exact).
pub const ELEMENTARY_CHARGE_C: f64 = 1.602_176_634e-19;
/// Boltzmann constant in eV/K (exact).
pub const BOLTZMANN_EV_K: f64 = 8.617_333_262e-5;

/// Drive amplitude as a fraction of the hopping energy.
pub const DELTA_OVER_GAMMA0: f64 = 0.1;
/// Largest useful temperature as a fraction of `ħΔ/k_B`.
pub const TEMPERATURE_OVER_DELTA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalUnits {
    pub gamma0_mev: f64,
    /// Carrier charge in elementary charges.
    pub charge: f64,
}

impl PhysicalUnits {
    pub fn new(gamma0_mev: f64) -> Result<Self> {
        if !(gamma0_mev > 0.0 && gamma0_mev.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gamma0_mev",
                value: gamma0_mev,
                reason: "must be positive",
            });
        }
        Ok(Self { gamma0_mev, charge: 1.0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitsReport {
    /// `q γ_0 / (√3 ħ)` in nA.
    pub i0_na: f64,
    /// `Δ = 0.1 γ_0/ħ` as an angular frequency, in units of 10⁹ rad/s.
    pub delta_grad_s: f64,
    /// Same Δ as an ordinary frequency `Δ/2π`, in GHz.
    pub delta_ghz: f64,
    /// `0.2 ħΔ/k_B` in K.
    pub temperature_bound_k: f64,
}

pub fn physical_units(u: &PhysicalUnits) -> UnitsReport {
    let gamma0_ev = 1e-3 * u.gamma0_mev;
    let i0_amp = u.charge * ELEMENTARY_CHARGE_C * gamma0_ev / (3f64.sqrt() * HBAR_EV_S);
    let delta_rad_s = DELTA_OVER_GAMMA0 * gamma0_ev / HBAR_EV_S;
    let delta_ev = HBAR_EV_S * delta_rad_s;
    UnitsReport {
        i0_na: 1e9 * i0_amp,
        delta_grad_s: 1e-9 * delta_rad_s,
        delta_ghz: 1e-9 * delta_rad_s / std::f64::consts::TAU,
        temperature_bound_k: TEMPERATURE_OVER_DELTA * delta_ev / BOLTZMANN_EV_K,
    }
}

/// Converts a natural-unit current (in units of `I_0`) to nA.
pub fn current_na(report: &UnitsReport, current: f64) -> f64 {
    report.i0_na * current
}

/// Converts a natural-unit frequency (in units of Δ) to 10⁹ rad/s.
pub fn frequency_grad_s(report: &UnitsReport, omega: f64) -> f64 {
    report.delta_grad_s * omega
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn feasibility_scales() {
        let r = physical_units(&PhysicalUnits::new(0.05).unwrap());
        // Hand evaluation: 1.602e-19 C × 5e-5 eV / (√3 × 6.582e-16 eV s).
        assert_relative_eq!(r.i0_na, 7.0268, max_relative = 1e-4);
        assert_relative_eq!(r.delta_grad_s, 7.5964, max_relative = 1e-4);
        assert_relative_eq!(r.delta_ghz, 1.2090, max_relative = 1e-4);
        assert_relative_eq!(r.temperature_bound_k, 0.011_605, max_relative = 1e-4);
        assert!(PhysicalUnits::new(0.0).is_err());
        assert!(PhysicalUnits::new(-1.0).is_err());
    }

    #[test]
    fn linear_in_gamma0() {
        let a = physical_units(&PhysicalUnits::new(0.05).unwrap());
        let b = physical_units(&PhysicalUnits::new(0.1).unwrap());
        assert_relative_eq!(b.i0_na, 2.0 * a.i0_na, max_relative = 1e-15);
        assert_relative_eq!(b.temperature_bound_k, 2.0 * a.temperature_bound_k, max_relative = 1e-15);
        assert_relative_eq!(current_na(&a, 0.5), 0.5 * a.i0_na);
        assert_relative_eq!(frequency_grad_s(&a, 2.0), 2.0 * a.delta_grad_s);
    }
}
