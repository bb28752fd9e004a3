//! Pseudospin model: drive Hamiltonian, rotating frame, Bloch algebra.
//!
//! The lab-frame Hamiltonian `H(t) = (Δ/2)[cos(ωt) σz + sin(ωt) σx]` is a
//! field of fixed length rotating about the y axis. In the frame rotating with
//! `R_y(ωt) = exp(-iωt σy/2)` it becomes the static
//! `H_eff = (Δ σz - ω σy)/2 = (ω'/2) n·σ` with `ω' = sqrt(ω² + Δ²)` and
//! `n = (0, -ω/ω', Δ/ω')`.
//!
//! States are Bloch vectors `r`, with `ρ = (1 + r·σ)/2`. The current
//! `I = I_0 <σy>` is the same in both frames because `R_y` commutes with σy.

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;

use crate::bath::SpectralDensity;
use crate::{Error, Result};

/// Default bath cutoff in units of Δ.
pub const DEFAULT_CUTOFF_OVER_DELTA: f64 = 50.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity() -> Matrix2<Complex64> {
    Matrix2::new(ONE, ZERO, ZERO, ONE)
}

pub fn sigma_x() -> Matrix2<Complex64> {
    Matrix2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> Matrix2<Complex64> {
    Matrix2::new(ZERO, -I, I, ZERO)
}

pub fn sigma_z() -> Matrix2<Complex64> {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

/// `[σx, σy, σz]`.
pub fn paulis() -> [Matrix2<Complex64>; 3] {
    [sigma_x(), sigma_y(), sigma_z()]
}

/// `v·σ` for a real vector.
pub fn dot_sigma(v: &Vector3<f64>) -> Matrix2<Complex64> {
    sigma_x() * Complex64::from(v.x) + sigma_y() * Complex64::from(v.y) + sigma_z() * Complex64::from(v.z)
}

/// Physical configuration in natural units.
///
/// `omega` may be negative (reversed drive chirality). `cutoff` may be
/// `f64::INFINITY` for a pure ohmic bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub delta: f64,
    pub omega: f64,
    pub temperature: f64,
    pub alpha_x: f64,
    pub alpha_z: f64,
    pub cutoff: f64,
}

impl SystemParams {
    /// Uncoupled system with the default cutoff `50 Δ`.
    pub fn new(delta: f64, omega: f64, temperature: f64) -> Self {
        Self {
            delta,
            omega,
            temperature,
            alpha_x: 0.0,
            alpha_z: 0.0,
            cutoff: DEFAULT_CUTOFF_OVER_DELTA * delta,
        }
    }

    /// Same coupling to both baths.
    pub fn with_alpha(self, alpha: f64) -> Self {
        self.with_couplings(alpha, alpha)
    }

    pub fn with_couplings(self, alpha_x: f64, alpha_z: f64) -> Self {
        Self {
            alpha_x,
            alpha_z,
            ..self
        }
    }

    pub fn with_cutoff(self, cutoff: f64) -> Self {
        Self { cutoff, ..self }
    }

    pub fn with_omega(self, omega: f64) -> Self {
        Self { omega, ..self }
    }

    pub fn with_temperature(self, temperature: f64) -> Self {
        Self {
            temperature,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value,
                    reason,
                })
            }
        }
        check(self.delta.is_finite() && self.delta > 0.0, "delta", self.delta, "must be positive and finite")?;
        check(self.omega.is_finite(), "omega", self.omega, "must be finite")?;
        check(
            self.temperature.is_finite() && self.temperature >= 0.0,
            "temperature",
            self.temperature,
            "must be non-negative and finite",
        )?;
        check(self.alpha_x.is_finite() && self.alpha_x >= 0.0, "alpha_x", self.alpha_x, "must be non-negative")?;
        check(self.alpha_z.is_finite() && self.alpha_z >= 0.0, "alpha_z", self.alpha_z, "must be non-negative")?;
        check(self.cutoff > 0.0, "cutoff", self.cutoff, "must be positive")?;
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.alpha_x == self.alpha_z
    }

    pub fn mean_alpha(&self) -> f64 {
        0.5 * (self.alpha_x + self.alpha_z)
    }

    pub fn bath_x(&self) -> SpectralDensity {
        SpectralDensity::new(self.alpha_x, self.cutoff)
    }

    pub fn bath_z(&self) -> SpectralDensity {
        SpectralDensity::new(self.alpha_z, self.cutoff)
    }

    /// Drive period `2π/|ω|`, or `None` without drive.
    pub fn drive_period(&self) -> Option<f64> {
        (self.omega != 0.0).then(|| std::f64::consts::TAU / self.omega.abs())
    }
}

/// Bloch vector of the rotating-frame reduced density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState(pub Vector3<f64>);

impl BlochState {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vector3::new(x, y, z))
    }

    /// Maximally mixed state.
    pub fn mixed() -> Self {
        Self(Vector3::zeros())
    }

    /// `|z,-⟩`, the σz eigenstate with eigenvalue -1.
    pub fn spin_down() -> Self {
        Self::new(0.0, 0.0, -1.0)
    }

    /// Rejects states with `|r| > 1 + tolerance`.
    pub fn checked(r: Vector3<f64>, tolerance: f64) -> Result<Self> {
        let excess = r.norm() - 1.0;
        if excess > tolerance || !excess.is_finite() {
            return Err(Error::Domain(format!(
                "Bloch vector norm exceeds 1 by {excess:.3e} (tolerance {tolerance:.1e})"
            )));
        }
        Ok(Self(r))
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `P = -n·r`, the population imbalance in favour of the ground state of
    /// `H_eff`.
    pub fn polarization(&self, field: &EffectiveField) -> f64 {
        -field.axis.dot(&self.0)
    }

    /// `ρ = (1 + r·σ)/2`.
    pub fn density_matrix(&self) -> Matrix2<Complex64> {
        (identity() + dot_sigma(&self.0)) * Complex64::from(0.5)
    }

    /// Inverse of [`density_matrix`](Self::density_matrix): `r_i = Tr(σ_i ρ)`.
    pub fn from_density_matrix(rho: &Matrix2<Complex64>) -> Self {
        let [sx, sy, sz] = paulis();
        Self::new(
            (sx * rho).trace().re,
            (sy * rho).trace().re,
            (sz * rho).trace().re,
        )
    }
}

/// Static rotating-frame field `H_eff = (ω'/2) n·σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveField {
    pub omega_prime: f64,
    pub axis: Vector3<f64>,
}

impl EffectiveField {
    pub fn hamiltonian(&self) -> Matrix2<Complex64> {
        dot_sigma(&self.axis) * Complex64::from(0.5 * self.omega_prime)
    }

    /// Unitary part of the Bloch equation: `dr/dt = ω' n × r`.
    pub fn precession_matrix(&self) -> nalgebra::Matrix3<f64> {
        self.axis.cross_matrix() * self.omega_prime
    }
}

/// Current unit `I_0` (1 in natural units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentScale {
    pub i0: f64,
}

impl Default for CurrentScale {
    fn default() -> Self {
        Self { i0: 1.0 }
    }
}

impl CurrentScale {
    pub fn new(i0: f64) -> Result<Self> {
        if i0 > 0.0 && i0.is_finite() {
            Ok(Self { i0 })
        } else {
            Err(Error::InvalidParameter {
                name: "i0",
                value: i0,
                reason: "must be positive",
            })
        }
    }
}

/// `(Δ/2)[cos(ωt) σz + sin(ωt) σx]`.
pub fn lab_hamiltonian(params: &SystemParams, t: f64) -> Matrix2<Complex64> {
    let (s, c) = (params.omega * t).sin_cos();
    (sigma_z() * Complex64::from(c) + sigma_x() * Complex64::from(s)) * Complex64::from(0.5 * params.delta)
}

pub fn effective_field(params: &SystemParams) -> EffectiveField {
    let omega_prime = params.omega.hypot(params.delta);
    EffectiveField {
        omega_prime,
        axis: Vector3::new(0.0, -params.omega / omega_prime, params.delta / omega_prime),
    }
}

/// The two transition frequencies `ω' + |ω|` and `ω' - |ω|` of the rotating
/// frame. The smaller one is formed as `Δ²/(ω' + |ω|)` so it stays accurate
/// for `|ω| ≫ Δ`.
pub fn sideband_frequencies(delta: f64, omega: f64) -> (f64, f64) {
    let sum = omega.hypot(delta) + omega.abs();
    (sum, delta * delta / sum)
}

/// Maps a rotating-frame Bloch vector to the lab frame, i.e. rotates it about
/// y by `+angle` (`angle = ωt`).
pub fn rotate_to_lab(state: &BlochState, angle: f64) -> BlochState {
    let (s, c) = angle.sin_cos();
    let r = state.0;
    BlochState::new(c * r.x + s * r.z, r.y, -s * r.x + c * r.z)
}

/// An eigenstate of `H_eff` and the DC current it carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenstate {
    pub state: BlochState,
    pub energy: f64,
    pub current: f64,
}

/// Eigenstates `|n;+⟩` (r = +n, energy +ω'/2) and `|n;-⟩` (r = -n, energy
/// -ω'/2), in that order. The ground state carries `+I_0 ω/ω'`.
pub fn eigenstates_and_currents(field: &EffectiveField, scale: &CurrentScale) -> [Eigenstate; 2] {
    let excited = BlochState(field.axis);
    let ground = BlochState(-field.axis);
    [
        Eigenstate {
            state: excited,
            energy: 0.5 * field.omega_prime,
            current: current_expectation(&excited, scale),
        },
        Eigenstate {
            state: ground,
            energy: -0.5 * field.omega_prime,
            current: current_expectation(&ground, scale),
        },
    ]
}

/// `I = I_0 r_y`.
pub fn current_expectation(state: &BlochState, scale: &CurrentScale) -> f64 {
    scale.i0 * state.0.y
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};

    fn max_abs(m: &Matrix2<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn lab_hamiltonian_special_times() {
        let p = SystemParams::new(1.0, 1.0, 0.0);
        let h0 = lab_hamiltonian(&p, 0.0);
        assert!(max_abs(&(h0 - sigma_z() * Complex64::from(0.5))) < 1e-15);
        let hq = lab_hamiltonian(&p, FRAC_PI_2);
        assert!(max_abs(&(hq - sigma_x() * Complex64::from(0.5))) < 1e-15);
    }

    #[test]
    fn lab_hamiltonian_spectrum_is_time_independent() {
        let p = SystemParams::new(2.0, 3.0, 0.0);
        let h = lab_hamiltonian(&p, 0.7);
        assert!(h.trace().norm() < 1e-15);
        assert!(max_abs(&(h - h.adjoint())) < 1e-15);
        // Real symmetric here (σz, σx only).
        let re = h.map(|z| z.re);
        let mut ev = SymmetricEigen::new(re).eigenvalues;
        ev.as_mut_slice().sort_by(f64::total_cmp);
        assert_relative_eq!(ev[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(ev[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn effective_field_examples() {
        let f = effective_field(&SystemParams::new(1.0, 0.0, 0.0));
        assert_eq!(f.omega_prime, 1.0);
        assert_eq!(f.axis, Vector3::new(0.0, 0.0, 1.0));

        let f = effective_field(&SystemParams::new(1.0, 1.0, 0.0));
        assert_relative_eq!(f.omega_prime, SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(f.axis, Vector3::new(0.0, -FRAC_1_SQRT_2, FRAC_1_SQRT_2), epsilon = 1e-15);

        let f = effective_field(&SystemParams::new(1.0, -1.0, 0.0));
        assert_relative_eq!(f.omega_prime, SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(f.axis, Vector3::new(0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2), epsilon = 1e-15);
    }

    #[test]
    fn effective_hamiltonian_matches_rotating_frame_transform() {
        // H_eff = R† H R - i R† dR/dt, R = exp(-iωtσy/2); checked at t = 0.3
        // with a central finite difference for dR/dt.
        let p = SystemParams::new(1.3, 0.8, 0.0);
        let t = 0.3;
        let r = |t: f64| {
            let th = 0.5 * p.omega * t;
            identity() * Complex64::from(th.cos()) - sigma_y() * Complex64::new(0.0, th.sin())
        };
        let h = 1e-5;
        let dr = (r(t + h) - r(t - h)) * Complex64::from(0.5 / h);
        let rt = r(t);
        let heff = rt.adjoint() * lab_hamiltonian(&p, t) * rt - rt.adjoint() * dr * I;
        let expect = effective_field(&p).hamiltonian();
        assert!(max_abs(&(heff - expect)) < 1e-9);
    }

    #[test]
    fn rotate_to_lab_examples() {
        let z = BlochState::new(0.0, 0.0, 1.0);
        assert_eq!(rotate_to_lab(&z, 0.0), z);
        let q = rotate_to_lab(&z, FRAC_PI_2);
        assert_relative_eq!(q.0, Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-12);
        let y = BlochState::new(0.0, 1.0, 0.0);
        assert_relative_eq!(rotate_to_lab(&y, 2.1).0, y.0, epsilon = 1e-15);
    }

    #[test]
    fn rotate_to_lab_matches_unitary_conjugation() {
        // ρ_lab = R ρ̃ R† with R = exp(-iθσy/2).
        let th: f64 = 0.9;
        let r = identity() * Complex64::from((0.5 * th).cos()) - sigma_y() * Complex64::new(0.0, (0.5 * th).sin());
        let s = BlochState::new(0.3, -0.2, 0.5);
        let lab = BlochState::from_density_matrix(&(r * s.density_matrix() * r.adjoint()));
        assert_relative_eq!(lab.0, rotate_to_lab(&s, th).0, epsilon = 1e-14);
    }

    #[test]
    fn eigenstate_currents() {
        let scale = CurrentScale::default();
        let [e, g] = eigenstates_and_currents(&effective_field(&SystemParams::new(1.0, 0.0, 0.0)), &scale);
        assert_eq!(e.current, 0.0);
        assert_eq!(g.current, 0.0);

        let field = effective_field(&SystemParams::new(1.0, 1.0, 0.0));
        let [e, g] = eigenstates_and_currents(&field, &scale);
        assert_relative_eq!(g.current, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(e.current, -FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(g.state.polarization(&field), 1.0, epsilon = 1e-15);
        // Eigenvector check against the 2x2 matrix.
        let h = field.hamiltonian();
        let rho = g.state.density_matrix();
        assert!(max_abs(&(h * rho - rho * Complex64::from(g.energy))) < 1e-15);

        let far = effective_field(&SystemParams::new(1.0, 1e4, 0.0));
        let [_, g] = eigenstates_and_currents(&far, &scale);
        assert!((g.current - 1.0).abs() < 1e-8);
    }

    #[test]
    fn current_expectation_examples() {
        let s = CurrentScale::new(2.5).unwrap();
        assert_eq!(current_expectation(&BlochState::new(0.0, 0.0, 1.0), &s), 0.0);
        assert_eq!(current_expectation(&BlochState::new(0.0, 1.0, 0.0), &s), 2.5);
        assert_relative_eq!(current_expectation(&BlochState::new(0.0, -0.4, 0.3), &s), -1.0, epsilon = 1e-15);
        assert!(CurrentScale::new(0.0).is_err());
    }

    #[test]
    fn density_matrix_round_trip_has_unit_trace() {
        let s = BlochState::new(0.1, -0.7, 0.2);
        let rho = s.density_matrix();
        assert_eq!(rho.trace(), ONE);
        assert!(max_abs(&(rho - rho.adjoint())) == 0.0);
        assert_relative_eq!(BlochState::from_density_matrix(&rho).0, s.0, epsilon = 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(SystemParams::new(1.0, 2.0, 0.1).with_alpha(1e-3).validate().is_ok());
        assert!(SystemParams::new(0.0, 2.0, 0.1).validate().is_err());
        assert!(SystemParams::new(1.0, 2.0, -0.1).validate().is_err());
        assert!(SystemParams::new(1.0, 2.0, 0.1).with_couplings(-1.0, 0.0).validate().is_err());
        assert!(SystemParams::new(1.0, 2.0, 0.1).with_cutoff(0.0).validate().is_err());
        assert!(SystemParams::new(1.0, 2.0, 0.1).with_cutoff(f64::INFINITY).validate().is_ok());
    }

    #[test]
    fn sideband_frequencies_are_accurate_at_large_drive() {
        let (sum, diff) = sideband_frequencies(1.0, 1e8);
        assert_eq!(sum, 2e8);
        assert_relative_eq!(diff, 5e-9, max_relative = 1e-15);
        let (sum, diff) = sideband_frequencies(1.0, -1.0);
        assert_relative_eq!(sum * diff, 1.0, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn lab_hamiltonian_is_periodic(omega in 0.1f64..10.0, t in -20.0f64..20.0) {
            let p = SystemParams::new(1.0, omega, 0.0);
            let d = lab_hamiltonian(&p, t) - lab_hamiltonian(&p, t + 2.0 * PI / omega);
            prop_assert!(max_abs(&d) < 1e-12);
        }

        #[test]
        fn effective_field_identities(omega in -100.0f64..100.0, delta in 0.01f64..10.0) {
            let f = effective_field(&SystemParams::new(delta, omega, 0.0));
            let lhs = f.omega_prime * f.omega_prime;
            let rhs = omega * omega + delta * delta;
            prop_assert!((lhs - rhs).abs() <= 2.0 * f64::EPSILON * rhs);
            prop_assert!((f.axis.norm() - 1.0).abs() < 1e-12);
            prop_assert_eq!(f.axis.x, 0.0);
            prop_assert!(f.omega_prime >= delta);
        }

        #[test]
        fn rotations_preserve_norm_and_compose(
            x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0,
            a in -10.0f64..10.0, b in -10.0f64..10.0,
        ) {
            let s = BlochState::new(x, y, z);
            let once = rotate_to_lab(&rotate_to_lab(&s, a), b);
            let direct = rotate_to_lab(&s, a + b);
            prop_assert!((once.0 - direct.0).norm() < 1e-10);
            prop_assert!((rotate_to_lab(&s, a).norm() - s.norm()).abs() < 1e-12);
            prop_assert_eq!(rotate_to_lab(&s, a).y(), y);
        }

        #[test]
        fn eigenstate_currents_are_odd_in_omega(omega in 0.01f64..50.0) {
            let scale = CurrentScale::default();
            let fp = effective_field(&SystemParams::new(1.0, omega, 0.0));
            let fm = effective_field(&SystemParams::new(1.0, -omega, 0.0));
            let [ep, gp] = eigenstates_and_currents(&fp, &scale);
            let [em, gm] = eigenstates_and_currents(&fm, &scale);
            prop_assert!((gp.current + gm.current).abs() < 1e-15);
            prop_assert!((ep.current + em.current).abs() < 1e-15);
            prop_assert!((gp.current - omega / fp.omega_prime).abs() < 1e-15);
        }
    }
}
